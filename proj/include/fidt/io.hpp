#pragma once

#include "fidt/boxes.hpp"
#include "fidt/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fidt {

// Binary map file: 20-byte header (magic "FIDT", u32 version = 1, u32 height,
// u32 width, u32 kind, all little-endian) followed by height*width float32
// little-endian values, row-major, top row first.
enum class MapKind : std::uint32_t {
  distance = 0,
  idt = 1,
  fidt = 2,
  predicted = 3,
};

inline constexpr std::size_t kMapHeaderBytes = 20;

// Values are materialized as float32; pass maps whose entries are
// float-representable for bit-exact round-trips. Rejects non-finite entries.
void write_map(const DenseMap& map, MapKind kind, std::ostream& out,
               const std::string& source_name = "<stream>");
void write_map(const DenseMap& map, MapKind kind, const std::filesystem::path& path);

std::pair<DenseMap, MapKind> read_map(std::istream& in,
                                      const std::string& source_name = "<stream>");
std::pair<DenseMap, MapKind> read_map(const std::filesystem::path& path);

// Annotation document: UTF-8 JSON object with exactly the keys image_id,
// width, height, points, and optionally boxes.
struct AnnotationDocument {
  std::string image_id;
  PointSet points;
};

// Unknown keys are rejected in strict mode, otherwise collected as warnings.
AnnotationDocument read_annotations(std::istream& in,
                                    const std::string& source_name = "<stream>",
                                    bool strict = true,
                                    std::vector<std::string>* warnings = nullptr);
AnnotationDocument read_annotations(const std::filesystem::path& path, bool strict = true,
                                    std::vector<std::string>* warnings = nullptr);

void write_annotations(const AnnotationDocument& doc, std::ostream& out);
void write_annotations(const AnnotationDocument& doc, const std::filesystem::path& path);

// Headerless CSV, one "x,y" record per line, 17 significant digits.
PointMatrix read_points_csv(std::istream& in, const std::string& source_name = "<stream>");
PointMatrix read_points_csv(const std::filesystem::path& path);
void write_points_csv(const PointMatrix& points, std::ostream& out);
void write_points_csv(const PointMatrix& points, const std::filesystem::path& path);

// Headerless CSV, one "x,y,s" record per line.
std::vector<PseudoBox> read_boxes_csv(std::istream& in,
                                      const std::string& source_name = "<stream>");
std::vector<PseudoBox> read_boxes_csv(const std::filesystem::path& path);
void write_boxes_csv(const std::vector<PseudoBox>& boxes, std::ostream& out);
void write_boxes_csv(const std::vector<PseudoBox>& boxes, const std::filesystem::path& path);

// "%.17g" rendering used by every text format.
std::string format_real(double value);

}  // namespace fidt
