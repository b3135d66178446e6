#include "fidt/io.hpp"

#include <json.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fidt {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_map(const DenseMap& map, MapKind kind, std::ostream& out,
               const std::string& source_name) {
  if (map.rows() < 1 || map.cols() < 1)
    throw InvalidArgument("write_map: map must be at least 1x1");
  if (!map.allFinite())
    throw InvalidArgument("write_map: map entries must be finite");
  if (static_cast<std::uint32_t>(kind) > 3)
    throw InvalidArgument("write_map: unknown map kind");

  std::string bytes;
  bytes.reserve(kMapHeaderBytes + static_cast<std::size_t>(map.size()) * 4);
  bytes.append("FIDT", 4);
  put_u32(bytes, 1u);
  put_u32(bytes, static_cast<std::uint32_t>(map.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(map.cols()));
  put_u32(bytes, static_cast<std::uint32_t>(kind));
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    const float f = static_cast<float>(map.data()[i]);  // row-major buffer
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(bytes, u);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write_map: write to " + source_name + " failed");
}

void write_map(const DenseMap& map, MapKind kind, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::binary);
  write_map(map, kind, out, path.string());
}

std::pair<DenseMap, MapKind> read_map(std::istream& in, const std::string& source_name) {
  unsigned char header[kMapHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kMapHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kMapHeaderBytes))
    throw FormatError(source_name, in.gcount(), "truncated header");
  if (std::memcmp(header, "FIDT", 4) != 0)
    throw FormatError(source_name, 0, "bad magic (expected \"FIDT\")");
  const std::uint32_t version = get_u32(header + 4);
  if (version != 1)
    throw FormatError(source_name, 4, "unsupported version " + std::to_string(version));
  const std::uint32_t height = get_u32(header + 8);
  const std::uint32_t width = get_u32(header + 12);
  if (height < 1 || width < 1)
    throw FormatError(source_name, 8, "degenerate map dimensions");
  const std::uint32_t kind = get_u32(header + 16);
  if (kind > 3)
    throw FormatError(source_name, 16, "unknown map kind " + std::to_string(kind));

  const std::size_t count = static_cast<std::size_t>(height) * width;
  std::string payload(count * 4, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size()))
    throw FormatError(source_name,
                      static_cast<long long>(kMapHeaderBytes) + in.gcount(),
                      "truncated payload (expected " + std::to_string(count) +
                          " float32 values)");
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(source_name,
                      static_cast<long long>(kMapHeaderBytes + payload.size()),
                      "trailing bytes after payload");

  DenseMap map(height, width);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = get_u32(bytes + i * 4);
    float f;
    std::memcpy(&f, &u, 4);
    if (!std::isfinite(f))
      throw FormatError(source_name,
                        static_cast<long long>(kMapHeaderBytes + i * 4),
                        "non-finite map value");
    map.data()[i] = static_cast<double>(f);
  }
  return {std::move(map), static_cast<MapKind>(kind)};
}

std::pair<DenseMap, MapKind> read_map(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::binary);
  return read_map(in, path.string());
}

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double number_field(const json& v, const std::string& source, const char* what) {
  if (!v.is_number())
    throw FormatError(source, 0, std::string(what) + " must be a number");
  return v.get<double>();
}

PointMatrix parse_point_list(const json& arr, const std::string& source, const char* key) {
  if (!arr.is_array())
    throw FormatError(source, 0, std::string("\"") + key + "\" must be an array");
  PointMatrix m(2, arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& entry = arr[i];
    if (!entry.is_array() || entry.size() != 2)
      throw FormatError(source, 0,
                        std::string("\"") + key + "\" entry " + std::to_string(i) +
                            " must be a [a, b] pair");
    m(0, i) = number_field(entry[0], source, key);
    m(1, i) = number_field(entry[1], source, key);
  }
  return m;
}

}  // namespace

AnnotationDocument read_annotations(std::istream& in, const std::string& source_name,
                                    bool strict, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(source_name, static_cast<long long>(e.byte), e.what());
  }
  if (!doc.is_object())
    throw FormatError(source_name, 0, "annotation document must be a JSON object");

  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key == "image_id" || key == "width" || key == "height" || key == "points" ||
        key == "boxes")
      continue;
    if (strict)
      throw FormatError(source_name, 0, "unknown key \"" + key + "\"");
    if (warnings) warnings->push_back(source_name + ": ignoring unknown key \"" + key + "\"");
  }
  for (const char* required : {"image_id", "width", "height", "points"})
    if (!doc.contains(required))
      throw FormatError(source_name, 0, std::string("missing key \"") + required + "\"");

  AnnotationDocument out;
  if (!doc["image_id"].is_string())
    throw FormatError(source_name, 0, "\"image_id\" must be a string");
  out.image_id = doc["image_id"].get<std::string>();

  for (const char* dim : {"width", "height"}) {
    if (!doc[dim].is_number_integer() || doc[dim].get<long long>() < 1)
      throw FormatError(source_name, 0,
                        std::string("\"") + dim + "\" must be a positive integer");
  }
  out.points.width = doc["width"].get<int>();
  out.points.height = doc["height"].get<int>();
  out.points.points = parse_point_list(doc["points"], source_name, "points");
  if (doc.contains("boxes"))
    out.points.boxes = parse_point_list(doc["boxes"], source_name, "boxes");

  try {
    validate(out.points);
  } catch (const InvalidArgument& e) {
    throw FormatError(source_name, 0, e.what());
  }
  return out;
}

AnnotationDocument read_annotations(const std::filesystem::path& path, bool strict,
                                    std::vector<std::string>* warnings) {
  auto in = open_input(path, std::ios::in);
  return read_annotations(in, path.string(), strict, warnings);
}

void write_annotations(const AnnotationDocument& doc, std::ostream& out) {
  validate(doc.points);
  ordered_json j;
  j["image_id"] = doc.image_id;
  j["width"] = doc.points.width;
  j["height"] = doc.points.height;
  j["points"] = json::array();
  for (Eigen::Index i = 0; i < doc.points.size(); ++i)
    j["points"].push_back({doc.points.points(0, i), doc.points.points(1, i)});
  if (doc.points.boxes) {
    j["boxes"] = json::array();
    for (Eigen::Index i = 0; i < doc.points.boxes->cols(); ++i)
      j["boxes"].push_back({(*doc.points.boxes)(0, i), (*doc.points.boxes)(1, i)});
  }
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write_annotations: write failed");
}

void write_annotations(const AnnotationDocument& doc, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out);
  write_annotations(doc, out);
}

namespace {

// Parses `expected` comma-separated reals per line; empty input is an empty
// list. Reports 1-based line numbers.
std::vector<std::array<double, 3>> read_csv_rows(std::istream& in,
                                                 const std::string& source, int expected) {
  std::vector<std::array<double, 3>> rows;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // A blank final line is just a trailing newline; interior blanks are malformed.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw FormatError(source, line_no, "blank line");
    }
    std::array<double, 3> row{0, 0, 0};
    std::size_t start = 0;
    for (int field = 0; field < expected; ++field) {
      const std::size_t comma = line.find(',', start);
      const bool last = field == expected - 1;
      if (last != (comma == std::string::npos))
        throw FormatError(source, line_no,
                          "expected " + std::to_string(expected) + " comma-separated fields");
      const std::string token = line.substr(start, last ? std::string::npos : comma - start);
      try {
        std::size_t consumed = 0;
        row[static_cast<std::size_t>(field)] = std::stod(token, &consumed);
        while (consumed < token.size() && std::isspace(static_cast<unsigned char>(token[consumed])))
          ++consumed;
        if (consumed != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw FormatError(source, line_no, "malformed number \"" + token + "\"");
      }
      start = comma + 1;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

PointMatrix read_points_csv(std::istream& in, const std::string& source_name) {
  const auto rows = read_csv_rows(in, source_name, 2);
  PointMatrix m(2, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m(0, i) = rows[i][0];
    m(1, i) = rows[i][1];
  }
  return m;
}

PointMatrix read_points_csv(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in);
  return read_points_csv(in, path.string());
}

void write_points_csv(const PointMatrix& points, std::ostream& out) {
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    out << format_real(points(0, i)) << ',' << format_real(points(1, i)) << '\n';
  if (!out) throw IoError("write_points_csv: write failed");
}

void write_points_csv(const PointMatrix& points, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out);
  write_points_csv(points, out);
}

std::vector<PseudoBox> read_boxes_csv(std::istream& in, const std::string& source_name) {
  const auto rows = read_csv_rows(in, source_name, 3);
  std::vector<PseudoBox> boxes;
  boxes.reserve(rows.size());
  for (const auto& r : rows) boxes.push_back({{r[0], r[1]}, r[2]});
  return boxes;
}

std::vector<PseudoBox> read_boxes_csv(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in);
  return read_boxes_csv(in, path.string());
}

void write_boxes_csv(const std::vector<PseudoBox>& boxes, std::ostream& out) {
  for (const auto& b : boxes)
    out << format_real(b.center.x()) << ',' << format_real(b.center.y()) << ','
        << format_real(b.size) << '\n';
  if (!out) throw IoError("write_boxes_csv: write failed");
}

void write_boxes_csv(const std::vector<PseudoBox>& boxes,
                     const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out);
  write_boxes_csv(boxes, out);
}

}  // namespace fidt
