#include "fidt/io.hpp"

#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace fidt;
using testutil::make_point_set;

namespace {

DenseMap random_float_valued_map(std::mt19937& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DenseMap m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<double>(static_cast<float>(u(rng)));
  return m;
}

std::string write_map_to_string(const DenseMap& m, MapKind kind) {
  std::ostringstream out(std::ios::binary);
  write_map(m, kind, out);
  return out.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("1x1 map has the documented byte layout") {
  DenseMap m(1, 1);
  m(0, 0) = 1.0;
  const std::string bytes = write_map_to_string(m, MapKind::fidt);
  REQUIRE(bytes.size() == 24);
  CHECK(bytes.compare(0, 4, "FIDT") == 0);
  const unsigned char expect[] = {
      1, 0, 0, 0,     // version
      1, 0, 0, 0,     // height
      1, 0, 0, 0,     // width
      2, 0, 0, 0,     // kind = fidt
      0x00, 0x00, 0x80, 0x3F,  // 1.0f
  };
  CHECK(std::memcmp(bytes.data() + 4, expect, sizeof(expect)) == 0);
}

TEST_CASE("map round-trip is bit exact") {
  std::mt19937 rng(71);
  const DenseMap m = random_float_valued_map(rng, 64, 64);
  const std::string bytes = write_map_to_string(m, MapKind::predicted);

  std::istringstream in(bytes, std::ios::binary);
  const auto [back, kind] = read_map(in);
  CHECK(kind == MapKind::predicted);
  REQUIRE(back.rows() == 64);
  REQUIRE(back.cols() == 64);
  CHECK((back == m).all());

  // and the bytes themselves reproduce
  CHECK(write_map_to_string(back, kind) == bytes);
}

TEST_CASE("map format errors are typed and positioned") {
  DenseMap m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const std::string bytes = write_map_to_string(m, MapKind::distance);

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(read_map(in), FormatError);
  }
  SUBCASE("bad version") {
    std::string bad = bytes;
    bad[4] = 9;
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(read_map(in), FormatError);
  }
  SUBCASE("truncated payload") {
    std::istringstream in(bytes.substr(0, bytes.size() - 5), std::ios::binary);
    try {
      read_map(in);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.where() >= 20);
    }
  }
  SUBCASE("truncated header") {
    std::istringstream in(bytes.substr(0, 10), std::ios::binary);
    CHECK_THROWS_AS(read_map(in), FormatError);
  }
  SUBCASE("trailing bytes") {
    std::istringstream in(bytes + "x", std::ios::binary);
    CHECK_THROWS_AS(read_map(in), FormatError);
  }
  SUBCASE("unknown kind") {
    std::string bad = bytes;
    bad[16] = 7;
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(read_map(in), FormatError);
  }
  SUBCASE("non-finite payload") {
    std::string bad = bytes;
    bad[20] = char(0x00);
    bad[21] = char(0x00);
    bad[22] = char(0x80);
    bad[23] = char(0x7F);  // +inf
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(read_map(in), FormatError);
  }
  SUBCASE("writing non-finite maps is rejected") {
    DenseMap bad = m;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    std::ostringstream out(std::ios::binary);
    CHECK_THROWS_AS(write_map(bad, MapKind::distance, out), InvalidArgument);
  }
}

TEST_CASE("minimal annotation document parses") {
  std::istringstream in(R"({"image_id":"a","width":8,"height":8,"points":[[0,0]]})");
  const AnnotationDocument doc = read_annotations(in);
  CHECK(doc.image_id == "a");
  CHECK(doc.points.width == 8);
  CHECK(doc.points.height == 8);
  REQUIRE(doc.points.size() == 1);
  CHECK(doc.points.points(0, 0) == 0.0);
  CHECK(!doc.points.boxes.has_value());
}

TEST_CASE("empty points list is a valid negative sample") {
  std::istringstream in(R"({"image_id":"neg","width":16,"height":16,"points":[]})");
  const AnnotationDocument doc = read_annotations(in);
  CHECK(doc.points.empty());
}

TEST_CASE("annotation schema violations are rejected") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_annotations(in);
  };
  // boxes/points length mismatch
  CHECK_THROWS_AS(
      parse(R"({"image_id":"a","width":8,"height":8,"points":[[1,1],[2,2]],"boxes":[[1,1]]})"),
      FormatError);
  // out-of-bounds point
  CHECK_THROWS_AS(parse(R"({"image_id":"a","width":8,"height":8,"points":[[8,0]]})"),
                  FormatError);
  // missing key
  CHECK_THROWS_AS(parse(R"({"image_id":"a","width":8,"points":[[1,1]]})"), FormatError);
  // malformed JSON
  CHECK_THROWS_AS(parse(R"({"image_id":)"), FormatError);
  // non-integer dimension
  CHECK_THROWS_AS(parse(R"({"image_id":"a","width":8.5,"height":8,"points":[]})"),
                  FormatError);
  // non-positive box extent
  CHECK_THROWS_AS(
      parse(R"({"image_id":"a","width":8,"height":8,"points":[[1,1]],"boxes":[[0,2]]})"),
      FormatError);
}

TEST_CASE("unknown keys: strict rejects, lenient warns") {
  const std::string text =
      R"({"image_id":"a","width":8,"height":8,"points":[],"extra":1})";
  {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_annotations(in, "<mem>", true), FormatError);
  }
  {
    std::istringstream in(text);
    std::vector<std::string> warnings;
    const AnnotationDocument doc = read_annotations(in, "<mem>", false, &warnings);
    CHECK(doc.image_id == "a");
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("extra") != std::string::npos);
  }
}

TEST_CASE("annotation round-trip preserves order and values") {
  std::mt19937 rng(72);
  std::uniform_real_distribution<double> u(0.0, 639.0);
  AnnotationDocument doc;
  doc.image_id = "img_0021";
  doc.points.width = 640;
  doc.points.height = 640;
  doc.points.points.resize(2, 25);
  for (int i = 0; i < 25; ++i) {
    doc.points.points(0, i) = u(rng);
    doc.points.points(1, i) = u(rng);
  }
  PointMatrix boxes(2, 25);
  for (int i = 0; i < 25; ++i) {
    boxes(0, i) = 1.0 + u(rng) / 100.0;
    boxes(1, i) = 1.0 + u(rng) / 100.0;
  }
  doc.points.boxes = boxes;

  std::ostringstream out;
  write_annotations(doc, out);
  std::istringstream in(out.str());
  const AnnotationDocument back = read_annotations(in);
  CHECK(back.image_id == doc.image_id);
  CHECK(back.points.points == doc.points.points);
  REQUIRE(back.points.boxes.has_value());
  CHECK(*back.points.boxes == *doc.points.boxes);
}

TEST_CASE("points CSV basics") {
  {
    std::istringstream in("5,5\n");
    const PointMatrix m = read_points_csv(in);
    REQUIRE(m.cols() == 1);
    CHECK(m(0, 0) == 5.0);
    CHECK(m(1, 0) == 5.0);
  }
  {
    std::istringstream in("");
    CHECK(read_points_csv(in).cols() == 0);
  }
  {
    std::istringstream in("1,2\n3,nope\n");
    try {
      read_points_csv(in);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.where() == 2);  // 1-based line number
    }
  }
  {
    std::istringstream in("1,2,3\n");
    CHECK_THROWS_AS(read_points_csv(in), FormatError);
  }
}

TEST_CASE("boxes CSV basics") {
  std::istringstream in("1,2,0.8\n");
  const auto boxes = read_boxes_csv(in);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].center.x() == 1.0);
  CHECK(boxes[0].center.y() == 2.0);
  CHECK(boxes[0].size == 0.8);

  std::istringstream two("1,2\n");
  CHECK_THROWS_AS(read_boxes_csv(two), FormatError);
}

TEST_CASE("CSV round-trips are value exact") {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointMatrix pts(2, 40);
  for (int i = 0; i < 40; ++i) {
    pts(0, i) = u(rng) * 1000.0;
    pts(1, i) = u(rng);
  }
  std::ostringstream out;
  write_points_csv(pts, out);
  std::istringstream in(out.str());
  const PointMatrix back = read_points_csv(in);
  CHECK(back == pts);

  std::vector<PseudoBox> boxes;
  for (int i = 0; i < 12; ++i) boxes.push_back({{u(rng) * 99.0, u(rng) * 77.0}, u(rng) * 5.0});
  std::ostringstream bout;
  write_boxes_csv(boxes, bout);
  std::istringstream bin(bout.str());
  const auto bback = read_boxes_csv(bin);
  REQUIRE(bback.size() == boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    CHECK(bback[i].center == boxes[i].center);
    CHECK(bback[i].size == boxes[i].size);
  }
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(read_map(std::filesystem::path("/nonexistent/m.fmap")), IoError);
  CHECK_THROWS_AS(read_annotations(std::filesystem::path("/nonexistent/a.json")), IoError);
  CHECK_THROWS_AS(read_points_csv(std::filesystem::path("/nonexistent/p.csv")), IoError);
}

}  // TEST_SUITE
