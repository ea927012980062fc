#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "woven/generators.hpp"
#include "woven/io.hpp"

using namespace woven;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "woven_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::BadParams;
}

}  // namespace

TEST_CASE("frame files round-trip exactly") {
  const auto p1 = scratch("onb4.json");
  io::write_frame(p1, onb(4));
  CHECK(io::round_trip(p1));
  CHECK(io::identical(io::read_frame(p1), onb(4)));

  const auto p2 = scratch("gauss.json");
  const auto g = random_gaussian(5, 9, 7);
  io::write_frame(p2, g);
  CHECK(io::round_trip(p2));
  const auto back = io::read_frame(p2);
  CHECK(io::identical(back, g));
  // Bit-for-bit, not approximately.
  CHECK(back.atoms() == g.atoms());
  CHECK(back.weights() == g.weights());

  const auto p3 = scratch("translation.json");
  io::write_frame(p3, translation(16, 2.0));
  CHECK(io::identical(io::read_frame(p3), translation(16, 2.0)));
}

TEST_CASE("frame schema") {
  const auto json = io::frame_to_json(tight_mercedes());
  CHECK(json["dim"] == 2);
  CHECK(json["weights"].size() == 3);
  CHECK(json["atoms"].size() == 3);
  CHECK(json["atoms"][0].size() == 2);
  CHECK(json["label"] == "mercedes");

  const auto neg = scratch("negative.json");
  write_text(neg, R"({"dim": 2, "weights": [1, -1], "atoms": [[1, 0], [0, 1]], "label": ""})");
  CHECK(code_of([&] { io::read_frame(neg); }) == ErrorCode::SchemaViolation);

  const auto missing = scratch("missing.json");
  write_text(missing, R"({"dim": 2, "atoms": [[1, 0]]})");
  CHECK(code_of([&] { io::read_frame(missing); }) == ErrorCode::SchemaViolation);

  const auto ragged = scratch("ragged.json");
  write_text(ragged, R"({"dim": 2, "weights": [1, 1], "atoms": [[1, 0], [0]]})");
  CHECK(code_of([&] { io::read_frame(ragged); }) == ErrorCode::SchemaViolation);

  const auto text = scratch("text.json");
  write_text(text, R"({"dim": 2, "weights": [1, "x"], "atoms": [[1, 0], [0, 1]]})");
  CHECK(code_of([&] { io::read_frame(text); }) == ErrorCode::SchemaViolation);

  const auto broken = scratch("broken.json");
  write_text(broken, R"({"dim": 2, "weights": [1)");
  CHECK(code_of([&] { io::read_frame(broken); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { io::read_frame(scratch("does-not-exist.json")); }) == ErrorCode::ParseError);

  // Label is optional.
  const auto bare = scratch("bare.json");
  write_text(bare, R"({"dim": 1, "weights": [2], "atoms": [[3]]})");
  CHECK(io::read_frame(bare).weights()(0) == 2.0);
}

TEST_CASE("matrix, report and certificate JSON") {
  Matrix<double> m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto j = io::matrix_to_json(m);
  CHECK(j["entries"][1] == 2.0);
  CHECK(j["entries"][3] == 4.0);
  CHECK(io::matrix_from_json(j) == m);

  const auto report = weaving_bounds(onb(2), scaled_copy(onb(2), 2.0), SweepMode::exhaustive(), SweepOptions{true});
  const auto r = io::report_to_json(report);
  for (const char* key : {"universal_lower", "universal_upper", "woven", "worst_partition", "partitions_examined", "mode"}) {
    CHECK(r.contains(key));
  }
  CHECK(r["mode"] == "exhaustive");
  CHECK(r["series"]["lower"].size() == 4);
  CHECK(io::report_to_json(weaving_bounds(onb(2), onb(2), SweepMode::sampled(10, 4)))["mode"] ==
        "sampled(count=10,seed=4)");

  const auto cert = io::certificate_to_json(operator_weaving_check(onb(2), Matrix<double>(0.9 * Matrix<double>::Identity(2, 2))));
  CHECK(cert["theorem"] == "operator-weaving");
  CHECK(cert["premise_mode"] == "certified");
  CHECK(cert["hypothesis_satisfied"] == true);
  CHECK(cert["hypothesis_values"].contains("A_F"));
}
