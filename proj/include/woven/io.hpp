#pragma once

// JSON persistence for frames, operators, and reports. Doubles are written in
// their shortest round-trip form, so parse(serialize(x)) == x bit for bit.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "woven/constructions.hpp"
#include "woven/frames.hpp"
#include "woven/weaving.hpp"

namespace woven::io {

using Json = nlohmann::ordered_json;
using Frame = DiscretizedFrame<double>;

/// {"dim", "weights", "atoms", "label"}; atoms are listed one per row.
Json frame_to_json(const Frame& frame);
Frame frame_from_json(const Json& json);

/// {"rows", "cols", "entries"} with entries in row-major order.
Json matrix_to_json(const Matrix<double>& m);
Matrix<double> matrix_from_json(const Json& json);

Json partition_to_json(const Partition& p);
Json report_to_json(const WeavingReport<double>& report);
Json certificate_to_json(const Certificate<double>& cert);

Json parse_json_text(const std::string& text);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& json);

Frame read_frame(const std::filesystem::path& path);
void write_frame(const std::filesystem::path& path, const Frame& frame);

/// Parse, serialize, parse again; true when both parses agree exactly.
bool round_trip(const std::filesystem::path& path);

bool identical(const Frame& a, const Frame& b);

}  // namespace woven::io
