#include "woven/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace woven::io {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaViolation, what); }

double finite_number(const Json& value, const std::string& where) {
  if (!value.is_number()) schema(where + " must be a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) schema(where + " must be finite");
  return v;
}

const Json& field(const Json& object, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) schema(std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace

Json frame_to_json(const Frame& frame) {
  Json atoms = Json::array();
  for (Eigen::Index k = 0; k < frame.size(); ++k) {
    Json atom = Json::array();
    for (Eigen::Index i = 0; i < frame.dim(); ++i) atom.push_back(frame.atoms()(i, k));
    atoms.push_back(std::move(atom));
  }
  Json weights = Json::array();
  for (Eigen::Index k = 0; k < frame.size(); ++k) weights.push_back(frame.weights()(k));
  Json out;
  out["dim"] = frame.dim();
  out["weights"] = std::move(weights);
  out["atoms"] = std::move(atoms);
  out["label"] = frame.label();
  return out;
}

Frame frame_from_json(const Json& json) {
  if (!json.is_object()) schema("frame must be a JSON object");
  const Json& dim_field = field(json, "dim");
  if (!dim_field.is_number_integer() || dim_field.get<long long>() < 1) schema("\"dim\" must be a positive integer");
  const auto dim = static_cast<Eigen::Index>(dim_field.get<long long>());

  const Json& weights = field(json, "weights");
  const Json& atoms = field(json, "atoms");
  if (!weights.is_array() || !atoms.is_array()) schema("\"weights\" and \"atoms\" must be arrays");
  if (atoms.empty()) schema("a frame needs at least one atom");
  if (weights.size() != atoms.size()) schema("\"weights\" and \"atoms\" must have the same length");

  const auto n = static_cast<Eigen::Index>(atoms.size());
  Matrix<double> a(dim, n);
  Vector<double> w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double wk = finite_number(weights[k], "weight " + std::to_string(k));
    if (!(wk > 0)) schema("weight " + std::to_string(k) + " must be positive");
    w(k) = wk;
    const Json& atom = atoms[k];
    if (!atom.is_array() || static_cast<Eigen::Index>(atom.size()) != dim) {
      schema("atom " + std::to_string(k) + " must be an array of length dim");
    }
    for (Eigen::Index i = 0; i < dim; ++i) a(i, k) = finite_number(atom[i], "atom " + std::to_string(k));
  }
  std::string label;
  if (const auto it = json.find("label"); it != json.end()) {
    if (!it->is_string()) schema("\"label\" must be a string");
    label = it->get<std::string>();
  }
  try {
    return Frame(std::move(a), std::move(w), std::move(label));
  } catch (const Error& e) {
    schema(e.what());
  }
}

Json matrix_to_json(const Matrix<double>& m) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) entries.push_back(m(i, j));
  Json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["entries"] = std::move(entries);
  return out;
}

Matrix<double> matrix_from_json(const Json& json) {
  if (!json.is_object()) schema("matrix must be a JSON object");
  const Json& rows = field(json, "rows");
  const Json& cols = field(json, "cols");
  const Json& entries = field(json, "entries");
  if (!rows.is_number_integer() || !cols.is_number_integer() || rows.get<long long>() < 1 || cols.get<long long>() < 1) {
    schema("\"rows\" and \"cols\" must be positive integers");
  }
  const auto r = static_cast<Eigen::Index>(rows.get<long long>());
  const auto c = static_cast<Eigen::Index>(cols.get<long long>());
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != r * c) {
    schema("\"entries\" must hold rows * cols numbers");
  }
  Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = finite_number(entries[i * c + j], "matrix entry");
  return m;
}

Json partition_to_json(const Partition& p) { return Json(p.assignment); }

Json report_to_json(const WeavingReport<double>& report) {
  Json out;
  out["universal_lower"] = report.universal_lower;
  out["universal_upper"] = report.universal_upper;
  out["woven"] = report.woven;
  out["worst_partition"] = partition_to_json(report.worst_partition);
  out["partitions_examined"] = report.partitions_examined;
  out["mode"] = report.mode.describe();
  out["bessel_sum"] = report.bessel_sum;
  if (!report.lower_series.empty()) {
    out["series"] = {{"lower", report.lower_series}, {"upper", report.upper_series}};
  }
  return out;
}

Json certificate_to_json(const Certificate<double>& cert) {
  Json values = Json::object();
  for (const auto& [name, value] : cert.hypothesis_values) values[name] = value;
  Json out;
  out["theorem"] = cert.theorem;
  out["hypothesis_values"] = std::move(values);
  out["guaranteed_lower"] = cert.guaranteed_lower;
  out["hypothesis_satisfied"] = cert.hypothesis_satisfied;
  out["premise_mode"] = std::string(to_string(cert.premise_mode));
  return out;
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str());
}

void write_json_file(const std::filesystem::path& path, const Json& json) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadParams, "cannot write " + path.string());
  out << json.dump(2) << '\n';
}

Frame read_frame(const std::filesystem::path& path) { return frame_from_json(read_json_file(path)); }

void write_frame(const std::filesystem::path& path, const Frame& frame) { write_json_file(path, frame_to_json(frame)); }

bool identical(const Frame& a, const Frame& b) {
  return a.dim() == b.dim() && a.size() == b.size() && a.atoms() == b.atoms() && a.weights() == b.weights() &&
         a.label() == b.label();
}

bool round_trip(const std::filesystem::path& path) {
  const Frame first = read_frame(path);
  const Frame second = frame_from_json(parse_json_text(frame_to_json(first).dump()));
  return identical(first, second);
}

}  // namespace woven::io
