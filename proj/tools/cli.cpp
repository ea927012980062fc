#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "woven/io.hpp"
#include "woven/version.hpp"
#include "woven/woven.hpp"

namespace woven::cli {

namespace {

using io::Frame;
using io::Json;
using Mat = Matrix<double>;
using Vec = Vector<double>;

// Exit 2 signals a valid report whose hypothesis did not hold.
struct HypothesisNotSatisfied {
  Json result;
  std::string message;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::BadParams, std::string(what) + ": cannot parse \"" + item + "\"");
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::BadParams, std::string(what) + " is empty");
  return values;
}

Vec to_vector(const std::vector<double>& values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

Mat read_matrix(const std::string& path) { return io::matrix_from_json(io::read_json_file(path)); }

// scale:x, rotate:theta (plane of the first two coordinates), matrix-file:path.
Mat parse_operator(const std::string& text, Eigen::Index dim) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::BadParams, "operator must be kind:value, got \"" + text + "\"");
  const std::string kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  if (kind == "scale") return parse_list(value, "scale")[0] * Mat::Identity(dim, dim);
  if (kind == "rotate") {
    if (dim < 2) throw Error(ErrorCode::BadParams, "rotate needs dim >= 2");
    const double theta = parse_list(value, "rotate")[0];
    Mat t = Mat::Identity(dim, dim);
    t(0, 0) = std::cos(theta);
    t(0, 1) = -std::sin(theta);
    t(1, 0) = std::sin(theta);
    t(1, 1) = std::cos(theta);
    return t;
  }
  if (kind == "matrix-file") {
    Mat t = read_matrix(value);
    if (t.rows() != dim || t.cols() != dim) throw Error(ErrorCode::DimensionMismatch, "operator file must be dim x dim");
    return t;
  }
  throw Error(ErrorCode::BadParams, "unknown operator kind \"" + kind + "\"");
}

struct Options {
  // gen
  std::string kind;
  long long dim = 0;
  long long count = 0;
  long long grid = 0;
  double width = 1.0;
  double factor = 1.0;
  std::string input;
  // shared
  std::optional<std::uint64_t> seed;
  std::string frame, frame2, op, op2, out;
  std::string a, b;
  std::string mode = "exhaustive";
  std::size_t samples = kDefaultSamples;
  bool series = false;
  std::optional<double> tolerance;
  std::string theorem;
  // construct / check extras
  std::string vector, coeffs, abc, e, h, ratios_a, ratios_b;
  double budget = 0.5;
};

std::uint64_t require_seed(const Options& o, const char* why) {
  if (!o.seed) throw Error(ErrorCode::BadParams, std::string("--seed is required for ") + why);
  return *o.seed;
}

SweepMode sweep_mode(const Options& o) {
  if (o.mode == "exhaustive") return SweepMode::exhaustive();
  if (o.mode == "sampled") {
    if (o.samples == 0) throw Error(ErrorCode::BadParams, "--samples must be positive");
    return SweepMode::sampled(o.samples, require_seed(o, "sampled mode"));
  }
  throw Error(ErrorCode::BadParams, "--mode must be exhaustive or sampled");
}

Frame load(const std::string& path, const char* flag) {
  if (path.empty()) throw Error(ErrorCode::BadParams, std::string(flag) + " is required");
  return io::read_frame(path);
}

const std::string& need(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::BadParams, std::string(flag) + " is required");
  return value;
}

Json bounds_json(const FrameBounds<double>& b) { return Json{{"lower", b.lower}, {"upper", b.upper}}; }

Json certified(const Certificate<double>& cert) {
  Json result = io::certificate_to_json(cert);
  if (!cert.hypothesis_satisfied) throw HypothesisNotSatisfied{result, cert.theorem + ": hypothesis not satisfied"};
  return result;
}

Json cmd_gen(const Options& o) {
  const auto kind = parse_generator_kind(o.kind);
  if (!kind) throw Error(ErrorCode::BadParams, "unknown generator kind \"" + o.kind + "\"");
  GeneratorParams<double> params;
  params.dim = o.dim;
  params.count = o.count;
  params.grid_size = o.grid;
  params.width = o.width;
  params.factor = o.factor;
  if (!o.input.empty()) params.source = io::read_frame(o.input);
  std::uint64_t seed = 0;
  if (*kind == GeneratorKind::RandomGaussian || *kind == GeneratorKind::RandomRiesz) seed = require_seed(o, "random generators");
  return io::frame_to_json(generate(*kind, params, seed));
}

Json cmd_analyze(const Options& o) {
  const Frame f = load(o.frame, "--frame");
  const auto fb = frame_bounds(f);
  const auto rb = riesz_bounds(f);
  const Eigen::Index rank = numerical_rank(Mat(f.weighted_atoms()), kSpanTolerance);
  Json result;
  result["dim"] = f.dim();
  result["size"] = f.size();
  result["frame_bounds"] = bounds_json(fb);
  result["is_frame"] = fb.is_frame();
  result["riesz_bounds"] = bounds_json(rb);
  result["is_riesz_basis"] = is_riesz_basis(f);
  result["redundancy"] = f.size() - rank;
  if (fb.is_frame()) {
    const Frame dual = canonical_dual(f);
    const auto check = is_dual_pair(f, dual);
    // Reconstruct a fixed probe vector through analysis then dual synthesis.
    const Vec x = Vec::LinSpaced(f.dim(), 1.0, static_cast<double>(f.dim()));
    const Vec back = synthesis(dual, analysis(f, x));
    result["dual_residual"] = check.residual;
    result["reconstruction_residual"] = (back - x).norm() / x.norm();
  }
  return result;
}

Json cmd_weave(const Options& o) {
  const Frame f = load(o.a, "--a");
  const Frame g = load(o.b, "--b");
  SweepOptions opts;
  opts.record_series = o.series;
  if (o.tolerance) opts.tolerance = *o.tolerance;
  return io::report_to_json(weaving_bounds(f, g, sweep_mode(o), opts));
}

Json construction_json(const Construction<double>& c) {
  Json result;
  result["frame"] = io::frame_to_json(c.frame);
  result["certificate"] = io::certificate_to_json(c.certificate);
  return result;
}

Json cmd_construct(const Options& o) {
  const Frame f = load(o.frame, "--frame");
  const std::string& t = o.theorem;
  try {
    if (t == "woven-dual") return construction_json(construct_woven_dual(f, require_seed(o, "woven-dual")));
    if (t == "approx-dual") {
      const Mat op = parse_operator(need(o.op, "--op"), f.dim());
      return construction_json(construct_woven_approx_dual(f, op, require_seed(o, "approx-dual")));
    }
    if (t == "rank-one") {
      const Vec v = to_vector(parse_list(need(o.vector, "--vector"), "--vector"));
      const Vec c = to_vector(parse_list(need(o.coeffs, "--coeffs"), "--coeffs"));
      return construction_json(rank_one_perturbation(f, v, c, o.budget));
    }
    if (t == "admissible") {
      const Mat e = read_matrix(need(o.e, "--basis-e"));
      const Mat h = read_matrix(need(o.h, "--basis-h"));
      const Vec ra = to_vector(parse_list(need(o.ratios_a, "--ratios-a"), "--ratios-a"));
      const Vec rb = to_vector(parse_list(need(o.ratios_b, "--ratios-b"), "--ratios-b"));
      const Mat op = build_admissible_operator(e, h, ra, rb);
      const auto w = admissible_weaving(f, op, sweep_mode(o));
      Json result;
      result["operator"] = io::matrix_to_json(op);
      result["frame"] = io::frame_to_json(apply_operator(op, f, "TF"));
      result["operator_residual"] = w.operator_residual;
      result["report"] = io::report_to_json(w.report);
      return result;
    }
  } catch (const CertificateError<double>& e) {
    throw HypothesisNotSatisfied{Json{{"certificate", io::certificate_to_json(e.certificate())}}, e.what()};
  }
  throw Error(ErrorCode::BadParams, "unknown construction \"" + t + "\"");
}

Json riesz_json(const RieszCriterion<double>& c) {
  Json result;
  result["woven"] = c.woven;
  result["min_distance"] = c.min_distance;
  result["witness"] = io::partition_to_json(c.witness);
  result["witness_k"] = c.witness_k();
  result["subsets_examined"] = c.subsets_examined;
  result["settled_by_bound"] = c.settled_by_bound;
  result["oracle_woven"] = c.oracle_woven;
  result["consistent"] = c.consistent;
  result["oracle"] = io::report_to_json(c.oracle);
  return result;
}

Json cmd_check(const Options& o) {
  const Frame f = load(o.frame, "--frame");
  const std::string& t = o.theorem;
  if (t == "operator-weaving") return certified(operator_weaving_check(f, parse_operator(need(o.op, "--op"), f.dim())));
  if (t == "canonical-dual") return certified(canonical_dual_weaving_check(f));
  if (t == "s-inverse") return certified(s_inverse_weaving_check(f, sweep_mode(o)));
  if (t == "scaled-copy") return certified(scaled_copy_weaving_check(f, o.factor));

  const Frame g = load(o.frame2, "--frame2");
  if (t == "dual-union") {
    const auto check = dual_union_spanning_check(f, g, sweep_mode(o));
    Json result;
    result["spans_all"] = check.spans_all;
    result["witness"] = check.witness ? io::partition_to_json(*check.witness) : Json(nullptr);
    result["partitions_examined"] = check.partitions_examined;
    if (!check.spans_all) throw HypothesisNotSatisfied{result, "dual-union: some union fails to span"};
    return result;
  }
  if (t == "invertible-pair") {
    const Mat t1 = parse_operator(need(o.op, "--op"), f.dim());
    const Mat t2 = parse_operator(need(o.op2, "--op2"), f.dim());
    return certified(invertible_pair_weaving_check(f, g, t1, t2, sweep_mode(o)));
  }
  if (t == "canonical-duals") return certified(canonical_duals_pair_check(f, g, sweep_mode(o)));
  if (t == "perturbation") {
    if (o.abc.empty()) return certified(perturbation_weaving_check(f, g));
    const auto v = parse_list(o.abc, "--abc");
    if (v.size() != 3) throw Error(ErrorCode::BadParams, "--abc takes three numbers a,b,c");
    return certified(perturbation_weaving_check<double>(f, g, PerturbationConstants<double>{v[0], v[1], v[2]},
                                                require_seed(o, "sampled premise checks")));
  }
  if (t == "riesz-criterion") {
    SweepMode mode = sweep_mode(o);
    return riesz_json(o.tolerance ? riesz_weaving_criterion(f, g, mode, *o.tolerance) : riesz_weaving_criterion(f, g, mode));
  }
  throw Error(ErrorCode::BadParams, "unknown theorem \"" + t + "\"");
}

// Premise failures that make a check inapplicable rather than broken.
bool is_hypothesis_code(ErrorCode code) {
  return code == ErrorCode::NotRedundant || code == ErrorCode::NotWovenRieszBases || code == ErrorCode::NotRieszBasis;
}

Json config_echo(const CLI::App& sub) {
  Json config = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "out" || opt->count() == 0) continue;
    const auto& values = opt->results();
    if (values.empty()) config[name] = true;
    else config[name] = values.size() == 1 ? Json(values.front()) : Json(values);
  }
  return config;
}

void emit(const Options& o, const std::string& command, const Json& config, const Json& result, std::ostream& out) {
  if (command == "gen") {
    // Frame readers ignore unknown keys, so provenance travels inside the frame file.
    Json frame = result;
    frame["provenance"] = Json{{"tool", "woven"}, {"version", std::string(kVersion)}, {"config", config}};
    if (o.out.empty()) out << frame.dump(2) << '\n';
    else io::write_json_file(o.out, frame);
    return;
  }
  Json report;
  report["tool"] = "woven";
  report["version"] = std::string(kVersion);
  report["command"] = command;
  report["config"] = config;
  report["timestamp"] = utc_timestamp();
  report["result"] = result;
  if (o.out.empty()) out << report.dump(2) << '\n';
  else io::write_json_file(o.out, report);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Weaving of discretized continuous frames", "woven"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  auto seed_opt = [&](CLI::App* s) {
    s->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { o.seed = v; }, "RNG seed");
  };
  auto mode_opts = [&](CLI::App* s) {
    s->add_option("--mode", o.mode, "exhaustive or sampled")->check(CLI::IsMember({"exhaustive", "sampled"}));
    s->add_option("--samples", o.samples, "random partitions in sampled mode");
    seed_opt(s);
  };

  auto* gen = app.add_subcommand("gen", "Generate a frame file");
  gen->add_option("--kind", o.kind, "onb | random_gaussian | random_riesz | tight_mercedes | scaled_copy | translation")
      ->required();
  gen->add_option("--dim", o.dim);
  gen->add_option("--count", o.count);
  gen->add_option("--grid", o.grid);
  gen->add_option("--width", o.width);
  gen->add_option("--factor", o.factor);
  gen->add_option("--input", o.input, "source frame for scaled_copy")->check(CLI::ExistingFile);
  seed_opt(gen);
  gen->add_option("--out", o.out);

  auto* analyze = app.add_subcommand("analyze", "Frame and Riesz bounds with duality residuals");
  analyze->add_option("--frame", o.frame)->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", o.out);

  auto* weave = app.add_subcommand("weave", "Sweep partitions of two frames");
  weave->add_option("--a", o.a)->required()->check(CLI::ExistingFile);
  weave->add_option("--b", o.b)->required()->check(CLI::ExistingFile);
  mode_opts(weave);
  weave->add_flag("--series", o.series, "record bounds per partition");
  weave->add_option_function<double>("--tolerance", [&](const double& v) { o.tolerance = v; });
  weave->add_option("--out", o.out);

  auto* construct = app.add_subcommand("construct", "Build a woven family with its certificate");
  construct->add_option("--theorem", o.theorem, "woven-dual | approx-dual | rank-one | admissible")->required();
  construct->add_option("--frame", o.frame)->required()->check(CLI::ExistingFile);
  construct->add_option("--op", o.op, "scale:x | rotate:theta | matrix-file:path");
  construct->add_option("--vector", o.vector, "comma-separated perturbation vector");
  construct->add_option("--coeffs", o.coeffs, "comma-separated coefficients, one per atom");
  construct->add_option("--budget", o.budget, "fraction b in (0,1)");
  construct->add_option("--basis-e", o.e, "matrix file, orthonormal basis e")->check(CLI::ExistingFile);
  construct->add_option("--basis-h", o.h, "matrix file, orthonormal basis h")->check(CLI::ExistingFile);
  construct->add_option("--ratios-a", o.ratios_a);
  construct->add_option("--ratios-b", o.ratios_b);
  mode_opts(construct);
  construct->add_option("--out", o.out);

  auto* check = app.add_subcommand("check", "Evaluate a weaving certificate");
  check->add_option("--theorem", o.theorem,
                    "operator-weaving | dual-union | canonical-dual | s-inverse | invertible-pair | canonical-duals | "
                    "perturbation | riesz-criterion | scaled-copy")
      ->required();
  check->add_option("--frame", o.frame)->required()->check(CLI::ExistingFile);
  check->add_option("--frame2", o.frame2)->check(CLI::ExistingFile);
  check->add_option("--op", o.op);
  check->add_option("--op2", o.op2);
  check->add_option("--abc", o.abc, "perturbation constants a,b,c");
  check->add_option("--factor", o.factor);
  check->add_option_function<double>("--tolerance", [&](const double& v) { o.tolerance = v; });
  mode_opts(check);
  check->add_option("--out", o.out);

  auto* roundtrip = app.add_subcommand("roundtrip", "Check that a frame file survives parse and serialize");
  roundtrip->add_option("--frame", o.frame)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << (args.size() == 1 && args[0] == "--version" ? std::string(kVersion) + "\n" : app.help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const Json config = config_echo(*sub);
  try {
    if (command == "roundtrip") {
      const bool same = io::round_trip(o.frame);
      out << (same ? "identical" : "different") << '\n';
      return same ? kExitOk : kExitError;
    }
    Json result;
    try {
      if (command == "gen") result = cmd_gen(o);
      else if (command == "analyze") result = cmd_analyze(o);
      else if (command == "weave") result = cmd_weave(o);
      else if (command == "construct") result = cmd_construct(o);
      else result = cmd_check(o);
    } catch (const Error& e) {
      if ((command == "check" || command == "construct") && is_hypothesis_code(e.code())) {
        throw HypothesisNotSatisfied{Json{{"error", e.what()}}, e.what()};
      }
      throw;
    }
    emit(o, command, config, result, out);
    return kExitOk;
  } catch (const HypothesisNotSatisfied& h) {
    try {
      emit(o, command, config, h.result, out);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitError;
    }
    err << "hypothesis not satisfied: " << h.message << '\n';
    return kExitHypothesisNotSatisfied;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace woven::cli
