#include "hulllab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hulllab {

Json real_to_json(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double real_from_json(const Json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a real number, got " + value.dump());
}

namespace {

Json vec_to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(real_to_json(v[i]));
  return out;
}

Vec vec_from_json(const Json& json, const char* what) {
  if (!json.is_array()) throw std::invalid_argument(std::string(what) + ": expected an array");
  Vec v(static_cast<Eigen::Index>(json.size()));
  for (std::size_t i = 0; i < json.size(); ++i) v[static_cast<Eigen::Index>(i)] = real_from_json(json[i]);
  return v;
}

// Rows of the JSON array become columns of the matrix when `columns` is true.
Json mat_to_json(const Mat& m, bool columns) {
  Json out = Json::array();
  if (columns) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(vec_to_json(m.col(j)));
  } else {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec_to_json(m.row(i).transpose()));
  }
  return out;
}

Mat mat_from_json(const Json& json, bool columns, const char* what) {
  if (!json.is_array() || json.empty()) throw std::invalid_argument(std::string(what) + ": expected a nonempty array");
  const auto outer = static_cast<Eigen::Index>(json.size());
  const auto inner = static_cast<Eigen::Index>(json[0].size());
  Mat m = columns ? Mat(inner, outer) : Mat(outer, inner);
  for (Eigen::Index k = 0; k < outer; ++k) {
    const Vec v = vec_from_json(json[static_cast<std::size_t>(k)], what);
    if (v.size() != inner) throw std::invalid_argument(std::string(what) + ": ragged array");
    if (columns) {
      m.col(k) = v;
    } else {
      m.row(k) = v.transpose();
    }
  }
  return m;
}

const Json& field(const Json& json, const char* key) {
  if (!json.is_object() || !json.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return json.at(key);
}

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// bodies

Json body_to_json(const BodySpec& body) {
  Json out;
  out["kind"] = kind_name(body);
  if (const auto* b = std::get_if<Ball>(&body)) {
    out["center"] = vec_to_json(b->center);
    out["radius"] = b->radius;
  } else if (const auto* e = std::get_if<Ellipsoid>(&body)) {
    out["center"] = vec_to_json(e->center);
    out["semi_axes"] = vec_to_json(e->semi_axes);
    out["rotation"] = mat_to_json(e->rotation, false);
  } else if (const auto* p = std::get_if<PolytopeV>(&body)) {
    out["vertices"] = mat_to_json(p->vertices, true);
  } else if (const auto* g = std::get_if<BumpBall>(&body)) {
    out["radius"] = g->radius;
    out["bump_scale"] = g->bump_scale;
    out["amplitude"] = g->amplitude;
    out["direction"] = vec_to_json(g->direction);
  }
  return out;
}

BodySpec body_from_json(const Json& json) {
  const std::string kind = field(json, "kind").get<std::string>();
  if (kind == "ball") {
    return make_ball(vec_from_json(field(json, "center"), "center"), real_from_json(field(json, "radius")));
  }
  if (kind == "ellipsoid") {
    Vec center = vec_from_json(field(json, "center"), "center");
    Vec axes = vec_from_json(field(json, "semi_axes"), "semi_axes");
    if (json.contains("rotation")) {
      return make_ellipsoid(std::move(center), std::move(axes), mat_from_json(json.at("rotation"), false, "rotation"));
    }
    return make_ellipsoid(std::move(center), std::move(axes));
  }
  if (kind == "polytope_v") return make_polytope(mat_from_json(field(json, "vertices"), true, "vertices"));
  if (kind == "bump_ball") {
    return make_bump_ball(real_from_json(field(json, "radius")), real_from_json(field(json, "bump_scale")),
                          real_from_json(field(json, "amplitude")),
                          vec_from_json(field(json, "direction"), "direction"));
  }
  throw std::invalid_argument("unknown body kind '" + kind + "' (expected ball|ellipsoid|polytope_v|bump_ball)");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("write to stdout failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

BodySpec load_body(const std::string& path) { return body_from_json(read_json_file(path)); }

void save_body(const BodySpec& body, const std::string& path) { write_text(body_to_json(body).dump(2) + "\n", path); }

// ---------------------------------------------------------------------------
// nets

Json net_to_json(const SphereNet& net) {
  Json out;
  out["dim"] = net.dim();
  out["delta"] = net.delta();
  out["seed"] = net.seed();
  out["covering_radius_estimate"] = real_to_json(net.covering_radius_estimate());
  out["size"] = net.size();
  out["directions"] = mat_to_json(net.directions(), true);
  return out;
}

SphereNet net_from_json(const Json& json) {
  const int d = field(json, "dim").get<int>();
  const double delta = real_from_json(field(json, "delta"));
  const auto seed = field(json, "seed").get<std::uint64_t>();
  const double cover = json.contains("covering_radius_estimate") ? real_from_json(json.at("covering_radius_estimate"))
                                                                 : std::numeric_limits<double>::quiet_NaN();
  Mat dirs = mat_from_json(field(json, "directions"), true, "directions");
  if (dirs.rows() != d) throw std::invalid_argument("net: direction length differs from dim");
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) require_unit(dirs.col(j), "net direction");
  return SphereNet(d, delta, seed, std::move(dirs), cover);
}

SphereNet load_net(const std::string& path) { return net_from_json(read_json_file(path)); }

void save_net(const SphereNet& net, const std::string& path) { write_text(net_to_json(net).dump() + "\n", path); }

// ---------------------------------------------------------------------------
// parameters and results

Json params_to_json(const ClassParams& params) {
  Json out;
  out["alpha"] = params.alpha;
  out["L"] = params.big_l;
  out["eps0"] = params.eps0;
  return out;
}

ClassParams params_from_json(const Json& json) {
  ClassParams p{real_from_json(field(json, "alpha")), real_from_json(field(json, "L")),
                real_from_json(field(json, "eps0"))};
  validate(p);
  return p;
}

Json deviation_bound_to_json(const DeviationBound& bound, double x) {
  Json out;
  out["params"] = params_to_json(bound.params);
  out["d"] = bound.d;
  out["n"] = bound.n;
  out["c_alpha"] = bound.c_alpha;
  out["tau1"] = bound.tau1;
  out["a_n"] = bound.a_n;
  out["b_n"] = bound.b_n;
  out["x"] = x;
  out["threshold"] = bound.threshold(x);
  out["tail"] = bound.tail(x);
  return out;
}

Json distance_to_json(const DistanceResult& result) {
  Json out;
  out["metric"] = result.metric;
  out["net_value"] = real_to_json(result.net_value);
  out["refined_value"] = real_to_json(result.refined_value);
  out["certified_upper"] = real_to_json(result.certified_upper);
  out["net_delta"] = real_to_json(result.net_delta);
  return out;
}

DistanceResult distance_from_json(const Json& json) {
  DistanceResult r;
  r.metric = field(json, "metric").get<std::string>();
  r.net_value = real_from_json(field(json, "net_value"));
  r.refined_value = real_from_json(field(json, "refined_value"));
  r.certified_upper = real_from_json(field(json, "certified_upper"));
  r.net_delta = real_from_json(field(json, "net_delta"));
  return r;
}

Json membership_to_json(const MembershipReport& report) {
  Json out;
  out["verdict"] = report.verdict;
  out["worst_ratio"] = real_to_json(report.worst_ratio);
  out["slack"] = real_to_json(report.slack);
  out["worst_eps"] = real_to_json(report.worst_eps);
  out["worst_direction"] = vec_to_json(report.worst_direction);
  out["u_probes"] = report.u_probes;
  out["eps_grid"] = report.eps_grid;
  out["eps_min"] = real_to_json(report.eps_min);
  out["eps_max"] = real_to_json(report.eps_max);
  out["n_mc"] = report.n_mc;
  out["analytic"] = report.analytic;
  return out;
}

Json lower_bound_family_to_json(const LowerBoundFamily& family, const std::vector<PairCheck>& pairs,
                                double mc_defect, double mc_stderr) {
  Json out;
  out["dim"] = family.dim;
  out["radius"] = family.radius;
  out["delta"] = family.delta;
  out["amplitude"] = family.amplitude;
  out["packing_size"] = family.directions.cols();
  out["defect_constant"] = family.defect_constant;
  out["volume_defect"] = family.volume_defect;
  out["volume_defect_mc"] = real_to_json(mc_defect);
  out["volume_defect_mc_stderr"] = real_to_json(mc_stderr);
  Json checks = Json::array();
  for (const auto& pc : pairs) {
    Json c;
    c["first"] = pc.first;
    c["second"] = pc.second;
    c["separation"] = pc.separation;
    c["expected"] = pc.expected;
    c["distance"] = distance_to_json(pc.distance);
    c["within_certification"] = pc.within_certification;
    checks.push_back(std::move(c));
  }
  out["pairs"] = std::move(checks);
  Json bodies = Json::array();
  for (const auto& b : family.bodies) bodies.push_back(body_to_json(b));
  out["bodies"] = std::move(bodies);
  return out;
}

// ---------------------------------------------------------------------------
// reports

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown format '" + text + "' (expected csv|json)");
}

Json rate_report_to_json(const RateReport& report) {
  Json out;
  out["body_kind"] = report.body_kind;
  out["mode"] = report.mode;
  out["family"] = report.family;
  out["metric"] = report.metric;
  out["dim"] = report.dim;
  out["q"] = report.q;
  out["master_seed"] = report.master_seed;
  out["regressor"] = report.regressor;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["n"] = r.n;
    row["mean_metric_q"] = real_to_json(r.mean_metric_q);
    row["stderr"] = real_to_json(r.stderr_metric_q);
    row["reps"] = r.reps;
    row["net_delta"] = real_to_json(r.net_delta);
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  out["slope"] = real_to_json(report.slope);
  out["intercept"] = real_to_json(report.intercept);
  out["ci_half_width"] = real_to_json(report.ci_half_width);
  out["theoretical_slope"] = real_to_json(report.theoretical_slope);
  return out;
}

RateReport rate_report_from_json(const Json& json) {
  RateReport r;
  r.body_kind = field(json, "body_kind").get<std::string>();
  r.mode = field(json, "mode").get<std::string>();
  r.family = field(json, "family").get<std::string>();
  r.metric = field(json, "metric").get<std::string>();
  r.dim = field(json, "dim").get<int>();
  r.q = real_from_json(field(json, "q"));
  r.master_seed = field(json, "master_seed").get<std::uint64_t>();
  r.regressor = field(json, "regressor").get<std::string>();
  for (const auto& row : field(json, "rows")) {
    r.rows.push_back(RateRow{field(row, "n").get<std::int64_t>(), real_from_json(field(row, "mean_metric_q")),
                             real_from_json(field(row, "stderr")), field(row, "reps").get<int>(),
                             real_from_json(field(row, "net_delta"))});
  }
  r.slope = real_from_json(field(json, "slope"));
  r.intercept = real_from_json(field(json, "intercept"));
  r.ci_half_width = real_from_json(field(json, "ci_half_width"));
  r.theoretical_slope = real_from_json(field(json, "theoretical_slope"));
  return r;
}

Json deviation_report_to_json(const DeviationReport& report) {
  Json out;
  out["n"] = report.n;
  out["reps"] = report.reps;
  out["dim"] = report.dim;
  out["params"] = params_to_json(report.params);
  out["a_n"] = report.a_n;
  out["b_n"] = report.b_n;
  out["tau1"] = report.tau1;
  out["master_seed"] = report.master_seed;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["x"] = r.x;
    row["threshold"] = r.threshold;
    row["empirical_survival"] = r.empirical_survival;
    row["theoretical_tail"] = r.theoretical_tail;
    row["violation"] = r.violation;
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  out["violations"] = report.violations;
  return out;
}

DeviationReport deviation_report_from_json(const Json& json) {
  DeviationReport r;
  r.n = field(json, "n").get<std::int64_t>();
  r.reps = field(json, "reps").get<int>();
  r.dim = field(json, "dim").get<int>();
  const Json& p = field(json, "params");
  r.params = ClassParams{real_from_json(field(p, "alpha")), real_from_json(field(p, "L")),
                         real_from_json(field(p, "eps0"))};
  r.a_n = real_from_json(field(json, "a_n"));
  r.b_n = real_from_json(field(json, "b_n"));
  r.tau1 = real_from_json(field(json, "tau1"));
  r.master_seed = field(json, "master_seed").get<std::uint64_t>();
  for (const auto& row : field(json, "rows")) {
    r.rows.push_back(DeviationRow{real_from_json(field(row, "x")), real_from_json(field(row, "threshold")),
                                  real_from_json(field(row, "empirical_survival")),
                                  real_from_json(field(row, "theoretical_tail")),
                                  field(row, "violation").get<bool>()});
  }
  r.violations = field(json, "violations").get<int>();
  return r;
}

namespace {

void check_rows(const RateReport& report) {
  if (report.rows.empty()) throw std::invalid_argument("rate report has no rows");
  for (const auto& r : report.rows) {
    if (!std::isfinite(r.mean_metric_q) || !std::isfinite(r.stderr_metric_q)) {
      throw std::invalid_argument("rate report has a non-finite row");
    }
  }
}

void check_rows(const DeviationReport& report) {
  if (report.rows.empty()) throw std::invalid_argument("deviation report has no rows (empty x grid)");
  for (const auto& r : report.rows) {
    if (!std::isfinite(r.x) || !std::isfinite(r.threshold) || !std::isfinite(r.empirical_survival) ||
        !std::isfinite(r.theoretical_tail)) {
      throw std::invalid_argument("deviation report has a non-finite row");
    }
  }
}

}  // namespace

void write_csv(std::ostream& out, const RateReport& report) {
  out << "n,mean_metric_q,stderr,reps\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << format_real(r.mean_metric_q) << ',' << format_real(r.stderr_metric_q) << ',' << r.reps
        << '\n';
  }
}

void write_csv(std::ostream& out, const DeviationReport& report) {
  out << "x,threshold,empirical_survival,theoretical_tail\n";
  for (const auto& r : report.rows) {
    out << format_real(r.x) << ',' << format_real(r.threshold) << ',' << format_real(r.empirical_survival) << ','
        << format_real(r.theoretical_tail) << '\n';
  }
}

std::string format_report(const RateReport& report, ReportFormat format) {
  check_rows(report);
  if (format == ReportFormat::json) return rate_report_to_json(report).dump(2) + "\n";
  std::ostringstream out;
  write_csv(out, report);
  return out.str();
}

std::string format_report(const DeviationReport& report, ReportFormat format) {
  check_rows(report);
  if (format == ReportFormat::json) return deviation_report_to_json(report).dump(2) + "\n";
  std::ostringstream out;
  write_csv(out, report);
  return out.str();
}

void emit_report(const RateReport& report, const std::string& path, ReportFormat format) {
  write_text(format_report(report, format), path);
}

void emit_report(const DeviationReport& report, const std::string& path, ReportFormat format) {
  write_text(format_report(report, format), path);
}

}  // namespace hulllab
