#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hulllab/bounds.hpp"
#include "hulllab/estimators.hpp"
#include "hulllab/experiments.hpp"
#include "hulllab/geometry.hpp"
#include "hulllab/sphere_net.hpp"

namespace hulllab {

using Json = nlohmann::ordered_json;

// Non-finite reals are written as the strings "inf", "-inf" and "nan".
Json real_to_json(double value);
double real_from_json(const Json& value);

// ---------------------------------------------------------------------------
// bodies
//
//   {"kind": "ball",      "center": [..], "radius": r}
//   {"kind": "ellipsoid", "center": [..], "semi_axes": [..], "rotation": [[row], ..]}   rotation optional
//   {"kind": "polytope_v","vertices": [[x..], ..]}
//   {"kind": "bump_ball", "radius": R, "bump_scale": δ, "amplitude": α, "direction": [..]}

Json body_to_json(const BodySpec& body);
BodySpec body_from_json(const Json& json);
BodySpec load_body(const std::string& path);
void save_body(const BodySpec& body, const std::string& path);

// ---------------------------------------------------------------------------
// nets: {"dim", "delta", "seed", "covering_radius_estimate", "directions": [[..], ..]}

Json net_to_json(const SphereNet& net);
SphereNet net_from_json(const Json& json);
SphereNet load_net(const std::string& path);
void save_net(const SphereNet& net, const std::string& path);

// ---------------------------------------------------------------------------
// parameters and single results

Json params_to_json(const ClassParams& params);  // {"alpha", "L", "eps0"}
ClassParams params_from_json(const Json& json);

Json deviation_bound_to_json(const DeviationBound& bound, double x);
Json distance_to_json(const DistanceResult& result);
DistanceResult distance_from_json(const Json& json);
Json membership_to_json(const MembershipReport& report);
Json lower_bound_family_to_json(const LowerBoundFamily& family, const std::vector<PairCheck>& pairs,
                                double mc_defect, double mc_stderr);

// ---------------------------------------------------------------------------
// experiment reports

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(const std::string& text);

Json rate_report_to_json(const RateReport& report);
RateReport rate_report_from_json(const Json& json);
Json deviation_report_to_json(const DeviationReport& report);
DeviationReport deviation_report_from_json(const Json& json);

/// CSV columns: n,mean_metric_q,stderr,reps.
void write_csv(std::ostream& out, const RateReport& report);
/// CSV columns: x,threshold,empirical_survival,theoretical_tail.
void write_csv(std::ostream& out, const DeviationReport& report);

/// Serialized report text. Throws std::invalid_argument for a report without
/// rows or with non-finite row values.
std::string format_report(const RateReport& report, ReportFormat format);
std::string format_report(const DeviationReport& report, ReportFormat format);

/// Writes format_report(...) to `path` ("-" = stdout). Throws
/// std::runtime_error on I/O failure.
void emit_report(const RateReport& report, const std::string& path, ReportFormat format);
void emit_report(const DeviationReport& report, const std::string& path, ReportFormat format);

/// Writes text to `path`, or to stdout when path is empty or "-".
void write_text(const std::string& text, const std::string& path);
Json read_json_file(const std::string& path);

}  // namespace hulllab
