// hulllab command line: sampling, nets, distances, bounds and Monte Carlo
// experiments. Run `hulllab --help` or `hulllab <subcommand> --help`.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hulllab/bounds.hpp"
#include "hulllab/estimators.hpp"
#include "hulllab/experiments.hpp"
#include "hulllab/geometry.hpp"
#include "hulllab/io.hpp"
#include "hulllab/sampler.hpp"
#include "hulllab/sphere_net.hpp"

namespace {

using namespace hulllab;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "-";
  std::string format = "json";
};

struct ExperimentArgs {
  std::string body;
  std::string mode = "interior";
  std::string family = "smooth_interior";
  std::vector<std::int64_t> n_grid;
  int reps = 2;
  double q = 1.0;
  std::string metric = "hausdorff";
  std::optional<double> net_delta;
  std::int64_t quad_n = kDefaultQuadN;
};

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--body", a.body, "Body JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mode", a.mode, "interior|boundary")->capture_default_str();
  cmd->add_option("--family", a.family, "smooth_interior|polytope_interior|smooth_boundary")->capture_default_str();
  cmd->add_option("--n-grid", a.n_grid, "Sample sizes (strictly increasing)")->required()->delimiter(',');
  cmd->add_option("--reps", a.reps, "Replications per grid point")->capture_default_str();
  cmd->add_option("--q", a.q, "Moment order q >= 1")->capture_default_str();
  cmd->add_option("--metric", a.metric, "hausdorff|dl|lp:P|T:P|S:P")->capture_default_str();
  cmd->add_option("--net-delta", a.net_delta, "Net spacing (default max(floor(d), min(1e-2, 0.1 a_n)))");
  cmd->add_option("--quad-n", a.quad_n, "Quadrature size for finite-p metrics")->capture_default_str();
}

ExperimentConfig make_config(const ExperimentArgs& a, const Globals& g) {
  ExperimentConfig c;
  c.body = load_body(a.body);
  c.mode = parse_sample_mode(a.mode);
  c.family = parse_rate_family(a.family);
  c.n_grid = a.n_grid;
  c.reps = a.reps;
  c.q = a.q;
  c.metric = parse_metric(a.metric);
  c.net_delta = a.net_delta;
  c.quad_n = a.quad_n;
  c.master_seed = g.seed;
  c.threads = g.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex-hull estimation of convex bodies: samplers, support-function distances and rate experiments"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value (TOML/INI) file supplying any option; sections name subcommands");

  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Output file ('-' = stdout)")->capture_default_str();
  app.add_option("--format", g.format, "Report format for rates/deviation")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Draw a uniform sample from a body (CSV, one point per row)");
  std::string sample_body;
  std::string sample_mode = "interior";
  std::int64_t sample_n = 0;
  sample_cmd->add_option("--body", sample_body, "Body JSON file")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--mode", sample_mode, "interior|boundary")->capture_default_str();
  sample_cmd->add_option("--n", sample_n, "Number of points")->required()->check(CLI::PositiveNumber);

  // net build
  auto* net_cmd = app.add_subcommand("net", "Sphere nets");
  net_cmd->require_subcommand(1);
  auto* net_build = net_cmd->add_subcommand("build", "Build a maximal delta-packing of the unit sphere");
  int net_dim = 0;
  double net_delta = 0.0;
  net_build->add_option("--dim", net_dim, "Ambient dimension")->required()->check(CLI::Range(1, 64));
  net_build->add_option("--delta", net_delta, "Packing radius in (0, 1]")->required();

  // distance
  auto* dist_cmd = app.add_subcommand("distance", "Distance between a body and the convex hull of a point set");
  std::string dist_body;
  std::string dist_points;
  std::string dist_net;
  std::string dist_metric = "hausdorff";
  double dist_p = 1.0;
  std::int64_t dist_quad_n = kDefaultQuadN;
  dist_cmd->add_option("--body", dist_body, "Body JSON file")->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("--points", dist_points, "Points CSV file")->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("--net", dist_net, "Net JSON file (hausdorff, dl)")->check(CLI::ExistingFile);
  dist_cmd->add_option("--metric", dist_metric, "hausdorff|dl|lp")
      ->check(CLI::IsMember({"hausdorff", "dl", "lp"}))
      ->capture_default_str();
  dist_cmd->add_option("--p", dist_p, "Exponent for lp (>= 1)")->capture_default_str();
  dist_cmd->add_option("--quad-n", dist_quad_n, "Quadrature size for lp")->capture_default_str();

  // bound
  auto* bound_cmd = app.add_subcommand("bound", "Deviation-bound calculator");
  std::string bound_params;
  int bound_d = 0;
  std::int64_t bound_n = 0;
  double bound_x = 0.0;
  bound_cmd->add_option("--params", bound_params, R"(Class parameters '{"alpha":..,"L":..,"eps0":..}')")->required();
  bound_cmd->add_option("--d", bound_d, "Dimension")->required()->check(CLI::PositiveNumber);
  bound_cmd->add_option("--n", bound_n, "Sample size")->required();
  bound_cmd->add_option("--x", bound_x, "Deviation level x >= 0")->capture_default_str();

  // check-class
  auto* class_cmd = app.add_subcommand("check-class", "Check cap-mass class membership");
  std::string class_body;
  std::string class_family = "smooth";
  std::optional<double> class_r;
  std::string class_params;
  double class_l_scale = 1.0;
  MembershipOptions class_opts;
  class_cmd->add_option("--body", class_body, "Body JSON file")->required()->check(CLI::ExistingFile);
  class_cmd->add_option("--family", class_family, "smooth|boundary|polytope")
      ->check(CLI::IsMember({"smooth", "boundary", "polytope", "smooth_interior", "smooth_boundary",
                             "polytope_interior"}))
      ->capture_default_str();
  class_cmd->add_option("--r", class_r, "Rolling radius (default: the body's certified value)");
  class_cmd->add_option("--params", class_params, "Explicit class parameters JSON (overrides the family)");
  class_cmd->add_option("--l-scale", class_l_scale, "Multiply L before checking")->capture_default_str();
  class_cmd->add_option("--u-probes", class_opts.u_probes, "Direction probes")->capture_default_str();
  class_cmd->add_option("--eps-grid", class_opts.eps_grid, "Cap widths probed")->capture_default_str();
  class_cmd->add_option("--n-mc", class_opts.n_mc, "Monte Carlo points")->capture_default_str();

  // rates
  auto* rates_cmd = app.add_subcommand("rates", "Convergence-rate experiment");
  ExperimentArgs rates_args;
  add_experiment_options(rates_cmd, rates_args);

  // deviation
  auto* dev_cmd = app.add_subcommand("deviation", "Empirical survival against the deviation bound");
  ExperimentArgs dev_args;
  std::vector<double> dev_x;
  std::string dev_params;
  add_experiment_options(dev_cmd, dev_args);
  dev_cmd->add_option("--x-grid", dev_x, "Deviation levels (ascending)")->required()->delimiter(',');
  dev_cmd->add_option("--params", dev_params, "Class parameters JSON (default: the family's)");

  // lower-bound-family
  auto* lb_cmd = app.add_subcommand("lower-bound-family", "Bump-body family over a sphere packing");
  int lb_dim = 2;
  double lb_radius = 1.0;
  double lb_r = 0.5;
  double lb_delta = 0.1;
  std::optional<double> lb_amplitude;
  int lb_pairs = 4;
  double lb_net_delta = 1e-3;
  std::int64_t lb_mc = 1'000'000;
  bool lb_bodies = false;
  lb_cmd->add_option("--dim", lb_dim, "Dimension")->capture_default_str();
  lb_cmd->add_option("--radius", lb_radius, "Radius R of the base ball")->capture_default_str();
  lb_cmd->add_option("--r", lb_r, "Rolling radius the bodies must keep")->capture_default_str();
  lb_cmd->add_option("--delta", lb_delta, "Packing radius and bump width")->capture_default_str();
  lb_cmd->add_option("--amplitude", lb_amplitude, "Bump amplitude (default: half the admissible value)");
  lb_cmd->add_option("--pairs", lb_pairs, "Far-apart pairs to check")->capture_default_str();
  lb_cmd->add_option("--net-delta", lb_net_delta, "Net spacing for the pair distances")->capture_default_str();
  lb_cmd->add_option("--mc-points", lb_mc, "Monte Carlo points for the volume defect")->capture_default_str();
  lb_cmd->add_flag("--bodies", lb_bodies, "Include every body in the output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sample_cmd) {
      const SampleCloud cloud = sample(load_body(sample_body), parse_sample_mode(sample_mode), sample_n, g.seed);
      std::ostringstream out;
      write_points_csv(out, cloud.points);
      write_text(out.str(), g.out);
    } else if (*net_build) {
      save_net(build_net(net_dim, net_delta, g.seed), g.out);
    } else if (*dist_cmd) {
      const BodySpec body = load_body(dist_body);
      const Mat points = read_points_csv(dist_points);
      if (points.rows() != dim(body)) throw std::invalid_argument("points and body differ in dimension");
      const HullSupport hull(points);
      DistanceResult result;
      if (dist_metric == "lp") {
        const Quadrature quad = make_quadrature(static_cast<int>(points.rows()), dist_quad_n, g.seed);
        const double v = lp_error(body, hull, dist_p, quad);
        result = DistanceResult{to_string(Metric{MetricKind::lp, dist_p}), v, v, v, 0.0};
      } else {
        if (dist_net.empty()) throw std::invalid_argument("--net is required for " + dist_metric);
        const SphereNet net = load_net(dist_net);
        result = dist_metric == "hausdorff" ? hausdorff_to_body(body, hull, net)
                                            : d_l_estimate(body, analytic_center(body), hull, net);
      }
      write_text(distance_to_json(result).dump(2) + "\n", g.out);
    } else if (*bound_cmd) {
      const ClassParams params = params_from_json(Json::parse(bound_params));
      write_text(deviation_bound_to_json(deviation_bound(params, bound_d, bound_n), bound_x).dump(2) + "\n", g.out);
    } else if (*class_cmd) {
      const BodySpec body = load_body(class_body);
      const RateFamily family = parse_rate_family(class_family);
      const int d = static_cast<int>(dim(body));
      class_opts.seed = g.seed;
      SampleMode mode = family == RateFamily::smooth_boundary ? SampleMode::boundary : SampleMode::interior;
      ClassParams params;
      if (!class_params.empty()) {
        params = params_from_json(Json::parse(class_params));
      } else if (family == RateFamily::polytope_interior) {
        params = class_params_polytope(body, class_opts);
      } else {
        double r = 0.0;
        if (class_r) {
          r = *class_r;
        } else if (const auto rr = rolling_radius(body)) {
          r = std::min(1.0, *rr);
        } else {
          throw std::invalid_argument("--r is required for bodies without a certified rolling radius");
        }
        params = family == RateFamily::smooth_boundary ? class_params_boundary(d, r) : class_params_smooth(d, r);
      }
      params.big_l *= class_l_scale;
      Json out;
      out["params"] = params_to_json(params);
      out["mode"] = to_string(mode);
      out["report"] = membership_to_json(check_class_membership(body, mode, params, class_opts));
      write_text(out.dump(2) + "\n", g.out);
    } else if (*rates_cmd) {
      const RateReport report = run_rate_experiment(make_config(rates_args, g));
      emit_report(report, g.out, parse_report_format(g.format));
    } else if (*dev_cmd) {
      const ExperimentConfig config = make_config(dev_args, g);
      const DeviationReport report = dev_params.empty()
                                         ? run_deviation_experiment(config, dev_x)
                                         : run_deviation_experiment(config, dev_x, params_from_json(Json::parse(dev_params)));
      emit_report(report, g.out, parse_report_format(g.format));
    } else if (*lb_cmd) {
      const double amplitude =
          lb_amplitude ? *lb_amplitude : 0.5 * admissible_bump_amplitude(lb_dim, lb_radius, lb_r, lb_delta);
      LowerBoundFamily family = build_lower_bound_family(lb_dim, lb_radius, lb_delta, amplitude, g.seed);
      const auto pairs = check_family_pairs(family, lb_pairs, lb_net_delta, g.seed);
      const auto& first = std::get<BumpBall>(family.bodies.at(1));
      const MonteCarloEstimate mc = bump_volume_defect_mc(first, lb_mc, g.seed);
      if (!lb_bodies) family.bodies.clear();
      write_text(lower_bound_family_to_json(family, pairs, mc.value, mc.stderr_value).dump(2) + "\n", g.out);
    }
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
