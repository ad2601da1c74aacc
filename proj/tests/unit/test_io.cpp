#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hulllab/io.hpp"

using namespace hulllab;

namespace {

RateReport sample_rate_report() {
  RateReport r;
  r.body_kind = "ball";
  r.mode = "interior";
  r.family = "smooth_interior";
  r.metric = "hausdorff";
  r.dim = 2;
  r.q = 1.0;
  r.master_seed = 42;
  r.regressor = "log(ln n/n)";
  r.rows = {{1000, 0.0123456789012345, 1.5e-4, 200, 0.01},
            {3000, 0.00612, 8.1e-5, 200, 0.01},
            {10000, 1.0 / 3.0 * 0.01, 3.3e-5, 200, 0.005}};
  r.slope = 0.6712;
  r.intercept = -0.1;
  r.ci_half_width = 0.02;
  r.theoretical_slope = 2.0 / 3.0;
  return r;
}

DeviationReport sample_deviation_report() {
  DeviationReport r;
  r.n = 10000;
  r.reps = 2000;
  r.dim = 2;
  r.params = {1.5, 0.4244131815783876, 1.0};
  r.a_n = 0.0131;
  r.b_n = 0.00215;
  r.tau1 = 3.14159;
  r.master_seed = 7;
  r.rows = {{0.0, 0.0262, 1.0, 1.0, false}, {2.5, 0.0369, 0.0005, 0.3, false}};
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hulllab_io_" + name)).string();
}

}  // namespace

TEST(Reals, NonFiniteAsStrings) {
  EXPECT_EQ(real_to_json(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(real_to_json(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_TRUE(std::isnan(real_from_json(real_to_json(std::nan("")))));
  EXPECT_EQ(real_from_json(real_to_json(0.1)), 0.1);
  EXPECT_EQ(real_from_json(Json("inf")), std::numeric_limits<double>::infinity());
}

TEST(Reports, RateJsonRoundTrip) {
  const RateReport r = sample_rate_report();
  const std::string text = format_report(r, ReportFormat::json);
  EXPECT_EQ(rate_report_from_json(Json::parse(text)), r);
  EXPECT_EQ(format_report(r, ReportFormat::json), text);
}

TEST(Reports, DeviationJsonRoundTrip) {
  const DeviationReport r = sample_deviation_report();
  const std::string text = format_report(r, ReportFormat::json);
  EXPECT_EQ(deviation_report_from_json(Json::parse(text)), r);
}

TEST(Reports, RateCsvShape) {
  const std::string csv = format_report(sample_rate_report(), ReportFormat::csv);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "n,mean_metric_q,stderr,reps");
  EXPECT_EQ(lines[1].substr(0, 5), "1000,");
  EXPECT_EQ(lines[1].substr(lines[1].rfind(',')), ",200");
}

TEST(Reports, DeviationCsvHeader) {
  const std::string csv = format_report(sample_deviation_report(), ReportFormat::csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,threshold,empirical_survival,theoretical_tail");
}

TEST(Reports, RejectsEmptyOrNonFinite) {
  DeviationReport empty = sample_deviation_report();
  empty.rows.clear();
  EXPECT_THROW(format_report(empty, ReportFormat::csv), std::invalid_argument);
  EXPECT_THROW(emit_report(empty, temp_path("never.json"), ReportFormat::json), std::invalid_argument);
  EXPECT_FALSE(std::filesystem::exists(temp_path("never.json")));
  RateReport bad = sample_rate_report();
  bad.rows[1].mean_metric_q = std::nan("");
  EXPECT_THROW(format_report(bad, ReportFormat::json), std::invalid_argument);
}

TEST(Reports, EmitWritesFormattedBytes) {
  const RateReport r = sample_rate_report();
  const std::string path = temp_path("rate.csv");
  emit_report(r, path, ReportFormat::csv);
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  EXPECT_EQ(s.str(), format_report(r, ReportFormat::csv));
  std::filesystem::remove(path);
  EXPECT_THROW(emit_report(r, "/nonexistent_dir/x/y.json", ReportFormat::json), std::runtime_error);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
  EXPECT_THROW(parse_report_format("xml"), std::invalid_argument);
}

TEST(Bodies, JsonRoundTrip) {
  Mat rot(2, 2);
  rot << 0, -1, 1, 0;
  Mat tri(2, 3);
  tri << 0, 1, 0, 0, 0, 1;
  const std::vector<BodySpec> bodies{make_ball((Vec(3) << 0.1, 0.2, 0.3).finished(), 0.7),
                                     make_ellipsoid((Vec(2) << 0.0, 0.1).finished(),
                                                    (Vec(2) << 0.9, 0.4).finished(), rot),
                                     make_polytope(tri),
                                     make_bump_ball(1.0, 0.1, 0.5, (Vec(2) << 0.0, 1.0).finished())};
  for (const BodySpec& b : bodies) {
    const Json j = body_to_json(b);
    EXPECT_EQ(body_to_json(body_from_json(Json::parse(j.dump()))), j);
  }
  EXPECT_EQ(body_to_json(bodies[0])["kind"], "ball");
  EXPECT_EQ(body_to_json(bodies[2])["kind"], "polytope_v");
  EXPECT_THROW(body_from_json(Json::parse(R"({"kind":"cube"})")), std::invalid_argument);
  EXPECT_THROW(body_from_json(Json::parse(R"({"kind":"ball","center":[0,0],"radius":-1})")), std::invalid_argument);
}

TEST(Bodies, FileRoundTrip) {
  const BodySpec b = make_ball((Vec(2) << 0.25, -0.5).finished(), 0.125);
  const std::string path = temp_path("body.json");
  save_body(b, path);
  EXPECT_EQ(body_to_json(load_body(path)), body_to_json(b));
  std::filesystem::remove(path);
}

TEST(Nets, JsonRoundTrip) {
  const SphereNet net = build_net(3, 0.3, 9);
  const Json j = net_to_json(net);
  EXPECT_EQ(j["size"], net.size());
  const SphereNet back = net_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.dim(), 3);
  EXPECT_EQ(back.delta(), 0.3);
  EXPECT_EQ(back.seed(), 9u);
  EXPECT_EQ(back.covering_radius_estimate(), net.covering_radius_estimate());
  EXPECT_EQ(back.directions(), net.directions());
}

TEST(Params, JsonKeys) {
  const ClassParams p{2.0, 0.375, 0.5};
  const Json j = params_to_json(p);
  EXPECT_EQ(j["alpha"], 2.0);
  EXPECT_EQ(j["L"], 0.375);
  EXPECT_EQ(j["eps0"], 0.5);
  const ClassParams back = params_from_json(j);
  EXPECT_EQ(back.alpha, p.alpha);
  EXPECT_EQ(back.big_l, p.big_l);
  EXPECT_EQ(back.eps0, p.eps0);
}
