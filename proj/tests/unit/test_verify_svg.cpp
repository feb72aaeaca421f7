#include <gtest/gtest.h>

#include <rnnode/errors.hpp>
#include <rnnode/odeflow.hpp>
#include <rnnode/replicator.hpp>
#include <rnnode/svg.hpp>
#include <rnnode/verify.hpp>

#include <array>
#include <cmath>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_specs.hpp"

using namespace rnnode;
using rnnode::testing::vec;

namespace {

std::array<double, 3> barycentric(const TernaryFrame& f, double x, double y) {
  const auto a = f.vertex(0);
  const auto b = f.vertex(1);
  const auto c = f.vertex(2);
  const double det = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1]);
  const double l0 = ((b[1] - c[1]) * (x - c[0]) + (c[0] - b[0]) * (y - c[1])) / det;
  const double l1 = ((c[1] - a[1]) * (x - c[0]) + (a[0] - c[0]) * (y - c[1])) / det;
  return {l0, l1, 1.0 - l0 - l1};
}

std::vector<std::array<double, 2>> polyline_points(const std::string& svg) {
  const std::regex poly("class=\"trajectory\"[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  std::vector<std::array<double, 2>> out;
  if (!std::regex_search(svg, m, poly)) return out;
  std::istringstream in(m[1].str());
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    out.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
  }
  return out;
}

}  // namespace

TEST(Verify, IdentityHiddenHasZeroDeviation) {
  const RnnOdeSpec spec = rnnode::testing::identity_hidden_spec(2, 3, 3, 1);
  const std::vector<Vector> inputs{vec({0.3, -0.2})};
  const EquivalenceReport r = verify_equivalence(spec, inputs, TimeGrid(5.0, 1e-2), Method::rk4);
  EXPECT_LE(r.sup_deviation, 1e-15);
}

TEST(Verify, RandomSpecWithinTolerance) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 31, {}, 2.0);
  const std::vector<Vector> inputs{vec({0.3, -0.2}), vec({-1.0, 0.5})};
  const EquivalenceReport r = verify_equivalence(spec, inputs, TimeGrid(5.0, 1e-3), Method::rk4);
  EXPECT_LE(r.sup_deviation, 1e-6);
  EXPECT_GT(r.sup_deviation, 0.0);
  EXPECT_LE(r.mean_deviation, r.sup_deviation);
  EXPECT_EQ(r.per_time_deviation.size(), 5001u);
  EXPECT_EQ(r.num_inputs, 2u);
  ASSERT_TRUE(r.augmented_sup_deviation.has_value());
  EXPECT_LE(*r.augmented_sup_deviation, 1e-5);
  EXPECT_LE(r.simplex_drift_max, 1e-9);
}

TEST(Verify, NonSquareReadoutSkipsAugmented) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 4, 3, 2);
  const std::vector<Vector> inputs{vec({0.3, -0.2})};
  const EquivalenceReport r = verify_equivalence(spec, inputs, TimeGrid(1.0, 1e-2), Method::rk4);
  EXPECT_FALSE(r.augmented_sup_deviation.has_value());
  EXPECT_FALSE(r.augmented_note.empty());
}

TEST(Verify, ReportJsonFields) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 31, {}, 2.0);
  const std::vector<Vector> inputs{vec({0.3, -0.2})};
  const EquivalenceReport r = verify_equivalence(spec, inputs, TimeGrid(1.0, 1e-2), Method::rk4);
  const auto doc = nlohmann::json::parse(report_to_json(r, "dev.csv", 1e-6));
  for (const char* key : {"grid", "method", "sup_deviation", "mean_deviation", "simplex_drift_max",
                          "per_time_deviation_csv_path", "tolerance", "passed", "augmented"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(doc["method"], "rk4");
  EXPECT_EQ(doc["per_time_deviation_csv_path"], "dev.csv");
  EXPECT_EQ(doc["sup_deviation"].get<double>(), r.sup_deviation);
  EXPECT_EQ(doc["passed"], true);
  EXPECT_EQ(doc["grid"]["points"], 101);
  EXPECT_EQ(nlohmann::json::parse(report_to_json(r, "dev.csv", 1e-30))["passed"], false);
}

TEST(Verify, DeviationCsvRows) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 31, {}, 2.0);
  const std::vector<Vector> inputs{vec({0.3, -0.2})};
  const EquivalenceReport r = verify_equivalence(spec, inputs, TimeGrid(1.0, 1e-2), Method::rk4);
  std::ostringstream out;
  write_deviation_csv(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,deviation,augmented_deviation");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 101);
}

TEST(Ternary, VerticesProjectToCorners) {
  const TernaryFrame f;
  for (int i = 0; i < 3; ++i) {
    const auto p = f.project(SimplexPoint::vertex(static_cast<std::size_t>(i), 3).probs());
    EXPECT_NEAR(p[0], f.vertex(i)[0], 1e-12);
    EXPECT_NEAR(p[1], f.vertex(i)[1], 1e-12);
  }
  EXPECT_THROW(f.project(vec({0.5, 0.5})), DimensionError);
}

TEST(Ternary, TracePointsSatisfyBarycentricBounds) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 5, {4}, 3.0);
  const CascadeRun run = integrate_cascade(spec, vec({1.0, -0.5}), TimeGrid(5.0, 1e-2), Method::rk4);
  const TernaryFrame frame;
  const std::string svg = ternary_svg({TernaryPath{run.output.states}}, "trace", frame);
  EXPECT_NE(svg.find("class=\"simplex\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"start\""), std::string::npos);
  std::size_t labels = 0;
  for (std::size_t pos = 0; (pos = svg.find("class=\"vertex-label\"", pos)) != std::string::npos; ++pos) ++labels;
  EXPECT_EQ(labels, 3u);
  for (const char* digit : {">1</text>", ">2</text>", ">3</text>"}) EXPECT_NE(svg.find(digit), std::string::npos);

  const auto points = polyline_points(svg);
  ASSERT_EQ(points.size(), run.output.states.size());
  // coordinates are printed with 3 decimals
  const double slack = 1e-2 / (frame.size - 2 * frame.margin);
  for (const auto& p : points) {
    for (double l : barycentric(frame, p[0], p[1])) {
      EXPECT_GE(l, -slack);
      EXPECT_LE(l, 1.0 + slack);
    }
  }
  const auto first = barycentric(frame, points.front()[0], points.front()[1]);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(first[i], run.output.states.front()(i), 1e-4);
}
