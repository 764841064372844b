#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mvd/eval2d.hpp"

using namespace mvd;

TEST_CASE("clean disks are estimated to subpixel MSE with no failures") {
  const auto report = evaluate_pointflow(25, 201, DegradeConfig{0.0, 0.0}, PointflowConfig{}, 71);
  REQUIRE(report.n_images == 25);
  REQUIRE(report.n_failures == 0);
  REQUIRE(report.mse_r.has_value());
  REQUIRE(*report.mse_r < 0.25);
  REQUIRE(*report.mse_c < 0.25);
}

TEST_CASE("the joint MSE decomposes into the radius and center parts") {
  const auto report = evaluate_pointflow(10, 201, DegradeConfig{2.0, 0.1}, PointflowConfig{}, 72);
  REQUIRE(report.mse_joint.has_value());
  REQUIRE(*report.mse_joint == Catch::Approx(*report.mse_r + *report.mse_c).margin(1e-9));
}

TEST_CASE("evaluation reports are deterministic in the seed") {
  const auto a = evaluate_pointflow(5, 201, DegradeConfig{2.0, 0.1}, PointflowConfig{}, 73);
  const auto b = evaluate_pointflow(5, 201, DegradeConfig{2.0, 0.1}, PointflowConfig{}, 73);
  REQUIRE(a.mse_joint == b.mse_joint);
  REQUIRE(a.mse_r == b.mse_r);
  REQUIRE(a.mse_c == b.mse_c);
  REQUIRE(a.n_failures == b.n_failures);
}

TEST_CASE("an impossible stuck threshold fails every image") {
  PointflowConfig hopeless;
  hopeless.tau_s = 1e9;  // every field magnitude is "stuck"
  const auto report = evaluate_pointflow(3, 101, DegradeConfig{0.0, 0.0}, hopeless, 74);
  REQUIRE(report.n_failures == 3);
  REQUIRE(!report.mse_joint.has_value());
  REQUIRE(!report.mse_r.has_value());

  const auto csv = report_to_csv(report);
  REQUIRE(csv.find("mse_joint,fail") != std::string::npos);
  const auto text = report_to_text(report);
  REQUIRE(text.find("100.0%") != std::string::npos);
}

TEST_CASE("report CSV and JSON round trips") {
  const auto report = evaluate_pointflow(4, 101, DegradeConfig{1.0, 0.05}, PointflowConfig{}, 75);

  const auto parsed = report_from_csv(report_to_csv(report));
  REQUIRE(parsed.n_images == report.n_images);
  REQUIRE(parsed.n_failures == report.n_failures);
  REQUIRE(parsed.mse_joint == report.mse_joint);
  REQUIRE(parsed.mse_r == report.mse_r);
  REQUIRE(parsed.mse_c == report.mse_c);

  const auto from_json = report_from_json(report_to_json(report));
  REQUIRE(from_json.mse_joint == report.mse_joint);
  REQUIRE(from_json.seed == report.seed);
  REQUIRE(from_json.pointflow.n_seeds == report.pointflow.n_seeds);
  REQUIRE(from_json.degrade.sigma_b == report.degrade.sigma_b);
}
