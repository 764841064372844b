#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "mvd/disk2d.hpp"

using namespace mvd;

TEST_CASE("parameter distribution respects the documented ranges at D=201") {
  Rng rng = RngStream::master(51).rng();
  double min_r = 1e9, max_r = -1e9;
  for (int i = 0; i < 100000; ++i) {
    const auto p = sample_disk_params(201, rng);
    min_r = std::min(min_r, p.radius);
    max_r = std::max(max_r, p.radius);
    REQUIRE(p.radius >= 10.0);
    REQUIRE(p.radius <= 40.0);
    REQUIRE(p.cx >= -50.0);
    REQUIRE(p.cx <= 50.0);
    REQUIRE(p.cy >= -50.0);
    REQUIRE(p.cy <= 50.0);
    REQUIRE(p.fg >= 0.0);
    REQUIRE(p.fg <= 1.0);
    REQUIRE(p.bg >= 0.0);
    REQUIRE(p.bg <= 1.0);
    REQUIRE(std::abs(p.fg - p.bg) > kMinContrast);
  }
  // the radius span is actually exercised
  REQUIRE(min_r < 11.0);
  REQUIRE(max_r > 39.0);
  REQUIRE_THROWS_AS(sample_disk_params(200, rng), std::invalid_argument);
}

TEST_CASE("foreground at bg = 0 lands strictly above the contrast gap") {
  // drive bg to ~0 by construction: draw until a tiny bg appears, then the
  // foreground must sit in (delta, 1]
  Rng rng = RngStream::master(52).rng();
  double min_fg_at_low_bg = 1e9;
  for (int i = 0; i < 100000; ++i) {
    const auto p = sample_disk_params(201, rng);
    if (p.bg < 0.01) min_fg_at_low_bg = std::min(min_fg_at_low_bg, p.fg);
  }
  REQUIRE(min_fg_at_low_bg > kMinContrast);
}

TEST_CASE("render evaluates the indicator on pixel centers") {
  DiskParams p{10.0, 0.0, 0.0, 0.8, 0.2};
  const auto img = render(p, 41);
  REQUIRE(img.at(20, 20) == 0.8);             // center pixel, x = (0,0)
  REQUIRE(img.at(20, 30) == 0.8);             // x = (10,0): boundary is inside
  REQUIRE(img.at(20, 31) == 0.2);             // x = (11,0): outside
  REQUIRE(img.at(9, 20) == 0.2);              // x = (0,11)
  REQUIRE(img.at(10, 20) == 0.8);             // x = (0,10): boundary
}

TEST_CASE("digital disk area tracks pi r^2") {
  for (double r : {10.0, 25.0, 40.0}) {
    DiskParams p{r, 0.0, 0.0, 1.0, 0.0};
    const auto img = render(p, 201);
    double count = 0;
    for (double v : img.pixels) count += v;
    REQUIRE(std::abs(count - 3.141592653589793 * r * r) < 4.0 * r);
  }
}

TEST_CASE("clean disks take exactly two values and grow monotonically in r") {
  DiskParams p{15.0, 7.25, -3.5, 0.9, 0.1};
  const auto img = render(p, 101);
  std::set<double> values(img.pixels.begin(), img.pixels.end());
  REQUIRE(values.size() == 2);

  DiskParams bigger = p;
  bigger.radius = 21.0;
  const auto img2 = render(bigger, 101);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) REQUIRE(img2.pixels[i] >= img.pixels[i]);
}

TEST_CASE("degrade2d with zero blur and zero noise is the identity") {
  DiskParams p{12.0, 0.0, 0.0, 0.7, 0.3};
  const auto img = render(p, 61);
  Rng rng = RngStream::master(53).rng();
  const auto out = degrade2d(img, DegradeConfig{0.0, 0.0}, rng);
  REQUIRE(out.pixels == img.pixels);
}

TEST_CASE("unit-sum kernel preserves constant images") {
  Image img(33, 0.42);
  const auto out = gaussian_blur(img, 2.7);
  for (double v : out.pixels) REQUIRE(v == Catch::Approx(0.42).margin(1e-10));
}

TEST_CASE("noise variance matches sigma_n^2") {
  Image img(101, 0.5);
  Rng rng = RngStream::master(54).rng();
  const auto out = degrade2d(img, DegradeConfig{0.0, 0.1}, rng);
  double sum_sq = 0.0;
  for (double v : out.pixels) sum_sq += (v - 0.5) * (v - 0.5);
  REQUIRE(sum_sq / static_cast<double>(out.pixels.size()) == Catch::Approx(0.01).margin(0.001));
}

TEST_CASE("degraded output is not clipped to [0,1]") {
  Image bright(101, 0.99);
  Rng rng = RngStream::master(57).rng();
  const auto out = degrade2d(bright, DegradeConfig{0.0, 0.1}, rng);
  REQUIRE(*std::max_element(out.pixels.begin(), out.pixels.end()) > 1.0);
}

TEST_CASE("degraded images take more than two values") {
  DiskParams p{12.0, 0.0, 0.0, 0.7, 0.3};
  const auto img = render(p, 61);
  Rng rng = RngStream::master(55).rng();
  const auto out = degrade2d(img, DegradeConfig{2.0, 0.1}, rng);
  std::set<double> values(out.pixels.begin(), out.pixels.end());
  REQUIRE(values.size() > 2);
}

TEST_CASE("dataset generation is bit-reproducible") {
  const DegradeConfig cfg{2.0, 0.1};
  const auto a = generate_dataset2d(3, 61, cfg, RngStream::master(56).fork("d"));
  const auto b = generate_dataset2d(3, 61, cfg, RngStream::master(56).fork("d"));
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(a[i].degraded.pixels == b[i].degraded.pixels);
    REQUIRE(a[i].params.radius == b[i].params.radius);
  }
  REQUIRE_THROWS_AS(generate_dataset2d(0, 61, cfg, RngStream::master(56)), std::invalid_argument);
}

TEST_CASE("label scaling maps the radius range onto [-0.6, 0.6]") {
  REQUIRE(scaled_radius(25.0, 201) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(scaled_radius(10.0, 201) == Catch::Approx(-0.6));
  REQUIRE(scaled_radius(40.0, 201) == Catch::Approx(0.6));
}

TEST_CASE("raster file round trip is bit exact") {
  DiskParams p{9.0, 1.0, -2.0, 0.55, 0.15};
  const auto img = render(p, 31);
  const std::string path = (std::filesystem::temp_directory_path() / "mvd_test.f64").string();
  write_raster(path, img);
  const auto back = read_raster(path);
  REQUIRE(back.dim == img.dim);
  REQUIRE(back.pixels == img.pixels);
  std::filesystem::remove(path);
}

TEST_CASE("params JSON round trip") {
  DiskParams p{17.25, -31.5, 4.125, 0.875, 0.125};
  const auto back = params_from_json(params_to_json(p));
  REQUIRE(back.radius == p.radius);
  REQUIRE(back.cx == p.cx);
  REQUIRE(back.cy == p.cy);
  REQUIRE(back.fg == p.fg);
  REQUIRE(back.bg == p.bg);
}
