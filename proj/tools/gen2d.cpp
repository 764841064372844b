#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvd/disk2d.hpp"

// Generate a degraded-disk image dataset: one raster file (flat f64) and a
// JSON ground-truth sidecar per image, plus a manifest.
int main(int argc, char** argv) {
  CLI::App app{"generate a random disk-image dataset"};
  std::size_t n = 0;
  std::size_t dim = 201;
  double sigma_b = 2.0, sigma_n = 0.1;
  std::uint64_t seed = 1;
  std::string out_dir;
  app.add_option("--n", n, "number of images")->required();
  app.add_option("--dim", dim, "image size D (odd)");
  app.add_option("--sigma-b", sigma_b, "blur standard deviation, pixels");
  app.add_option("--sigma-n", sigma_n, "noise standard deviation, intensity");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const mvd::DegradeConfig cfg{sigma_b, sigma_n};
    nlohmann::json manifest{{"dim", dim},     {"n", n},       {"sigma_b", sigma_b},
                            {"sigma_n", sigma_n}, {"seed", seed}, {"files", nlohmann::json::array()}};
    mvd::for_each_disk_sample(
        n, dim, cfg, mvd::RngStream::master(seed).fork("data"),
        [&](std::size_t i, const mvd::DiskSample& sample) {
          char stem[32];
          std::snprintf(stem, sizeof stem, "img_%05zu", i);
          const std::string raster = std::string(stem) + ".f64";
          const std::string sidecar = std::string(stem) + ".json";
          mvd::write_raster((fs::path(out_dir) / raster).string(), sample.degraded);
          std::ofstream js((fs::path(out_dir) / sidecar).string(), std::ios::binary);
          js << mvd::params_to_json(sample.params).dump(2) << "\n";
          manifest["files"].push_back({{"raster", raster}, {"params", sidecar}});
        });
    std::ofstream ms((fs::path(out_dir) / "manifest.json").string(), std::ios::binary);
    ms << manifest.dump(2) << "\n";
    std::cout << "wrote " << n << " images to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "gen2d: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
