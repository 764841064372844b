#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvd/protocol1d.hpp"

// Run the full learning-rate sweep described by a JSON config and write the
// per-run record table (CSV with the config echoed in the first line).
int main(int argc, char** argv) {
  CLI::App app{"learning-rate sweep over (depth, N, eta) cells"};
  std::string config_path, out_path;
  int threads = 0;
  app.add_option("--config", config_path, "sweep config JSON")->required();
  app.add_option("--out", out_path, "output records CSV")->required();
  app.add_option("--threads", threads, "worker threads (0 = hardware default)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config " + config_path);
    const auto cfg = mvd::SweepConfig::from_json(nlohmann::json::parse(is));
    const auto records = mvd::run_sweep(cfg, threads);
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output " + out_path);
    os << mvd::records_to_csv(cfg, records);
    std::cout << "wrote " << records.size() << " records to " << out_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "sweep1d: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
