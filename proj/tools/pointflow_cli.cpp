#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvd/eval2d.hpp"
#include "mvd/pointflow.hpp"

// Run contour integration on one image and dump the contours (plus a tally
// of how the initial flows terminated) as JSON.
int main(int argc, char** argv) {
  CLI::App app{"pointflow contour integration on a raster image"};
  std::string image_path, config_path, out_path;
  std::uint64_t seed = 1;
  app.add_option("--image", image_path, "flat f64 raster (square)")->required();
  app.add_option("--config", config_path, "pointflow config JSON");
  app.add_option("--seed", seed, "seed for the flow start points");
  app.add_option("--out", out_path, "output contour JSON")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const mvd::Image img = mvd::read_raster(image_path);
    mvd::PointflowConfig cfg;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw std::runtime_error("cannot open config " + config_path);
      cfg = mvd::pointflow_config_from_json(nlohmann::json::parse(is));
    }

    // Tally the first-flow terminations with the same seed sequence the
    // contour integration uses.
    const auto [v_plus, v_minus] = mvd::compute_fields(img, cfg);
    std::map<std::string, int> outcomes;
    {
      mvd::Rng rng = mvd::RngStream::master(seed).fork("pointflow").rng();
      const double half = v_plus.half_extent();
      for (int i = 0; i < cfg.n_seeds; ++i) {
        const double x = rng.uniform(-half, half);
        const double y = rng.uniform(-half, half);
        outcomes[to_string(mvd::flow({x, y}, v_plus, cfg).termination)]++;
      }
    }
    mvd::Rng rng = mvd::RngStream::master(seed).fork("pointflow").rng();
    const auto contours = mvd::integrate_contours(img, cfg, rng);

    nlohmann::json out{{"dim", img.dim}, {"seed", seed}, {"contours", nlohmann::json::array()}};
    for (const auto& [label, count] : outcomes) out["initial_flow_terminations"][label] = count;
    for (const auto& c : contours) {
      nlohmann::json jc{{"termination", "loop"},
                        {"closed_length", c.closed_length()},
                        {"points", nlohmann::json::array()}};
      for (const auto& p : c.points) jc["points"].push_back({p.x, p.y});
      out["contours"].push_back(std::move(jc));
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output " + out_path);
    os << out.dump(2) << "\n";
    std::cout << "found " << contours.size() << " contours\n";
  } catch (const std::exception& e) {
    std::cerr << "pointflow: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
