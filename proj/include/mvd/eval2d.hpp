#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mvd/disk2d.hpp"
#include "mvd/pointflow.hpp"

namespace mvd {

// Pointflow evaluation over a random degraded-disk dataset, reported in the
// three-way split used by the score tables: joint (r, cx, cy), radius
// only, and center only. Estimation failures are excluded from the MSEs and
// reported as a count alongside.
struct Eval2DReport {
  std::size_t n_images = 0;
  std::size_t n_failures = 0;
  std::optional<double> mse_joint;
  std::optional<double> mse_r;
  std::optional<double> mse_c;
  std::size_t dim = 201;
  DegradeConfig degrade;
  PointflowConfig pointflow;
  std::uint64_t seed = 0;
};

// Image i is built from stream (seed, "data", i) and flowed with stream
// (seed, "flow", i); both are independent per index, so the evaluation is
// order-independent and reproducible.
inline Eval2DReport evaluate_pointflow(std::size_t n, std::size_t dim, const DegradeConfig& degrade,
                                       const PointflowConfig& pf, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("evaluate_pointflow: n >= 1 required");
  pf.validate();
  Eval2DReport report;
  report.n_images = n;
  report.dim = dim;
  report.degrade = degrade;
  report.pointflow = pf;
  report.seed = seed;

  const auto master = RngStream::master(seed);
  const auto flow_stream = master.fork("flow");
  double sum_r = 0.0, sum_c = 0.0;
  std::size_t successes = 0;

  for_each_disk_sample(n, dim, degrade, master.fork("data"),
                       [&](std::size_t i, const DiskSample& sample) {
                         Rng rng = flow_stream.fork(i).rng();
                         try {
                           const DiskEstimate est = estimate_disk(sample.degraded, pf, rng);
                           const double dr = est.radius - sample.params.radius;
                           const double dx = est.center.x - sample.params.cx;
                           const double dy = est.center.y - sample.params.cy;
                           sum_r += dr * dr;
                           sum_c += dx * dx + dy * dy;
                           ++successes;
                         } catch (const estimation_failure&) {
                           ++report.n_failures;
                         }
                       });

  if (successes > 0) {
    report.mse_r = sum_r / static_cast<double>(successes);
    report.mse_c = sum_c / static_cast<double>(successes);
    report.mse_joint = *report.mse_r + *report.mse_c;
  }
  return report;
}

inline nlohmann::json report_to_json(const Eval2DReport& r) {
  nlohmann::json j{{"n_images", r.n_images},
                   {"n_failures", r.n_failures},
                   {"dim", r.dim},
                   {"sigma_b", r.degrade.sigma_b},
                   {"sigma_n", r.degrade.sigma_n},
                   {"seed", r.seed},
                   {"pointflow",
                    {{"sigma_pf", r.pointflow.sigma_pf},
                     {"dt", r.pointflow.dt},
                     {"tau_l", r.pointflow.tau_l},
                     {"tau_s", r.pointflow.tau_s},
                     {"tau_len", r.pointflow.tau_len},
                     {"N_i", r.pointflow.n_iters},
                     {"N_pf", r.pointflow.n_seeds}}}};
  j["mse_joint"] = r.mse_joint ? nlohmann::json(*r.mse_joint) : nlohmann::json(nullptr);
  j["mse_r"] = r.mse_r ? nlohmann::json(*r.mse_r) : nlohmann::json(nullptr);
  j["mse_c"] = r.mse_c ? nlohmann::json(*r.mse_c) : nlohmann::json(nullptr);
  return j;
}

inline PointflowConfig pointflow_config_from_json(const nlohmann::json& j) {
  PointflowConfig cfg;
  cfg.sigma_pf = j.value("sigma_pf", cfg.sigma_pf);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.tau_l = j.value("tau_l", cfg.tau_l);
  cfg.tau_s = j.value("tau_s", cfg.tau_s);
  cfg.tau_len = j.value("tau_len", cfg.tau_len);
  cfg.n_iters = j.value("N_i", cfg.n_iters);
  cfg.n_seeds = j.value("N_pf", cfg.n_seeds);
  cfg.validate();
  return cfg;
}

inline Eval2DReport report_from_json(const nlohmann::json& j) {
  Eval2DReport r;
  r.n_images = j.at("n_images").get<std::size_t>();
  r.n_failures = j.at("n_failures").get<std::size_t>();
  r.dim = j.at("dim").get<std::size_t>();
  r.degrade.sigma_b = j.at("sigma_b").get<double>();
  r.degrade.sigma_n = j.at("sigma_n").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.pointflow = pointflow_config_from_json(j.at("pointflow"));
  if (!j.at("mse_joint").is_null()) r.mse_joint = j.at("mse_joint").get<double>();
  if (!j.at("mse_r").is_null()) r.mse_r = j.at("mse_r").get<double>();
  if (!j.at("mse_c").is_null()) r.mse_c = j.at("mse_c").get<double>();
  return r;
}

namespace detail {

inline std::string metric_cell(const std::optional<double>& v) {
  if (!v) return "fail";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace detail

// Table-2 shape: three metric rows with the Pointflow column filled in and
// the network columns marked not implemented (out of scope here).
inline std::string report_to_csv(const Eval2DReport& r) {
  std::ostringstream os;
  os << "metric,pointflow,networks\n";
  os << "mse_joint," << detail::metric_cell(r.mse_joint) << ",not implemented\n";
  os << "mse_r," << detail::metric_cell(r.mse_r) << ",not implemented\n";
  os << "mse_c," << detail::metric_cell(r.mse_c) << ",not implemented\n";
  os << "n_images," << r.n_images << ",-\n";
  os << "n_failures," << r.n_failures << ",-\n";
  return os.str();
}

// Parses the numeric content back out of report_to_csv output.
inline Eval2DReport report_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "metric,pointflow,networks")
    throw std::runtime_error("report_from_csv: missing header");
  Eval2DReport r;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma1 = line.find(',');
    const auto comma2 = line.find(',', comma1 + 1);
    if (comma1 == std::string::npos || comma2 == std::string::npos)
      throw std::runtime_error("report_from_csv: malformed row");
    const std::string metric = line.substr(0, comma1);
    const std::string cell = line.substr(comma1 + 1, comma2 - comma1 - 1);
    auto parse_mse = [&]() -> std::optional<double> {
      if (cell == "fail") return std::nullopt;
      return std::stod(cell);
    };
    if (metric == "mse_joint") r.mse_joint = parse_mse();
    else if (metric == "mse_r") r.mse_r = parse_mse();
    else if (metric == "mse_c") r.mse_c = parse_mse();
    else if (metric == "n_images") r.n_images = std::stoull(cell);
    else if (metric == "n_failures") r.n_failures = std::stoull(cell);
  }
  return r;
}

inline std::string report_to_text(const Eval2DReport& r) {
  auto cell = [](const std::optional<double>& v) -> std::string {
    if (!v) return "fail";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
  };
  std::ostringstream os;
  os << "metric      Pointflow   networks\n";
  char line[96];
  std::snprintf(line, sizeof line, "%-12s%-12s%s\n", "(r,c)", cell(r.mse_joint).c_str(),
                "not implemented");
  os << line;
  std::snprintf(line, sizeof line, "%-12s%-12s%s\n", "r", cell(r.mse_r).c_str(), "not implemented");
  os << line;
  std::snprintf(line, sizeof line, "%-12s%-12s%s\n", "c", cell(r.mse_c).c_str(), "not implemented");
  os << line;
  const double rate = r.n_images == 0 ? 0.0
                                      : static_cast<double>(r.n_failures) /
                                            static_cast<double>(r.n_images);
  std::snprintf(line, sizeof line, "failures: %zu / %zu (%.1f%%)\n", r.n_failures, r.n_images,
                100.0 * rate);
  os << line;
  return os.str();
}

}  // namespace mvd
