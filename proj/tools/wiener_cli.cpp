#include <cstdint>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvd/wiener.hpp"

// Closed-form Wiener error for a model, optionally cross-checked against a
// seeded empirical run. Prints JSON to stdout.
int main(int argc, char** argv) {
  CLI::App app{"analytic (and optionally empirical) Wiener-filter error"};
  double rho = 0.95;
  std::size_t dim = 32;
  double sigma_n = mvd::kReferenceSigmaN;
  double blur_gain = mvd::kReferenceBlurGain;
  std::size_t empirical = 0;
  std::uint64_t seed = 1;
  app.add_option("--rho", rho, "autocorrelation decay, in (0,1)");
  app.add_option("--dim", dim, "signal dimension D");
  app.add_option("--sigma-n", sigma_n, "noise standard deviation");
  app.add_option("--blur-gain", blur_gain, "scale applied to the blur first row");
  app.add_option("--empirical", empirical, "also estimate the MSE over this many test pairs");
  app.add_option("--seed", seed, "seed for the empirical test set");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto model = mvd::make_model(rho, dim, sigma_n, blur_gain);
    nlohmann::json out{{"analytic_ese", mvd::analytic_ese(model)}};
    if (empirical > 0) {
      const auto filter = mvd::build_wiener(model);
      const auto pairs =
          mvd::generate_dataset(model, empirical, mvd::RngStream::master(seed).fork("test"));
      out["empirical_mse"] = mvd::empirical_mse(
          [&](std::span<const double> x) { return mvd::apply(filter, x); }, pairs);
      out["n"] = empirical;
    }
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "wiener: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
