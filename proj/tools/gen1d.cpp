#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "mvd/signal1d.hpp"

// Generate a 1-D dataset file (format MVD1) from the Gaussian model.
int main(int argc, char** argv) {
  CLI::App app{"generate a 1-D Gaussian deconvolution dataset"};
  double rho = 0.95;
  std::size_t dim = 32;
  double sigma_n = mvd::kReferenceSigmaN;
  double blur_gain = mvd::kReferenceBlurGain;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  app.add_option("--rho", rho, "autocorrelation decay, in (0,1)");
  app.add_option("--dim", dim, "signal dimension D");
  app.add_option("--sigma-n", sigma_n, "noise standard deviation");
  app.add_option("--blur-gain", blur_gain, "scale applied to the blur first row");
  app.add_option("--n", n, "number of sample pairs")->required();
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output dataset path")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto model = mvd::make_model(rho, dim, sigma_n, blur_gain);
    const auto pairs =
        mvd::generate_dataset(model, n, mvd::RngStream::master(seed).fork("dataset"));
    mvd::save_dataset(out, dim, pairs);
    std::cout << "wrote " << n << " pairs (D=" << dim << ") to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "gen1d: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
