#include <cstdint>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvd/protocol1d.hpp"

// Train one network on a fresh dataset and report train/val/test MSE plus
// the saved parameter file.
int main(int argc, char** argv) {
  CLI::App app{"train a single depth-k network on the 1-D model"};
  int depth = 0;
  std::size_t n = 0;
  double lr = 0.0;
  std::uint64_t seed = 1;
  int epochs = 50;
  int batch = 10;
  std::size_t n_val = 10000, n_test = 10000;
  double rho = 0.95;
  std::size_t dim = 32;
  double sigma_n = mvd::kReferenceSigmaN;
  double blur_gain = mvd::kReferenceBlurGain;
  int kernel_support = 0;
  std::string params_out = "params.mvp";
  app.add_option("--depth", depth, "network depth k in {0,1,2,3}")->required();
  app.add_option("--n", n, "training-set size")->required();
  app.add_option("--lr", lr, "learning rate")->required();
  app.add_option("--seed", seed, "master seed");
  app.add_option("--epochs", epochs, "training epochs");
  app.add_option("--batch", batch, "mini-batch size");
  app.add_option("--n-val", n_val, "validation-set size");
  app.add_option("--n-test", n_test, "test-set size");
  app.add_option("--rho", rho, "autocorrelation decay");
  app.add_option("--dim", dim, "signal dimension D");
  app.add_option("--sigma-n", sigma_n, "noise standard deviation");
  app.add_option("--blur-gain", blur_gain, "scale applied to the blur first row");
  app.add_option("--kernel-support", kernel_support,
                 "odd tap count restricting conv kernels (0 = full circulant)");
  app.add_option("--params-out", params_out, "where to write the trained parameters");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto model = mvd::make_model(rho, dim, sigma_n, blur_gain);
    const auto master = mvd::RngStream::master(seed);
    const auto train_set = mvd::generate_dataset(model, n, master.fork("train"));
    const auto val_set = mvd::generate_dataset(model, n_val, master.fork("val"));
    const auto test_set = mvd::generate_dataset(model, n_test, master.fork("test"));

    mvd::Rng init_rng = master.fork("init").rng();
    mvd::TinyNet net = mvd::init_network(depth, dim, init_rng, kernel_support);
    mvd::NesterovSgd opt(lr);
    net = mvd::train(std::move(net), train_set, mvd::TrainConfig{epochs, batch}, opt,
                     master.fork("shuffle"));
    mvd::save_network(params_out, net);

    nlohmann::json out{{"train_mse", mvd::evaluate_net(net, train_set).mse},
                       {"val_mse", mvd::evaluate_net(net, val_set).mse},
                       {"test_mse", mvd::evaluate_net(net, test_set).mse},
                       {"params_path", params_out}};
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "train1d: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
