#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mvd/svg.hpp"

// Learning-curve SVG (score vs N per depth, Wiener reference line) from a
// sweep record file.
int main(int argc, char** argv) {
  CLI::App app{"learning-curve plot from sweep records"};
  std::string records_path, out_path;
  app.add_option("--records", records_path, "records CSV from sweep1d")->required();
  app.add_option("--out", out_path, "output SVG path")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream is(records_path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + records_path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    mvd::SweepConfig cfg;
    const auto records = mvd::records_from_csv(buffer.str(), &cfg);
    const double ese = mvd::analytic_ese(cfg.model());
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output " + out_path);
    os << mvd::learning_curve_svg(records, ese);
    std::cout << "wrote " << out_path << "\n";
  } catch (const std::exception& e) {
    std::cerr << "plot1d: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
