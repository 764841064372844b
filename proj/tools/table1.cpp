#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mvd/protocol1d.hpp"

// Build the score table (methods x N) from a sweep record file: per cell the
// median test MSE of the validation-selected runs, plus the analytic Wiener
// row. Writes CSV and prints the text rendering.
int main(int argc, char** argv) {
  CLI::App app{"score table from sweep records"};
  std::string records_path, out_path;
  app.add_option("--records", records_path, "records CSV from sweep1d")->required();
  app.add_option("--out", out_path, "output table CSV")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream is(records_path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + records_path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    mvd::SweepConfig cfg;
    const auto records = mvd::records_from_csv(buffer.str(), &cfg);
    const double ese = mvd::analytic_ese(cfg.model());
    const auto scores = mvd::table_from_records(records, ese);
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output " + out_path);
    os << mvd::scores_to_csv(scores);
    std::cout << mvd::scores_to_text(scores);
  } catch (const std::exception& e) {
    std::cerr << "table1: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
