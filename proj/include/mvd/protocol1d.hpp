#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mvd/tinynet.hpp"
#include "mvd/wiener.hpp"

namespace mvd {

// Experimental protocol for the 1-D benchmark: train N_r nets per
// (depth, N, eta) cell, pick eta*(N) by the median validation MSE of the r
// best-on-validation runs, and report the median test MSE of those same
// runs ("SCORE"). Validation and test sets are generated once per sweep and
// shared by every run; the training set is regenerated per N.

struct SweepConfig {
  std::vector<int> depths{0};
  std::vector<std::size_t> Ns{100, 1000, 10000};
  std::vector<double> etas{0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1};
  int N_r = 10;
  int r = 3;
  std::size_t N_t = 10000;
  std::size_t N_v = 10000;
  int epochs = 50;
  int batch_size = 10;
  std::uint64_t master_seed = 1;
  // model; defaults are the reference configuration
  double rho = 0.95;
  std::size_t dim = 32;
  double sigma_n = kReferenceSigmaN;
  double blur_gain = kReferenceBlurGain;
  int kernel_support = 0;

  void validate() const {
    if (depths.empty() || Ns.empty() || etas.empty()) throw std::invalid_argument("SweepConfig: empty axis");
    for (int d : depths)
      if (d < 0 || d > 3) throw std::invalid_argument("SweepConfig: depth must be in {0,1,2,3}");
    for (auto n : Ns)
      if (n < 1) throw std::invalid_argument("SweepConfig: N >= 1 required");
    if (N_r < 1 || r < 1 || r > N_r) throw std::invalid_argument("SweepConfig: need 1 <= r <= N_r");
    if (N_t < 1 || N_v < 1) throw std::invalid_argument("SweepConfig: N_t, N_v >= 1 required");
    if (epochs < 1 || batch_size < 1) throw std::invalid_argument("SweepConfig: epochs, batch_size >= 1");
  }

  SignalModel1D model() const { return make_model(rho, dim, sigma_n, blur_gain); }

  nlohmann::json to_json() const {
    return nlohmann::json{{"depths", depths}, {"Ns", Ns},     {"etas", etas},
                          {"N_r", N_r},       {"r", r},       {"N_t", N_t},
                          {"N_v", N_v},       {"epochs", epochs}, {"batch_size", batch_size},
                          {"master_seed", master_seed}, {"rho", rho},   {"dim", dim},
                          {"sigma_n", sigma_n}, {"blur_gain", blur_gain},
                          {"kernel_support", kernel_support}};
  }

  static SweepConfig from_json(const nlohmann::json& j) {
    SweepConfig cfg;
    cfg.depths = j.at("depths").get<std::vector<int>>();
    cfg.Ns = j.at("Ns").get<std::vector<std::size_t>>();
    cfg.etas = j.at("etas").get<std::vector<double>>();
    cfg.N_r = j.at("N_r").get<int>();
    cfg.r = j.at("r").get<int>();
    cfg.N_t = j.at("N_t").get<std::size_t>();
    cfg.N_v = j.at("N_v").get<std::size_t>();
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    cfg.rho = j.value("rho", cfg.rho);
    cfg.dim = j.value("dim", cfg.dim);
    cfg.sigma_n = j.value("sigma_n", cfg.sigma_n);
    cfg.blur_gain = j.value("blur_gain", cfg.blur_gain);
    cfg.kernel_support = j.value("kernel_support", cfg.kernel_support);
    cfg.validate();
    return cfg;
  }
};

struct RunRecord {
  int depth = 0;
  std::size_t n_train = 0;
  int eta_index = 0;
  double eta = 0.0;
  int run_index = 0;
  double val_mse = 0.0;
  double test_mse = 0.0;
  bool selected = false;

  bool operator==(const RunRecord&) const = default;
};

// Median with even counts averaged; non-finite values sort last.
inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  for (auto& v : values)
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace detail {

inline double rank_key(double mse) {
  return std::isnan(mse) ? std::numeric_limits<double>::infinity() : mse;
}

// Indices of the r best-on-validation records for one (depth, N, eta) cell,
// ties broken by run index.
inline std::vector<std::size_t> best_runs(std::span<const RunRecord> records, int depth,
                                          std::size_t n_train, int eta_index, int r) {
  std::vector<std::size_t> cell;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].depth == depth && records[i].n_train == n_train &&
        records[i].eta_index == eta_index)
      cell.push_back(i);
  if (cell.size() < static_cast<std::size_t>(r))
    throw std::invalid_argument("selection: fewer than r runs for an eta");
  std::sort(cell.begin(), cell.end(), [&](std::size_t a, std::size_t b) {
    const double va = rank_key(records[a].val_mse), vb = rank_key(records[b].val_mse);
    if (va != vb) return va < vb;
    return records[a].run_index < records[b].run_index;
  });
  cell.resize(static_cast<std::size_t>(r));
  return cell;
}

struct EtaChoice {
  int eta_index = -1;
  double eta = 0.0;
  std::vector<std::size_t> selected;  // record indices
};

inline EtaChoice choose_eta(std::span<const RunRecord> records, int depth, std::size_t n_train,
                            int r) {
  // (eta value, eta index) pairs present in this cell, ascending by value so
  // ties resolve toward the smaller learning rate.
  std::map<std::pair<double, int>, bool> etas;
  for (const auto& rec : records)
    if (rec.depth == depth && rec.n_train == n_train)
      etas[{rec.eta, rec.eta_index}] = true;
  if (etas.empty()) throw std::invalid_argument("selection: no records for requested cell");
  EtaChoice best;
  double best_median = std::numeric_limits<double>::infinity();
  for (const auto& [key, unused] : etas) {
    (void)unused;
    auto runs = best_runs(records, depth, n_train, key.second, r);
    std::vector<double> vals;
    vals.reserve(runs.size());
    for (auto i : runs) vals.push_back(records[i].val_mse);
    const double med = median(vals);
    if (best.eta_index < 0 || med < best_median) {
      best_median = med;
      best = EtaChoice{key.second, key.first, std::move(runs)};
    }
  }
  return best;
}

}  // namespace detail

// eta*(N) = argmin over eta of the median validation MSE of the r best runs.
inline double select_learning_rate(std::span<const RunRecord> records, int depth,
                                   std::size_t n_train, int r) {
  return detail::choose_eta(records, depth, n_train, r).eta;
}

// Median test MSE over the same r runs that selection chose at eta*. When
// the records already carry selection flags for this cell, they must agree
// with the recomputed set.
inline double score(std::span<const RunRecord> records, int depth, std::size_t n_train, int r,
                    double eta_star) {
  auto choice = detail::choose_eta(records, depth, n_train, r);
  if (choice.eta != eta_star)
    throw std::invalid_argument("score: eta_star does not match the validation selection");
  std::vector<bool> chosen(records.size(), false);
  for (auto i : choice.selected) chosen[i] = true;
  bool any_flag = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.depth == depth && rec.n_train == n_train && rec.selected) any_flag = true;
  }
  if (any_flag) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      if (rec.depth != depth || rec.n_train != n_train) continue;
      if (rec.selected != chosen[i])
        throw std::logic_error("score: recorded selection disagrees with recomputation");
    }
  }
  std::vector<double> tests;
  for (auto i : choice.selected) tests.push_back(records[i].test_mse);
  return median(tests);
}

// MSE of a net over a sample set, with the Monte-Carlo standard error.
inline MseStats evaluate_net(const TinyNet& net, std::span<const SamplePair1D> pairs) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_net: empty set");
  detail::ForwardScratch scratch;
  scratch.resize(net);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : pairs) {
    detail::forward_into(net, p.phi_data, scratch);
    double err = 0.0;
    for (std::size_t i = 0; i < net.dim; ++i) {
      const double e = scratch.out[i] - p.phi[i];
      err += e * e;
    }
    sum += err;
    sum_sq += err * err;
  }
  const double n = static_cast<double>(pairs.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

// Full sweep. Deterministic in the config (thread count does not change the
// output): every run draws from streams keyed by (master_seed, purpose,
// depth, N index, eta index, run index). Each run's test MSE is checked
// against the Wiener bound (no estimator may beat analytic_ese by more than
// 3 Monte-Carlo standard errors).
inline std::vector<RunRecord> run_sweep(const SweepConfig& cfg, int n_threads = 0) {
  cfg.validate();
  const SignalModel1D model = cfg.model();
  const auto master = RngStream::master(cfg.master_seed);
  const auto val_set = generate_dataset(model, cfg.N_v, master.fork("val"));
  const auto test_set = generate_dataset(model, cfg.N_t, master.fork("test"));
  const double ese = analytic_ese(model);

  std::vector<std::vector<SamplePair1D>> train_sets;
  train_sets.reserve(cfg.Ns.size());
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni)
    train_sets.push_back(generate_dataset(model, cfg.Ns[ni], master.fork("train").fork(ni)));

  struct Task {
    std::size_t depth_i, n_i, eta_i;
    int run;
  };
  std::vector<Task> tasks;
  for (std::size_t di = 0; di < cfg.depths.size(); ++di)
    for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni)
      for (std::size_t ei = 0; ei < cfg.etas.size(); ++ei)
        for (int run = 0; run < cfg.N_r; ++run) tasks.push_back({di, ni, ei, run});

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&]() {
    try {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks.size() || failed.load()) break;
        const Task& task = tasks[t];
        const int depth = cfg.depths[task.depth_i];
        const std::size_t n_train = cfg.Ns[task.n_i];
        const double eta = cfg.etas[task.eta_i];
        auto run_key = [&](const char* tag) {
          return master.fork(tag)
              .fork(task.depth_i)
              .fork(task.n_i)
              .fork(task.eta_i)
              .fork(static_cast<std::uint64_t>(task.run));
        };
        Rng init_rng = run_key("init").rng();
        TinyNet net = init_network(depth, cfg.dim, init_rng, cfg.kernel_support);
        NesterovSgd opt(eta);
        net = train(std::move(net), train_sets[task.n_i], TrainConfig{cfg.epochs, cfg.batch_size},
                    opt, run_key("shuffle"));
        const auto val = evaluate_net(net, val_set);
        const auto test = evaluate_net(net, test_set);
        if (std::isfinite(test.mse) && test.mse < ese - 3.0 * test.std_error)
          throw std::logic_error("run_sweep: a trained net beat the Wiener bound; "
                                 "this indicates a modelling bug");
        records[t] = RunRecord{depth,        n_train, static_cast<int>(task.eta_i), eta,
                               task.run,     val.mse, test.mse,
                               false};
      }
    } catch (...) {
      std::scoped_lock lock(error_mutex);
      if (!error) error = std::current_exception();
      failed.store(true);
    }
  };

  int threads = n_threads > 0 ? n_threads : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // Stamp the selected runs per (depth, N).
  for (std::size_t di = 0; di < cfg.depths.size(); ++di)
    for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
      const auto choice = detail::choose_eta(records, cfg.depths[di], cfg.Ns[ni], cfg.r);
      for (auto i : choice.selected) records[i].selected = true;
    }
  return records;
}

// ---------------------------------------------------------------------------
// Records CSV. Line 1 carries the sweep config as a JSON comment so that the
// table and plot tools can recover the model and r without extra flags.

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline std::string records_to_csv(const SweepConfig& cfg, std::span<const RunRecord> records) {
  std::ostringstream os;
  os << "# mvdbench-records v1 " << cfg.to_json().dump() << "\n";
  os << "depth,n_train,eta_index,eta,run_index,val_mse,test_mse,selected\n";
  for (const auto& r : records)
    os << r.depth << ',' << r.n_train << ',' << r.eta_index << ',' << detail::format_double(r.eta)
       << ',' << r.run_index << ',' << detail::format_double(r.val_mse) << ','
       << detail::format_double(r.test_mse) << ',' << (r.selected ? 1 : 0) << "\n";
  return os.str();
}

inline std::vector<RunRecord> records_from_csv(const std::string& text, SweepConfig* cfg_out = nullptr) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("records_from_csv: empty input");
  const std::string prefix = "# mvdbench-records v1 ";
  if (line.rfind(prefix, 0) != 0) throw std::runtime_error("records_from_csv: missing header comment");
  if (cfg_out) *cfg_out = SweepConfig::from_json(nlohmann::json::parse(line.substr(prefix.size())));
  if (!std::getline(is, line) || line.rfind("depth,", 0) != 0)
    throw std::runtime_error("records_from_csv: missing column header");
  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != 8) throw std::runtime_error("records_from_csv: malformed row");
    RunRecord r;
    r.depth = std::stoi(cols[0]);
    r.n_train = std::stoull(cols[1]);
    r.eta_index = std::stoi(cols[2]);
    r.eta = std::stod(cols[3]);
    r.run_index = std::stoi(cols[4]);
    r.val_mse = std::stod(cols[5]);
    r.test_mse = std::stod(cols[6]);
    r.selected = cols[7] == "1";
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Score table (the Table-1 shape): rows wiener, k0..k3; columns N.

struct ScoreEntry {
  std::string method;  // "wiener" or "k<depth>"
  std::size_t n_train = 0;  // 0 for the wiener row
  double score = 0.0;

  bool operator==(const ScoreEntry&) const = default;
};

// Scores from a stamped record table: per (depth, N), the median test MSE
// over the selected runs, plus the wiener reference row.
inline std::vector<ScoreEntry> table_from_records(std::span<const RunRecord> records,
                                                  double wiener_ese) {
  std::vector<ScoreEntry> out;
  out.push_back({"wiener", 0, wiener_ese});
  std::map<std::pair<int, std::size_t>, std::vector<double>> cells;
  for (const auto& rec : records)
    if (rec.selected) cells[{rec.depth, rec.n_train}].push_back(rec.test_mse);
  for (const auto& [key, tests] : cells)
    out.push_back({"k" + std::to_string(key.first), key.second, median(tests)});
  return out;
}

inline std::string scores_to_csv(std::span<const ScoreEntry> scores) {
  std::ostringstream os;
  os << "method,N,score\n";
  for (const auto& s : scores)
    os << s.method << ',' << s.n_train << ',' << detail::format_double(s.score) << "\n";
  return os.str();
}

inline std::vector<ScoreEntry> scores_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "method,N,score")
    throw std::runtime_error("scores_from_csv: missing header");
  std::vector<ScoreEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != 3) throw std::runtime_error("scores_from_csv: malformed row");
    out.push_back({cols[0], std::stoull(cols[1]), std::stod(cols[2])});
  }
  return out;
}

// Fixed-width text rendering, one row per method, one column per N.
inline std::string scores_to_text(std::span<const ScoreEntry> scores) {
  std::vector<std::size_t> ns;
  std::vector<std::string> methods;
  for (const auto& s : scores) {
    if (std::find(ns.begin(), ns.end(), s.n_train) == ns.end()) ns.push_back(s.n_train);
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end())
      methods.push_back(s.method);
  }
  std::sort(ns.begin(), ns.end());
  std::sort(methods.begin(), methods.end(), [](const std::string& a, const std::string& b) {
    if (a == "wiener") return b != "wiener";
    if (b == "wiener") return false;
    return a < b;
  });
  auto label = [](const std::string& m) -> std::string {
    if (m == "wiener") return "Wiener";
    if (m == "k0") return "Linear (k=0)";
    if (m.size() == 2 && m[0] == 'k') return std::string("CNN (k=") + m[1] + ")";
    return m;
  };
  std::ostringstream os;
  os << "method        ";
  for (auto n : ns) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%10s", ("N=" + std::to_string(n)).c_str());
    os << buf;
  }
  os << "\n";
  for (const auto& m : methods) {
    char name[32];
    std::snprintf(name, sizeof name, "%-14s", label(m).c_str());
    os << name;
    for (auto n : ns) {
      const ScoreEntry* found = nullptr;
      for (const auto& s : scores)
        if (s.method == m && s.n_train == n) found = &s;
      char cell[16];
      if (found)
        std::snprintf(cell, sizeof cell, "%10.3f", found->score);
      else
        std::snprintf(cell, sizeof cell, "%10s", "-");
      os << cell;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace mvd
