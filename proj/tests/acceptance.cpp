// Acceptance suite: one criterion per check, one PASS/FAIL line each, exit
// code = number of failures. Criterion 9 exercises the installed CLI tools,
// so the binary wants --tools-dir (and a scratch --work-dir).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mvd/eval2d.hpp"
#include "mvd/pointflow.hpp"
#include "mvd/protocol1d.hpp"
#include "mvd/svg.hpp"
#include "mvd/tinynet.hpp"
#include "mvd/wiener.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!detail.str().empty()) detail << "; ";
    detail << what;
    if (!cond) {
      detail << " [FAILED]";
      ok = false;
    }
  }
};

std::string fmt(double v, const char* spec = "%.5g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

bool files_identical(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str() && !sa.str().empty();
}

int run_cmd(const std::string& cmd) { return std::system(cmd.c_str()); }

}  // namespace

int main(int argc, char** argv) {
  std::string tools_dir, work_dir = "acceptance_work";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--tools-dir") tools_dir = argv[i + 1];
    else if (flag == "--work-dir") work_dir = argv[i + 1];
  }

  int failures = 0;
  const auto report = [&](int index, const std::string& name, Check& check, double seconds) {
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", check.ok ? "PASS" : "FAIL", index,
                name.c_str(), check.detail.str().c_str(), seconds);
    std::fflush(stdout);
    if (!check.ok) ++failures;
  };
  const auto timed = [&](int index, const std::string& name,
                         const std::function<void(Check&)>& body) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(index, name, check, seconds);
  };

  const auto model = mvd::reference_model();
  const double ese = mvd::analytic_ese(model);

  // ------------------------------------------------------------------ 1
  timed(1, "wiener exactness", [&](Check& c) {
    const auto start = std::chrono::steady_clock::now();
    c.expect(ese > 1.738 && ese < 1.748, "analytic ese=" + fmt(ese, "%.6f") + " in 1.743+-0.005");
    const auto filter = mvd::build_wiener(model);
    const auto pairs =
        mvd::generate_dataset(model, 100000, mvd::RngStream::master(1001).fork("test"));
    const double emp = mvd::empirical_mse(
        [&](std::span<const double> x) { return mvd::apply(filter, x); }, pairs);
    c.expect(std::abs(emp - ese) <= 0.02,
             "|empirical-analytic|=" + fmt(std::abs(emp - ese)) + " <= 0.02 (n=1e5)");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 10.0, "runtime " + fmt(secs, "%.1f") + "s < 10s");
  });

  // ------------------------------------------------------- sweep for 2-4
  mvd::SweepConfig cfg;
  cfg.depths = {0, 1};
  cfg.Ns = {100, 1000, 10000};
  cfg.etas = {0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1};
  cfg.N_r = 10;
  cfg.r = 3;
  cfg.N_t = 10000;
  cfg.N_v = 10000;
  cfg.epochs = 50;
  cfg.batch_size = 10;
  cfg.master_seed = 20240801;

  std::vector<mvd::RunRecord> records;
  double sweep_seconds = 0.0;
  bool sweep_ok = false;
  std::string sweep_error;
  {
    const auto start = std::chrono::steady_clock::now();
    try {
      records = mvd::run_sweep(cfg);
      sweep_ok = true;
    } catch (const std::exception& e) {
      sweep_error = e.what();
    }
    sweep_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  // ------------------------------------------------------------------ 2
  timed(2, "optimality property", [&](Check& c) {
    c.expect(sweep_ok, sweep_ok ? "per-run Wiener-bound assertion held across the sweep"
                                : "sweep raised: " + sweep_error);
    if (!sweep_ok) return;
    const auto test_set =
        mvd::generate_dataset(model, cfg.N_t, mvd::RngStream::master(cfg.master_seed).fork("test"));
    const auto wiener_stats = mvd::empirical_mse_stats(
        [f = mvd::build_wiener(model)](std::span<const double> x) { return mvd::apply(f, x); },
        test_set);
    double min_test = 1e300;
    for (const auto& r : records)
      if (std::isfinite(r.test_mse)) min_test = std::min(min_test, r.test_mse);
    c.expect(min_test >= ese - 3.0 * wiener_stats.std_error,
             "min trained-net test MSE " + fmt(min_test) + " >= ese - 3SE = " +
                 fmt(ese - 3.0 * wiener_stats.std_error));
    mvd::Rng rng = mvd::RngStream::master(777).fork("maps").rng();
    bool all_above = true;
    for (int trial = 0; trial < 20; ++trial) {
      mvd::CirculantSpec m{std::vector<double>(model.dim())};
      for (auto& v : m.first_row) v = rng.normal() * 0.3;
      const auto stats = mvd::empirical_mse_stats(
          [&](std::span<const double> x) { return mvd::apply_circulant(m, x); }, test_set);
      all_above = all_above && stats.mse >= ese - 3.0 * stats.std_error;
    }
    c.expect(all_above, "20 random circulant estimators stay above ese - 3SE");
  });

  // ------------------------------------------------------------------ 3
  timed(3, "desk-scale score table, linear row", [&](Check& c) {
    c.expect(sweep_ok, "sweep completed");
    if (!sweep_ok) return;
    const double eta100 = mvd::select_learning_rate(records, 0, 100, cfg.r);
    const double s100 = mvd::score(records, 0, 100, cfg.r, eta100);
    const double eta10k = mvd::select_learning_rate(records, 0, 10000, cfg.r);
    const double s10k = mvd::score(records, 0, 10000, cfg.r, eta10k);
    c.expect(s100 >= 1.9 && s100 <= 3.2, "SCORE(k=0, N=100)=" + fmt(s100) + " in [1.9, 3.2]");
    c.expect(s10k >= 1.70 && s10k <= 1.85,
             "SCORE(k=0, N=10000)=" + fmt(s10k) + " in [1.70, 1.85]");
    c.expect(sweep_seconds < 2700.0,
             "sweep runtime " + fmt(sweep_seconds, "%.0f") + "s < 2700s single-core");
  });

  // ------------------------------------------------------------------ 4
  timed(4, "desk-scale CNN trend", [&](Check& c) {
    c.expect(sweep_ok, "sweep completed");
    if (!sweep_ok) return;
    std::vector<double> k1;
    for (std::size_t n : {100u, 1000u, 10000u}) {
      const double eta = mvd::select_learning_rate(records, 1, n, cfg.r);
      k1.push_back(mvd::score(records, 1, n, cfg.r, eta));
    }
    c.expect(k1[0] >= k1[1] && k1[1] >= k1[2],
             "depth-1 scores nonincreasing: " + fmt(k1[0]) + " >= " + fmt(k1[1]) +
                 " >= " + fmt(k1[2]));
    const double eta0 = mvd::select_learning_rate(records, 0, 10000, cfg.r);
    const double s0 = mvd::score(records, 0, 10000, cfg.r, eta0);
    c.expect(k1[2] <= 1.1 * s0,
             "SCORE(k=1, 1e4)=" + fmt(k1[2]) + " <= 1.1 x SCORE(k=0, 1e4)=" + fmt(1.1 * s0));
  });

  // ------------------------------------------------------------------ 5
  timed(5, "gradient suite", [&](Check& c) {
    const auto start = std::chrono::steady_clock::now();
    // Smallest |pre-activation| across the batch: finite differences are
    // only a valid oracle away from the ReLU kink, so draws that sit on it
    // (e.g. a fully dead layer feeding zero-initialized biases) are
    // rejected and redrawn.
    const auto kink_margin = [](const mvd::TinyNet& net,
                                std::span<const mvd::SamplePair1D> batch) {
      double margin = 1e300;
      for (const auto& pair : batch) {
        std::vector<double> z = pair.phi_data;
        for (const auto& layer : net.conv) {
          auto pre = oracle::matvec(oracle::circulant_dense(layer.kernel_first_row), z);
          for (std::size_t j = 0; j < pre.size(); ++j) {
            pre[j] += layer.bias[j];
            margin = std::min(margin, std::abs(pre[j]));
            if (pre[j] < 0.0) pre[j] = 0.0;
          }
          z = std::move(pre);
        }
      }
      return margin;
    };
    double worst = 0.0;
    int rejected = 0;
    for (int depth : {0, 1, 2, 3}) {
      const auto stream = mvd::RngStream::master(5000 + depth);
      int checked = 0;
      for (std::uint64_t draw = 0; checked < 10 && draw < 200; ++draw) {
        mvd::Rng rng = stream.fork(draw).rng();
        const auto net = mvd::init_network(depth, 8, rng);
        std::vector<mvd::SamplePair1D> batch(3);
        for (auto& pair : batch) {
          pair.phi.resize(8);
          pair.phi_data.resize(8);
          for (auto& v : pair.phi) v = rng.normal();
          for (auto& v : pair.phi_data) v = rng.normal();
        }
        if (depth > 0 && kink_margin(net, batch) < 1e-3) {
          ++rejected;
          continue;
        }
        worst = std::max(worst, oracle::gradcheck(net, batch));
        ++checked;
      }
      c.expect(checked == 10, "10 generic-position nets at depth " + std::to_string(depth));
    }
    c.expect(worst < 1e-4, "max finite-difference mismatch " + fmt(worst, "%.2e") +
                               " < 1e-4 over 10 nets x 4 depths at D=8 (" +
                               std::to_string(rejected) + " kink-degenerate draws redrawn)");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 30.0, "runtime " + fmt(secs, "%.1f") + "s < 30s");
  });

  // ------------------------------------------------------------------ 6
  timed(6, "pointflow subpixel accuracy on clean disks", [&](Check& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto master = mvd::RngStream::master(6001);
    const auto flow_stream = master.fork("flow");
    std::vector<double> err_r, err_c;
    std::size_t fails = 0;
    mvd::for_each_disk_sample(
        100, 201, mvd::DegradeConfig{0.0, 0.0}, master.fork("data"),
        [&](std::size_t i, const mvd::DiskSample& sample) {
          mvd::Rng rng = flow_stream.fork(i).rng();
          try {
            const auto est = mvd::estimate_disk(sample.degraded, mvd::PointflowConfig{}, rng);
            err_r.push_back(std::abs(est.radius - sample.params.radius));
            err_c.push_back(std::hypot(est.center.x - sample.params.cx,
                                       est.center.y - sample.params.cy));
          } catch (const mvd::estimation_failure&) {
            ++fails;
          }
        });
    c.expect(fails == 0, "0 failures over 100 clean disks (got " + std::to_string(fails) + ")");
    if (!err_r.empty()) {
      const double med_r = mvd::median(err_r);
      const double med_c = mvd::median(err_c);
      c.expect(med_r < 0.5, "median |r_hat - r| = " + fmt(med_r) + " < 0.5 px");
      c.expect(med_c < 0.5, "median |c_hat - c| = " + fmt(med_c) + " < 0.5 px");
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 300.0, "runtime " + fmt(secs, "%.1f") + "s < 300s");
  });

  // ------------------------------------------------------------------ 7
  timed(7, "pointflow degraded-scale sanity", [&](Check& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto report = mvd::evaluate_pointflow(1000, 201, mvd::DegradeConfig{2.0, 0.1},
                                                mvd::PointflowConfig{}, 7001);
    c.expect(report.mse_r.has_value(),
             "estimates succeeded on " + std::to_string(report.n_images - report.n_failures) +
                 "/1000 images");
    if (report.mse_r) {
      c.expect(*report.mse_r < 2.5, "mse_r=" + fmt(*report.mse_r) + " < 2.5");
      c.expect(*report.mse_c < 4.0, "mse_c=" + fmt(*report.mse_c) + " < 4.0");
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 1800.0, "runtime " + fmt(secs, "%.0f") + "s < 1800s");
  });

  // ------------------------------------------------------------------ 8
  timed(8, "circle-fit exactness", [&](Check& c) {
    const auto start = std::chrono::steady_clock::now();
    mvd::Rng rng = mvd::RngStream::master(8001).rng();
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double r = rng.uniform(1.0, 40.0);
      const double cx = rng.uniform(-50.0, 50.0);
      const double cy = rng.uniform(-50.0, 50.0);
      const auto n = static_cast<std::size_t>(rng.uniform(3.0, 200.0));
      mvd::Contour contour;
      for (std::size_t i = 0; i < n; ++i) {
        // stratified angles keep even tiny samplings well-conditioned
        const double a =
            2.0 * 3.14159265358979323846 * (static_cast<double>(i) + 0.9 * rng.uniform01()) /
            static_cast<double>(n);
        contour.points.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
      }
      const auto fit = mvd::fit_circle_ls(contour);
      worst = std::max({worst, std::abs(fit.center.x - cx), std::abs(fit.center.y - cy),
                        std::abs(fit.radius_from_theta3() - r)});
    }
    c.expect(worst < 1e-9,
             "max center/radius error " + fmt(worst, "%.2e") + " < 1e-9 over 1000 samplings");
    bool threw = false;
    try {
      mvd::Contour line;
      for (int i = 0; i < 10; ++i) line.points.push_back({1.0 * i, 2.0 - 3.0 * i});
      mvd::fit_circle_ls(line);
    } catch (const mvd::degenerate_geometry&) {
      threw = true;
    }
    c.expect(threw, "collinear points raise degenerate_geometry");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < 5.0, "runtime " + fmt(secs, "%.1f") + "s < 5s");
  });

  // ------------------------------------------------------------------ 9
  timed(9, "CLI determinism", [&](Check& c) {
    if (tools_dir.empty()) {
      c.expect(false, "--tools-dir not given");
      return;
    }
    const fs::path work(work_dir);
    fs::remove_all(work);
    fs::create_directories(work);
    const auto tool = [&](const std::string& name) {
      return (fs::path(tools_dir) / name).string();
    };
    const auto in_work = [&](const std::string& name) { return (work / name).string(); };

    fs::create_directories(work / "run1");
    fs::create_directories(work / "run2");
    {
      std::ofstream os(in_work("sweep.json"));
      os << R"({"depths":[0],"Ns":[30],"etas":[0.005,0.05],"N_r":2,"r":1,)"
         << R"("N_t":200,"N_v":200,"epochs":3,"batch_size":10,"master_seed":5})";
    }

    struct Step {
      std::string name;
      std::string cmd_template;  // '%' marks the run tag (1 or 2)
      std::vector<std::string> outputs;
    };
    const std::vector<Step> steps = {
        {"gen1d", tool("gen1d") + " --n 25 --seed 3 --out {W}/ds%.bin > /dev/null", {"ds%.bin"}},
        {"wiener", tool("wiener") + " --empirical 500 --seed 3 > {W}/wiener%.json",
         {"wiener%.json"}},
        // run from per-rerun working directories so the params_path echoed
        // in the JSON is identical
        {"train1d", "cd {W}/run% && " + tool("train1d") +
             " --depth 1 --n 40 --lr 0.005 --seed 4 --epochs 3 --n-val 100 --n-test 100"
             " --params-out params.mvp > train.json",
         {"run%/params.mvp", "run%/train.json"}},
        {"sweep1d", tool("sweep1d") + " --config {W}/sweep.json --out {W}/records%.csv > /dev/null",
         {"records%.csv"}},
        {"table1", tool("table1") + " --records {W}/records1.csv --out {W}/table%.csv > /dev/null",
         {"table%.csv"}},
        {"plot1d", tool("plot1d") + " --records {W}/records1.csv --out {W}/curve%.svg > /dev/null",
         {"curve%.svg"}},
        {"gen2d", tool("gen2d") + " --n 2 --dim 61 --seed 6 --out {W}/disks% > /dev/null",
         {"disks%/img_00000.f64", "disks%/img_00001.f64", "disks%/manifest.json",
          "disks%/img_00000.json"}},
        {"pointflow", tool("pointflow") +
             " --image {W}/disks1/img_00000.f64 --seed 7 --out {W}/contours%.json > /dev/null",
         {"contours%.json"}},
        {"pointflow-estimate", tool("pointflow-estimate") +
             " --image {W}/disks1/img_00000.f64 --seed 7 > {W}/estimate%.json",
         {"estimate%.json"}},
        {"eval2d", tool("eval2d") + " --n 2 --dim 61 --seed 8 --out {W}/report%.json > /dev/null",
         {"report%.json"}},
    };

    auto substitute = [&](std::string s, const std::string& tag) {
      for (std::size_t pos; (pos = s.find('%')) != std::string::npos;) s.replace(pos, 1, tag);
      for (std::size_t pos; (pos = s.find("{W}")) != std::string::npos;)
        s.replace(pos, 3, work.string());
      return s;
    };

    for (const auto& step : steps) {
      bool step_ok = true;
      for (const std::string tag : {"1", "2"}) {
        if (run_cmd(substitute(step.cmd_template, tag)) != 0) step_ok = false;
      }
      for (const auto& out : step.outputs) {
        if (!files_identical(work / substitute(out, "1"), work / substitute(out, "2")))
          step_ok = false;
      }
      c.expect(step_ok, step.name + " byte-identical across reruns");
    }
  });

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures;
}
