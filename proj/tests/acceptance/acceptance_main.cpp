// Acceptance runner. Each criterion prints one PASS/FAIL line with a short
// measurement summary; the exit status is nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "bops/acquisition.hpp"
#include "bops/engine.hpp"
#include "bops/experiment.hpp"
#include "bops/gp.hpp"
#include "bops/kernels.hpp"
#include "bops/optimizers.hpp"
#include "bops/problems.hpp"
#include "../oracles.hpp"

namespace {

using namespace bops;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// ---- 1 ---------------------------------------------------------------------

Outcome kernel_trick() {
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 3 + t % 10;
    const Permutation a = random_permutation(d, rng), b = random_permutation(d, rng);
    const int nd = oracle::discordant(oracle::to_vec(a), oracle::to_vec(b));
    const double c = d * (d - 1) / 2.0;
    const double expected = ((c - nd) - nd) / c;
    worst = std::max(worst, std::abs(kendall_feature_map(a).dot(kendall_feature_map(b)) - expected));
    worst = std::max(worst, std::abs(kendall_kernel(a, b) - expected));
  }
  return {worst <= 1e-12, "max error " + fmt(worst) + " over 1000 pairs"};
}

// ---- 2 ---------------------------------------------------------------------

Outcome ts_qap_equivalence() {
  Rng rng(1002);
  int mismatches = 0;
  double worst = 0.0;
  for (int d = 2; d <= 6; ++d) {
    const double root_c = std::sqrt(d * (d - 1) / 2.0);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd w = oracle::gaussian_vector(d * (d - 1) / 2, rng);
      const Eigen::MatrixXd W = oracle::weight_matrix(w, d);
      const Eigen::MatrixXd A = oracle::sign_matrix(d);
      double best_tr = INFINITY, best_lin = INFINITY;
      std::vector<int> arg_tr, arg_lin;
      for (const auto& m : oracle::all_mappings(d)) {
        const Eigen::MatrixXd P = oracle::perm_matrix(m);
        const double tr = (W * P * A * P.transpose()).trace();
        const double lin = w.dot(oracle::features(m));
        worst = std::max(worst, std::abs(tr - root_c * lin));
        worst = std::max(worst, std::abs(qap_trace(build_qap(w, d), Permutation(m)) - tr));
        if (tr < best_tr) best_tr = tr, arg_tr = m;
        if (lin < best_lin) best_lin = lin, arg_lin = m;
      }
      if (arg_tr != arg_lin) ++mismatches;
    }
  }
  return {mismatches == 0 && worst <= 1e-10,
          std::to_string(mismatches) + " argmin mismatches in 100 instances, max value error " + fmt(worst)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome weight_function_agreement() {
  Rng rng(1003);
  double worst_mean = 0.0, worst_var = 0.0;
  int cases = 0;
  for (int n : {1, 10, 25, 40}) {
    for (int d : {3, 6, 10}) {
      std::vector<Permutation> xs;
      std::vector<double> ys;
      std::normal_distribution<double> normal;
      for (int i = 0; i < n; ++i) xs.push_back(random_permutation(d, rng)), ys.push_back(normal(rng));
      const GpModel model = fit(KernelSpec{.family = KernelFamily::kKendall}, xs, ys);
      const WeightPosterior wp = weight_posterior(model);
      const Eigen::MatrixXd cov = wp.cov_factor * wp.cov_factor.transpose();
      for (int q = 0; q < 100; ++q) {
        const Permutation p = random_permutation(d, rng);
        const Eigen::VectorXd phi = oracle::features(oracle::to_vec(p));
        const Prediction f = model.predict_standardized(p);
        worst_mean = std::max(worst_mean, std::abs(phi.dot(wp.mean) - f.mean));
        worst_var = std::max(worst_var, std::abs(phi.dot(cov * phi) - f.variance));
      }
      ++cases;
    }
  }
  return {worst_mean <= 1e-8 && worst_var <= 1e-8,
          std::to_string(cases) + " models x 100 queries, max |dmean| " + fmt(worst_mean) + ", max |dvar| " +
              fmt(worst_var)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome psd_safety() {
  Rng rng(1004);
  std::vector<Permutation> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(random_permutation(10, rng));
  double lowest = INFINITY;
  std::vector<KernelSpec> specs{{.family = KernelFamily::kKendall}};
  for (double l : {0.01, 0.1, 1.0, 10.0}) specs.push_back({.family = KernelFamily::kMallows, .lengthscale = l});
  for (const auto& spec : specs) {
    Eigen::MatrixXd K = gram_matrix(spec, xs);
    add_jitter(spec, K);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, eig.eigenvalues().minCoeff());
  }
  return {lowest >= -1e-8, "minimum eigenvalue " + fmt(lowest) + " over 5 kernels"};
}

// ---- 5 ---------------------------------------------------------------------

Outcome schur_identity() {
  Rng rng(1005);
  double worst = 0.0;
  for (int n = 1; n <= 40; n += 3) {
    const int d = 3 + n % 8;
    const int c = d * (d - 1) / 2;
    Eigen::MatrixXd Phi(c, n);
    for (int i = 0; i < n; ++i) Phi.col(i) = oracle::features(oracle::to_vec(random_permutation(d, rng)));
    for (double s2 : {1e-3, 0.1, 1.0}) {
      const double small = oracle::log_det_lu(Eigen::MatrixXd::Identity(n, n) + Phi.transpose() * Phi / s2);
      const double big = oracle::log_det_lu(Eigen::MatrixXd::Identity(c, c) + Phi * Phi.transpose() / s2);
      worst = std::max(worst, std::abs(small - big));
      worst = std::max(worst, std::abs(2 * info_gain(Phi.transpose() * Phi, s2) - big));
    }
  }
  return {worst <= 1e-8, "max |log-det difference| " + fmt(worst)};
}

// ---- 6 ---------------------------------------------------------------------

Outcome local_optimality() {
  Rng rng(1006);
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = 3 + t % 8;
    PermutationObjective f;
    if (t % 2 == 0) {
      const Eigen::VectorXd w = oracle::gaussian_vector(d * (d - 1) / 2, rng);
      f = [w](const Permutation& p) { return w.dot(oracle::features(oracle::to_vec(p))); };
    } else {
      Eigen::MatrixXd a = Eigen::MatrixXd::Random(d, d), b = Eigen::MatrixXd::Random(d, d);
      f = [a, b](const Permutation& p) {
        const Eigen::MatrixXd P = oracle::perm_matrix(oracle::to_vec(p));
        return (a * P * b.transpose() * P.transpose()).trace();
      };
    }
    const LocalSearchResult r = local_search(f, random_permutation(d, rng), SearchBudget::for_dimension(d).max_steps_per_restart);
    const double v = f(r.best);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        std::vector<int> m = oracle::to_vec(r.best);
        std::swap(m[size_t(i)], m[size_t(j)]);
        if (f(Permutation(m)) < v) ++violations;
      }
  }
  return {violations == 0, std::to_string(violations) + " improving neighbors across 100 local optima"};
}

// ---- 7 and the regret half of 9 share these runs ----------------------------

struct SyntheticRuns {
  std::map<Algorithm, ExperimentResult> results;
};

const SyntheticRuns& synthetic_runs() {
  static const SyntheticRuns runs = [] {
    SyntheticRuns r;
    for (Algorithm a : {Algorithm::kBopsH, Algorithm::kBopsT, Algorithm::kRandom, Algorithm::kGa}) {
      RunOptions o;
      o.benchmark = "synthetic:d=6";
      o.algorithm = a;
      o.iters = 80;
      o.init = 20;
      o.reps = 20;
      o.seed = 2021;
      r.results.emplace(a, run_experiment(o));
    }
    return r;
  }();
  return runs;
}

double median_final_best(const ExperimentResult& r) {
  std::vector<double> v;
  for (const auto& t : r.traces) v.push_back(t.records.back().best_so_far);
  return median(v);
}

Outcome synthetic_ordering() {
  const auto& runs = synthetic_runs().results;
  const double h = median_final_best(runs.at(Algorithm::kBopsH));
  const double t = median_final_best(runs.at(Algorithm::kBopsT));
  const double r = median_final_best(runs.at(Algorithm::kRandom));
  const double g = median_final_best(runs.at(Algorithm::kGa));
  return {h <= t && t <= r && h <= g,
          "median final best: bops-h " + fmt(h) + ", bops-t " + fmt(t) + ", random " + fmt(r) + ", ga " + fmt(g)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome nll_ordering() {
  NllOptions o;
  o.benchmark = "mallows-gp:d=10";
  o.train_sizes = {20, 40, 60};
  o.reps = 10;
  o.test_sets = 10;
  o.test_size = 50;
  o.seed = 2022;
  const auto rows = run_nll(o);
  std::map<int, double> kendall, mallows;
  for (const auto& row : rows) {
    if (row.train_size != 60) continue;
    (row.kernel == KernelFamily::kKendall ? kendall : mallows)[row.replication] = row.nll;
  }
  int wins = 0;
  for (int rep = 0; rep < 10; ++rep) wins += mallows.at(rep) <= kendall.at(rep);
  std::vector<double> kv, mv;
  for (int rep = 0; rep < 10; ++rep) kv.push_back(kendall.at(rep)), mv.push_back(mallows.at(rep));
  return {wins >= 8, "Mallows <= Kendall in " + std::to_string(wins) + "/10 replications at n=60 (medians " +
                         fmt(median(mv)) + " vs " + fmt(median(kv)) + ")"};
}

// ---- 9 ---------------------------------------------------------------------

Outcome sublinearity() {
  const KernelSpec gain_spec{.family = KernelFamily::kKendall, .signal_variance = 1.0, .noise_variance = 1e-2};
  std::vector<double> g50, g200;
  for (std::uint64_t s = 0; s < 5; ++s) {
    BoConfig cfg;
    cfg.algorithm = Algorithm::kBopsT;
    cfg.d = 10;
    cfg.n_init = 20;
    cfg.n_iters = 180;
    cfg.seed = replication_seed(9009, int(s));
    const Objective f = parse_benchmark("synthetic:d=10").make_objective(9009, int(s));
    Rng rng(cfg.seed);
    const BoTrace trace = run_bops_t(cfg, f, rng);
    g50.push_back(trace_info_gain(trace, 50, gain_spec) / 50);
    g200.push_back(trace_info_gain(trace, 200, gain_spec) / 200);
  }
  const double m50 = median(g50), m200 = median(g200);

  // Regret per step on the d=6 runs shared with the ordering criterion. The
  // gate is on BOPS-T; BOPS-H is reported alongside for reference.
  const auto regret_ratio = [](const ExperimentResult& r, std::size_t t) {
    std::vector<double> v;
    for (const auto& trace : r.traces) v.push_back(empirical_regret(trace, 0.0, t) / double(t));
    return median(v);
  };
  const auto& runs = synthetic_runs().results;
  const double t25 = regret_ratio(runs.at(Algorithm::kBopsT), 25), t100 = regret_ratio(runs.at(Algorithm::kBopsT), 100);
  const double h25 = regret_ratio(runs.at(Algorithm::kBopsH), 25), h100 = regret_ratio(runs.at(Algorithm::kBopsH), 100);
  return {m200 < m50 && t100 < t25, "bops-t median gain/T " + fmt(m50) + " (T=50) -> " + fmt(m200) +
                                        " (T=200); bops-t median regret/T " + fmt(t25) + " (T=25) -> " + fmt(t100) +
                                        " (T=100); bops-h regret/T " + fmt(h25) + " -> " + fmt(h100)};
}

// ---- 10 --------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BOPS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the trailing seconds column of every raw CSV line.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("bops_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  int compared = 0, differing = 0, failed = 0;
  const std::vector<std::string> invocations{
      "--benchmark synthetic:d=6,noise=0.1 --algo bops-h --iters 10 --init 10 --reps 3 --seed 17 --jobs 2",
      "--benchmark synthetic:d=7 --algo bops-t --iters 15 --init 10 --reps 3 --seed 18",
      "--benchmark synthetic:d=6 --algo random --iters 20 --reps 4 --seed 19",
      "--benchmark synthetic:d=6 --algo ga --iters 30 --reps 4 --seed 20 --jobs 3",
      std::string("--benchmark tsplib:") + BOPS_DATA_DIR + "/pcb12.tsp,subset=10 --algo bops-t --iters 5 --init 10 --reps 2 --seed 21",
  };
  for (std::size_t i = 0; i < invocations.size(); ++i) {
    const fs::path a = root / std::to_string(i) / "a", b = root / std::to_string(i) / "b";
    if (run_cli("run " + invocations[i] + " --out '" + a.string() + "'") != 0 ||
        run_cli("run " + invocations[i] + " --out '" + b.string() + "'") != 0) {
      ++failed;
      continue;
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      std::string x = read_file(a / name), y = read_file(b / name);
      if (name.ends_with("_raw.csv")) x = without_timing(x), y = without_timing(y);
      ++compared;
      differing += x != y;
    }
  }
  fs::remove_all(root);
  return {failed == 0 && differing == 0 && compared == 3 * int(invocations.size()),
          std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ, " +
              std::to_string(failed) + " failed invocations"};
}

// ---- 11 --------------------------------------------------------------------

Outcome parser_round_trips() {
  int failures = 0;
  {
    std::ifstream in(std::string(BOPS_DATA_DIR) + "/qap15.dat");
    const QapInstance inst = parse_qaplib(in);
    std::istringstream again(serialize_qaplib(inst));
    failures += !(parse_qaplib(again) == inst);
  }
  {
    std::ifstream in(std::string(BOPS_DATA_DIR) + "/pcb12.tsp");
    const TspInstance inst = parse_tsplib(in);
    std::istringstream again(serialize_tsplib(inst));
    failures += !(parse_tsplib(again) == inst);
  }
  Rng rng(1011);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int n = 2; n <= 5; ++n) {
    for (int t = 0; t < 25; ++t) {
      QapInstance inst{n, Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inst.a(i, j) = u(rng), inst.b(i, j) = u(rng);
      for (const auto& m : oracle::all_mappings(n)) {
        const Eigen::MatrixXd P = oracle::perm_matrix(m);
        const double dense = (inst.a * P * inst.b.transpose() * P.transpose()).trace();
        worst = std::max(worst, std::abs(qap_objective(inst, Permutation(m)) - dense));
      }
    }
  }
  return {failures == 0 && worst <= 1e-10,
          std::to_string(failures) + " round-trip failures, max objective error " + fmt(worst)};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Outcome()> check;
    double time_limit = INFINITY;  // seconds
  };
  const std::vector<Criterion> criteria{
      {"kernel trick equivalence", kernel_trick, 5.0},
      {"Thompson sample as QAP", ts_qap_equivalence, 60.0},
      {"weight-space vs function-space posterior", weight_function_agreement},
      {"PSD after jitter", psd_safety},
      {"Schur identity in info gain", schur_identity},
      {"local search optimality", local_optimality},
      {"synthetic ordering (d=6)", synthetic_ordering, 15 * 60.0},
      {"surrogate NLL ordering (Mallows-GP data)", nll_ordering, 10 * 60.0},
      {"sublinearity diagnostics", sublinearity},
      {"CLI determinism", determinism},
      {"parser round trips", parser_round_trips},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && secs > criteria[i].time_limit) {
      o.pass = false;
      o.detail += "; exceeded the " + fmt(criteria[i].time_limit) + "s limit";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << i + 1 << ". " << criteria[i].name << " -- "
              << o.detail << " [" << std::fixed << std::setprecision(1) << secs << "s]" << std::defaultfloat
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
