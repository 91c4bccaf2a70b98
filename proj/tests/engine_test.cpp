#include "bops/engine.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "bops/problems.hpp"
#include "oracles.hpp"

namespace bops {
namespace {

constexpr Algorithm kAll[] = {Algorithm::kBopsT, Algorithm::kBopsH, Algorithm::kRandom, Algorithm::kGa};

BoConfig config(Algorithm algo, int d, int n_init, int n_iters, std::uint64_t seed = 1) {
  BoConfig cfg;
  cfg.algorithm = algo;
  cfg.d = d;
  cfg.n_init = n_init;
  cfg.n_iters = n_iters;
  cfg.seed = seed;
  cfg.restarts = 3;
  return cfg;
}

Objective distance_objective(const Permutation& target, int* calls = nullptr) {
  return [target, calls](const Permutation& p) {
    if (calls) ++*calls;
    return double(discordant_pairs(p, target));
  };
}

void expect_valid_trace(const BoTrace& t, const BoConfig& cfg) {
  ASSERT_EQ(t.records.size(), std::size_t(cfg.n_init + cfg.n_iters));
  double best = INFINITY;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const TraceRecord& r = t.records[i];
    EXPECT_EQ(r.iteration, int(i));
    EXPECT_EQ(r.phase, int(i) < cfg.n_init ? Phase::kInit : Phase::kBo);
    EXPECT_EQ(r.selected.size(), cfg.d);
    // Permutation's constructor validates bijectivity; rebuild to re-check.
    EXPECT_NO_THROW(Permutation(oracle::to_vec(r.selected)));
    best = std::min(best, r.value);
    EXPECT_EQ(r.best_so_far, best);
    EXPECT_GE(r.seconds, 0.0);
  }
}

TEST(Names, RoundTrip) {
  for (Algorithm a : kAll) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_FALSE(parse_algorithm("nonsense"));
}

TEST(BoConfig, Validation) {
  EXPECT_NO_THROW(config(Algorithm::kRandom, 5, 1, 1).validate());
  EXPECT_THROW(config(Algorithm::kRandom, 5, 0, 1).validate(), std::invalid_argument);
  EXPECT_THROW(config(Algorithm::kRandom, 5, 1, 0).validate(), std::invalid_argument);
  EXPECT_THROW(config(Algorithm::kRandom, 1, 1, 1).validate(), std::invalid_argument);
  BoConfig c = config(Algorithm::kGa, 5, 1, 1);
  c.ga_population = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(config(Algorithm::kBopsH, 6, 1, 1).search_budget().max_steps_per_restart, 150);
  BoConfig wrong = config(Algorithm::kRandom, 5, 2, 2);
  Rng rng(0);
  EXPECT_THROW(run_bops_t(wrong, distance_objective(Permutation::identity(5)), rng), std::invalid_argument);
}

TEST(Trace, ContractAndEvaluationCount) {
  Rng target_rng(51);
  const Permutation target = random_permutation(6, target_rng);
  for (Algorithm a : kAll) {
    for (int n_iters : {1, 7}) {
      const BoConfig cfg = config(a, 6, 5, n_iters);
      int calls = 0;
      Rng rng(cfg.seed);
      const BoTrace t = run_algorithm(cfg, distance_objective(target, &calls), rng);
      SCOPED_TRACE(to_string(a));
      expect_valid_trace(t, cfg);
      EXPECT_EQ(calls, cfg.n_init + cfg.n_iters);
      EXPECT_EQ(t.config.algorithm, a);
    }
  }
}

TEST(Trace, SharedInitialDesign) {
  const Objective f = distance_objective(Permutation::identity(7));
  std::vector<std::vector<Permutation>> inits;
  for (Algorithm a : kAll) {
    Rng rng(77);
    inits.push_back(run_algorithm(config(a, 7, 6, 2), f, rng).points(6));
  }
  for (const auto& init : inits) EXPECT_EQ(init, inits.front());
}

TEST(Trace, Determinism) {
  Rng target_rng(52);
  const Objective f = distance_objective(random_permutation(7, target_rng));
  for (Algorithm a : kAll) {
    const BoConfig cfg = config(a, 7, 5, 6, 123);
    Rng r1(cfg.seed), r2(cfg.seed);
    const BoTrace t1 = run_algorithm(cfg, f, r1);
    const BoTrace t2 = run_algorithm(cfg, f, r2);
    ASSERT_EQ(t1.records.size(), t2.records.size());
    for (std::size_t i = 0; i < t1.records.size(); ++i) {
      EXPECT_EQ(t1.records[i].selected, t2.records[i].selected);
      EXPECT_EQ(t1.records[i].value, t2.records[i].value);
      // NaN-aware bitwise comparison of the acquisition column.
      EXPECT_EQ(std::isnan(t1.records[i].acquisition), std::isnan(t2.records[i].acquisition));
      if (!std::isnan(t1.records[i].acquisition)) EXPECT_EQ(t1.records[i].acquisition, t2.records[i].acquisition);
    }
  }
}

TEST(Trace, ModelBasedLoopsAvoidDuplicates) {
  Rng target_rng(53);
  const Objective f = distance_objective(random_permutation(5, target_rng));
  for (Algorithm a : {Algorithm::kBopsT, Algorithm::kBopsH}) {
    const BoConfig cfg = config(a, 5, 4, 25);
    Rng rng(9);
    const BoTrace t = run_algorithm(cfg, f, rng);
    std::set<Permutation> bo_points;
    std::set<Permutation> seen;
    for (const auto& r : t.records) {
      if (r.phase == Phase::kBo) EXPECT_FALSE(seen.contains(r.selected)) << to_string(a);
      seen.insert(r.selected);
    }
  }
}

TEST(Trace, ObjectiveErrorsCarryIteration) {
  const BoConfig cfg = config(Algorithm::kRandom, 4, 2, 5);
  int calls = 0;
  const Objective failing = [&calls](const Permutation&) -> double {
    if (++calls == 4) throw std::runtime_error("sensor offline");
    return 1.0;
  };
  Rng rng(1);
  try {
    run_random(cfg, failing, rng);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("sensor offline"), std::string::npos);
  }
  Rng rng2(1);
  EXPECT_THROW(run_random(cfg, [](const Permutation&) { return std::nan(""); }, rng2), std::runtime_error);
}

TEST(BopsT, ExhaustiveBackendSelectsExactArgmin) {
  Rng target_rng(54);
  for (int d = 3; d <= 6; ++d) {
    const Objective f = distance_objective(random_permutation(d, target_rng));
    const ExhaustiveQapSolver exact;
    int checked = 0;
    RunHooks hooks;
    hooks.qap_solver = &exact;
    hooks.on_select = [&](const SelectionEvent& ev) {
      ASSERT_NE(ev.sampled_weights, nullptr);
      const Eigen::VectorXd& w = *ev.sampled_weights;
      double best = INFINITY;
      for (const auto& m : oracle::all_mappings(d)) best = std::min(best, w.dot(oracle::features(m)));
      EXPECT_NEAR(w.dot(oracle::features(oracle::to_vec(ev.search->best))), best, 1e-10);
      if (!ev.fallback) {
        EXPECT_EQ(*ev.selected, ev.search->best);
      }
      ++checked;
    };
    const BoConfig cfg = config(Algorithm::kBopsT, d, 3, 8);
    Rng rng(d);
    const BoTrace t = run_bops_t(cfg, f, rng, hooks);
    EXPECT_EQ(checked, 8);
    for (const auto& r : t.records)
      if (r.phase == Phase::kBo) EXPECT_TRUE(std::isfinite(r.acquisition));
  }
}

TEST(BopsH, SelectedEiBeatsRandomAudit) {
  Rng target_rng(55);
  const Objective f = distance_objective(random_permutation(6, target_rng));
  BoConfig cfg = config(Algorithm::kBopsH, 6, 10, 10);
  cfg.restarts = 10;
  cfg.ei_audit_candidates = 100;
  Rng rng(3);
  const BoTrace audited = run_bops_h(cfg, f, rng);
  for (const auto& r : audited.records) {
    if (r.phase != Phase::kBo || r.fallback) continue;
    EXPECT_GE(r.acquisition, r.audit_best_acquisition - 1e-12) << r.iteration;
  }
  // Auditing never perturbs the selection sequence.
  BoConfig plain = cfg;
  plain.ei_audit_candidates = 0;
  Rng rng2(3);
  const BoTrace unaudited = run_bops_h(plain, f, rng2);
  for (std::size_t i = 0; i < audited.records.size(); ++i)
    EXPECT_EQ(audited.records[i].selected, unaudited.records[i].selected);
}

TEST(BopsH, SelectionMaximizesEiAmongLocalOptima) {
  Rng target_rng(56);
  const Objective f = distance_objective(random_permutation(5, target_rng));
  RunHooks hooks;
  hooks.on_select = [&](const SelectionEvent& ev) {
    double incumbent = INFINITY;
    for (double y : ev.model->train_y()) incumbent = std::min(incumbent, y);
    for (const auto& run : ev.search->restarts) {
      EXPECT_GE(-ev.search->value, -run.value);
      for (const auto& nb : swap_neighbors(run.best))
        EXPECT_LE(expected_improvement(*ev.model, nb, incumbent), -run.value + 1e-15);
    }
  };
  Rng rng(4);
  run_bops_h(config(Algorithm::kBopsH, 5, 5, 5), f, rng, hooks);
}

TEST(Ga, OrderCrossover) {
  const Permutation p1({0, 1, 2, 3, 4, 5, 6, 7});
  const Permutation p2({7, 6, 5, 4, 3, 2, 1, 0});
  const Permutation child = order_crossover(p1, p2, 2, 4);
  // Segment from parent 1 stays; remaining values follow parent 2 from after
  // position 4, wrapping: 2,1,0,7,6,5,4,3 minus {2,3,4} -> 1,0,7,6,5,
  // written from position 5 onward, also wrapping.
  EXPECT_EQ(child, Permutation({6, 5, 2, 3, 4, 1, 0, 7}));
  Rng rng(57);
  for (int t = 0; t < 500; ++t) {
    const int d = 2 + t % 9;
    const Permutation a = random_permutation(d, rng), b = random_permutation(d, rng);
    std::uniform_int_distribution<int> pos(0, d - 1);
    int lo = pos(rng), hi = pos(rng);
    if (lo > hi) std::swap(lo, hi);
    const Permutation c = order_crossover(a, b, lo, hi);
    for (int i = lo; i <= hi; ++i) EXPECT_EQ(c[i], a[i]);
  }
  EXPECT_EQ(order_crossover(p1, p2, 0, 7), p1);
  EXPECT_THROW(order_crossover(p1, p2, 3, 2), std::invalid_argument);
  EXPECT_THROW(order_crossover(p1, Permutation::identity(5), 0, 1), std::invalid_argument);
}

TEST(Ga, ImprovesOnItsInitialPopulation) {
  Rng target_rng(58);
  const Permutation target = random_permutation(8, target_rng);
  int improved = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(s);
    BoConfig cfg = config(Algorithm::kGa, 8, 20, 200, s);
    const BoTrace t = run_ga(cfg, distance_objective(target), rng);
    if (t.records.back().best_so_far < t.records[19].best_so_far) ++improved;
  }
  EXPECT_GE(improved, 8);
}

TEST(InfoGain, ScalarAndEigenvalueForm) {
  EXPECT_NEAR(info_gain(Eigen::MatrixXd::Ones(1, 1), 1.0), 0.5 * std::numbers::ln2, 1e-15);
  EXPECT_NEAR(info_gain(Eigen::MatrixXd::Ones(1, 1), 1.0), 0.34657, 1e-5);
  Rng rng(59);
  for (int n : {2, 10, 30}) {
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i) B.col(i) = oracle::gaussian_vector(n, rng);
    const Eigen::MatrixXd K = B * B.transpose();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) + K / 0.3;
    EXPECT_NEAR(info_gain(K, 0.3), 0.5 * oracle::log_det_lu(M), 1e-8);
    EXPECT_GE(info_gain(K, 0.3), 0.0);
  }
}

TEST(InfoGain, Errors) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.1, 1;
  EXPECT_THROW(info_gain(asym, 1.0), std::invalid_argument);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(info_gain(indefinite, 1.0), std::invalid_argument);
  EXPECT_THROW(info_gain(Eigen::MatrixXd::Identity(2, 2), 0.0), std::invalid_argument);
  EXPECT_THROW(info_gain(Eigen::MatrixXd(0, 0), 1.0), std::invalid_argument);
}

TEST(InfoGain, SchurIdentityOnKendallFeatures) {
  Rng rng(60);
  for (int n : {1, 5, 20, 40}) {
    const int d = 4 + n % 7;
    const int c = pair_count(d);
    Eigen::MatrixXd Phi(c, n);
    for (int i = 0; i < n; ++i) Phi.col(i) = oracle::features(oracle::to_vec(random_permutation(d, rng)));
    const double s2 = 0.01;
    const double small = oracle::log_det_lu(Eigen::MatrixXd::Identity(n, n) + Phi.transpose() * Phi / s2);
    const double big = oracle::log_det_lu(Eigen::MatrixXd::Identity(c, c) + Phi * Phi.transpose() / s2);
    EXPECT_NEAR(small, big, 1e-8);
    EXPECT_NEAR(2 * info_gain(Phi.transpose() * Phi, s2), big, 1e-8);
  }
}

TEST(Regret, Definitions) {
  BoTrace t;
  for (double v : {3.0, 1.0, 1.0, 2.0}) t.records.push_back(TraceRecord{.selected = Permutation::identity(3), .value = v});
  EXPECT_EQ(empirical_regret(t, 1.0), 2.0 + 0 + 0 + 1.0);
  EXPECT_EQ(empirical_regret(t, 1.0, 2), 2.0);
  EXPECT_EQ(empirical_regret(t, 1.0, 100), 3.0);

  const BoConfig cfg = config(Algorithm::kRandom, 5, 3, 10);
  Rng rng(1);
  const BoTrace flat = run_random(cfg, [](const Permutation&) { return 4.0; }, rng);
  EXPECT_EQ(empirical_regret(flat, 4.0), 0.0);
}

TEST(Regret, NonnegativeAgainstTrueOptimum) {
  Rng target_rng(61);
  const Permutation target = random_permutation(6, target_rng);
  const Objective f = distance_objective(target);
  const double f_star = brute_force_argmin(f, 6).value;
  for (Algorithm a : kAll) {
    Rng rng(5);
    const BoTrace t = run_algorithm(config(a, 6, 5, 10), f, rng);
    for (std::size_t k = 1; k <= t.records.size(); ++k) EXPECT_GE(empirical_regret(t, f_star, k), 0.0);
  }
}

TEST(InfoGain, TraceHelperMatchesDirectGram) {
  Rng rng(62);
  const BoConfig cfg = config(Algorithm::kRandom, 6, 5, 10);
  const BoTrace t = run_random(cfg, [](const Permutation&) { return 0.0; }, rng);
  const KernelSpec spec{.family = KernelFamily::kKendall, .noise_variance = 0.1};
  const auto pts = t.points(12);
  Eigen::MatrixXd K(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      K(i, j) = oracle::features(oracle::to_vec(pts[size_t(i)])).dot(oracle::features(oracle::to_vec(pts[size_t(j)])));
  K.diagonal().array() += spec.jitter();
  EXPECT_NEAR(trace_info_gain(t, 12, spec), 0.5 * oracle::log_det_lu(Eigen::MatrixXd::Identity(12, 12) + K / 0.1), 1e-9);
}

}  // namespace
}  // namespace bops
