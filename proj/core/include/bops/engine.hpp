#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bops/gp.hpp"
#include "bops/optimizers.hpp"
#include "bops/permutation.hpp"
#include "bops/rng.hpp"

namespace bops {

enum class Algorithm { kBopsT, kBopsH, kRandom, kGa };

/// "bops-t", "bops-h", "random", "ga".
std::string to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct BoConfig {
  Algorithm algorithm = Algorithm::kBopsH;
  int d = 0;
  int n_init = 20;
  int n_iters = 1;
  int restarts = 10;
  /// 0 selects the default 10 * C(d,2).
  int max_steps_per_restart = 0;
  std::uint64_t seed = 0;
  int ga_population = 20;
  int ga_offspring = 10;
  /// Floor on the GP noise variance grid.
  double min_noise_variance = 1e-4;
  /// BOPS-H only: number of uniform candidates whose best EI is recorded
  /// next to the selected point's EI. 0 disables the audit.
  int ei_audit_candidates = 0;

  SearchBudget search_budget() const;
  void validate() const;
};

enum class Phase { kInit, kBo };

struct TraceRecord {
  int iteration = 0;
  Phase phase = Phase::kInit;
  Permutation selected;
  double value = 0.0;
  double best_so_far = 0.0;
  double seconds = 0.0;
  /// Acquisition value of the selected point: EI for BOPS-H, the sampled
  /// w^T phi for BOPS-T. NaN otherwise.
  double acquisition = std::numeric_limits<double>::quiet_NaN();
  /// Best EI over the audit candidates (BOPS-H with auditing on). NaN otherwise.
  double audit_best_acquisition = std::numeric_limits<double>::quiet_NaN();
  /// True when the acquisition optimum had already been evaluated.
  bool fallback = false;
};

struct BoTrace {
  BoConfig config;
  std::vector<TraceRecord> records;

  const TraceRecord& best() const;
  std::vector<Permutation> points(std::size_t count) const;
};

using Objective = std::function<double(const Permutation&)>;

struct SelectionEvent {
  int iteration = 0;
  const GpModel* model = nullptr;
  const Eigen::VectorXd* sampled_weights = nullptr;
  const MultiRestartResult* search = nullptr;
  const Permutation* selected = nullptr;
  bool fallback = false;
};

/// Optional injection points for the model-based loops.
struct RunHooks {
  /// Replaces the default multi-restart swap search in BOPS-T.
  const QapSolver* qap_solver = nullptr;
  std::function<void(const SelectionEvent&)> on_select;
};

/// Kendall GP + Thompson sampling solved as a QAP.
BoTrace run_bops_t(const BoConfig& cfg, const Objective& objective, Rng& rng,
                   const RunHooks& hooks = {});
/// Mallows GP + expected improvement maximized by multi-restart local search.
BoTrace run_bops_h(const BoConfig& cfg, const Objective& objective, Rng& rng,
                   const RunHooks& hooks = {});
BoTrace run_random(const BoConfig& cfg, const Objective& objective, Rng& rng);
/// Steady-state GA: binary tournament, order crossover, swap mutation with
/// probability 1/d per child, (population + offspring) truncation.
BoTrace run_ga(const BoConfig& cfg, const Objective& objective, Rng& rng);

/// Dispatches on cfg.algorithm.
BoTrace run_algorithm(const BoConfig& cfg, const Objective& objective, Rng& rng,
                      const RunHooks& hooks = {});

/// Order crossover keeping parent1[lo..hi] (inclusive) in place and filling
/// the rest in parent2's order starting after hi, wrapping around.
Permutation order_crossover(const Permutation& parent1, const Permutation& parent2, int lo, int hi);

/// 1/2 log |I + K / noise_variance| computed from the eigenvalues of K.
/// Throws std::invalid_argument when K is not symmetric PSD (tolerance 1e-8
/// relative to its largest diagonal entry).
double info_gain(const Eigen::MatrixXd& gram, double noise_variance);

/// info_gain over the first `count` selected points of a trace, with the
/// Gram matrix of `spec` (jittered) and its noise variance.
double trace_info_gain(const BoTrace& trace, std::size_t count, const KernelSpec& spec);

/// sum over the first `count` records of (value - f_star); all records when
/// count is nullopt.
double empirical_regret(const BoTrace& trace, double f_star,
                        std::optional<std::size_t> count = std::nullopt);

}  // namespace bops
