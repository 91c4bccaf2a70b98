#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bops/acquisition.hpp"
#include "bops/permutation.hpp"
#include "bops/rng.hpp"

namespace bops {

using PermutationObjective = std::function<double(const Permutation&)>;

struct SearchBudget {
  int restarts = 10;
  int max_steps_per_restart = 1;

  /// 10 restarts, 10 * C(d,2) steps per restart.
  static SearchBudget for_dimension(int d, int restarts = 10);
  void validate() const;
};

struct SearchResult {
  Permutation best;
  double value;
};

struct LocalSearchResult {
  Permutation start;
  Permutation best;
  double value;
  int steps = 0;
  /// True when stopped because no neighbor strictly improves.
  bool converged = false;
  /// Objective value after each accepted step, starting with the start value.
  std::vector<double> trajectory;
};

struct MultiRestartResult {
  Permutation best;
  double value;
  std::vector<LocalSearchResult> restarts;
};

/// Exhaustive enumeration of S_d in lexicographic order; the first minimum
/// wins. Throws std::invalid_argument for d > 9.
SearchResult brute_force_argmin(const PermutationObjective& objective, int d);

inline constexpr int kMaxBruteForceDimension = 9;

/// Steepest descent over swap_neighbors. Neighbors are scanned in
/// lexicographic pair order and the first strictly best one is taken.
LocalSearchResult local_search(const PermutationObjective& objective, const Permutation& start,
                               int max_steps);

/// local_search from `budget.restarts` uniform random starts. One 64-bit base
/// seed is drawn from `rng`; restart r draws its start from
/// make_stream(base, r), so results do not depend on evaluation order.
MultiRestartResult multi_restart_argmin(const PermutationObjective& objective, int d,
                                        const SearchBudget& budget, Rng& rng);

/// Solver backend for min_P Tr(W P A P^T).
class QapSolver {
 public:
  virtual ~QapSolver() = default;
  virtual MultiRestartResult solve(const QapMatrices& q, Rng& rng) const = 0;
};

/// Multi-restart 2-swap local search with full trace recomputation.
class SwapSearchQapSolver final : public QapSolver {
 public:
  explicit SwapSearchQapSolver(SearchBudget budget) : budget_(budget) {}
  MultiRestartResult solve(const QapMatrices& q, Rng& rng) const override;

 private:
  SearchBudget budget_;
};

/// Enumerates S_d; exact, d <= 9.
class ExhaustiveQapSolver final : public QapSolver {
 public:
  MultiRestartResult solve(const QapMatrices& q, Rng& rng) const override;
};

/// Thompson-sampling QAP solve with the swap-search backend.
MultiRestartResult solve_ts_qap(const QapMatrices& q, const SearchBudget& budget, Rng& rng);

}  // namespace bops
