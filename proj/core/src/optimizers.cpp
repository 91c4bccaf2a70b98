#include "bops/optimizers.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bops {

SearchBudget SearchBudget::for_dimension(int d, int restarts) {
  SearchBudget b;
  b.restarts = restarts;
  b.max_steps_per_restart = std::max(1, 10 * pair_count(d));
  return b;
}

void SearchBudget::validate() const {
  if (restarts < 1) throw std::invalid_argument("SearchBudget: restarts must be >= 1");
  if (max_steps_per_restart < 1) {
    throw std::invalid_argument("SearchBudget: max_steps_per_restart must be >= 1");
  }
}

SearchResult brute_force_argmin(const PermutationObjective& objective, int d) {
  if (d < 2 || d > kMaxBruteForceDimension) {
    throw std::invalid_argument("brute_force_argmin: dimension must be in [2, 9]");
  }
  std::vector<int> m(static_cast<std::size_t>(d));
  std::iota(m.begin(), m.end(), 0);
  SearchResult best{Permutation(m), objective(Permutation(m))};
  while (std::next_permutation(m.begin(), m.end())) {
    Permutation p(m);
    const double v = objective(p);
    if (v < best.value) {
      best = SearchResult{std::move(p), v};
    }
  }
  return best;
}

LocalSearchResult local_search(const PermutationObjective& objective, const Permutation& start,
                               int max_steps) {
  LocalSearchResult r{start, start, objective(start), 0, false, {}};
  r.trajectory.push_back(r.value);
  const int d = start.size();
  while (r.steps < max_steps) {
    int best_i = -1;
    int best_j = -1;
    double best_value = r.value;
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        const double v = objective(swapped(r.best, i, j));
        if (v < best_value) {
          best_value = v;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i < 0) {
      r.converged = true;
      return r;
    }
    r.best = swapped(r.best, best_i, best_j);
    r.value = best_value;
    r.trajectory.push_back(best_value);
    ++r.steps;
  }
  return r;
}

MultiRestartResult multi_restart_argmin(const PermutationObjective& objective, int d,
                                        const SearchBudget& budget, Rng& rng) {
  budget.validate();
  const std::uint64_t base = rng();
  std::vector<LocalSearchResult> runs;
  runs.reserve(static_cast<std::size_t>(budget.restarts));
  for (int r = 0; r < budget.restarts; ++r) {
    Rng stream = make_stream(base, static_cast<std::uint64_t>(r));
    runs.push_back(local_search(objective, random_permutation(d, stream), budget.max_steps_per_restart));
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].value < runs[best].value) best = r;
  }
  return MultiRestartResult{runs[best].best, runs[best].value, std::move(runs)};
}

MultiRestartResult SwapSearchQapSolver::solve(const QapMatrices& q, Rng& rng) const {
  return multi_restart_argmin([&q](const Permutation& p) { return qap_trace(q, p); },
                              q.dimension(), budget_, rng);
}

MultiRestartResult ExhaustiveQapSolver::solve(const QapMatrices& q, Rng& /*rng*/) const {
  SearchResult r =
      brute_force_argmin([&q](const Permutation& p) { return qap_trace(q, p); }, q.dimension());
  LocalSearchResult as_run{r.best, r.best, r.value, 0, true, {r.value}};
  return MultiRestartResult{r.best, r.value, {std::move(as_run)}};
}

MultiRestartResult solve_ts_qap(const QapMatrices& q, const SearchBudget& budget, Rng& rng) {
  return SwapSearchQapSolver(budget).solve(q, rng);
}

}  // namespace bops
