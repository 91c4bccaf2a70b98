#include "bops/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include <Eigen/Eigenvalues>

#include "bops/acquisition.hpp"
#include "bops/kernels.hpp"

namespace bops {

namespace {

using Clock = std::chrono::steady_clock;
using EvaluatedSet = std::unordered_set<Permutation, PermutationHash>;

constexpr std::uint64_t kAuditStream = 0xA0D17ULL;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// |S_d| when it fits comfortably, otherwise nullopt (treated as unbounded).
std::optional<std::size_t> group_order(int d) {
  if (d > 12) return std::nullopt;
  std::size_t f = 1;
  for (int k = 2; k <= d; ++k) f *= static_cast<std::size_t>(k);
  return f;
}

// Shared bookkeeping for every loop: evaluation, best-so-far, timing.
class TraceBuilder {
 public:
  TraceBuilder(const BoConfig& cfg, const Objective& objective) : objective_(objective) {
    trace_.config = cfg;
    trace_.records.reserve(static_cast<std::size_t>(cfg.n_init + cfg.n_iters));
  }

  TraceRecord& evaluate(Permutation p, Phase phase, Clock::time_point started) {
    const int iteration = static_cast<int>(trace_.records.size());
    double value = 0.0;
    try {
      value = objective_(p);
    } catch (const std::exception& e) {
      throw std::runtime_error("objective evaluation failed at iteration " + std::to_string(iteration) +
                               " (" + to_string(p) + "): " + e.what());
    }
    if (!std::isfinite(value)) {
      throw std::runtime_error("objective returned a non-finite value at iteration " +
                               std::to_string(iteration) + " (" + to_string(p) + ")");
    }
    best_ = trace_.records.empty() ? value : std::min(best_, value);
    evaluated_.insert(p);
    xs_.push_back(p);
    ys_.push_back(value);
    trace_.records.push_back(TraceRecord{.iteration = iteration,
                                         .phase = phase,
                                         .selected = std::move(p),
                                         .value = value,
                                         .best_so_far = best_,
                                         .seconds = seconds_since(started)});
    return trace_.records.back();
  }

  void initial_design(int n_init, int d, Rng& rng) {
    for (int i = 0; i < n_init; ++i) {
      const auto started = Clock::now();
      evaluate(random_permutation(d, rng), Phase::kInit, started);
    }
  }

  const EvaluatedSet& evaluated() const { return evaluated_; }
  const std::vector<Permutation>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  double best() const { return best_; }
  BoTrace finish() && { return std::move(trace_); }

 private:
  const Objective& objective_;
  BoTrace trace_;
  EvaluatedSet evaluated_;
  std::vector<Permutation> xs_;
  std::vector<double> ys_;
  double best_ = 0.0;
};

Permutation random_unevaluated(int d, const EvaluatedSet& evaluated, Rng& rng) {
  const auto order = group_order(d);
  if (order && evaluated.size() >= *order) {
    return random_permutation(d, rng);
  }
  for (;;) {
    Permutation p = random_permutation(d, rng);
    if (!evaluated.contains(p)) return p;
  }
}

struct Selection {
  Permutation point;
  bool fallback = false;
};

// Acquisition optimum unless already evaluated; then the best unevaluated
// restart result; then a uniform unevaluated permutation.
Selection select_unevaluated(const MultiRestartResult& search, int d, const EvaluatedSet& evaluated,
                             Rng& rng) {
  if (!evaluated.contains(search.best)) {
    return {search.best, false};
  }
  std::vector<const LocalSearchResult*> ranked;
  for (const auto& r : search.restarts) ranked.push_back(&r);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto* a, const auto* b) { return a->value < b->value; });
  for (const auto* r : ranked) {
    if (!evaluated.contains(r->best)) return {r->best, true};
  }
  return {random_unevaluated(d, evaluated, rng), true};
}

HyperGrid engine_grid(const BoConfig& cfg) {
  HyperGrid grid = HyperGrid::defaults();
  std::vector<double> noise;
  for (double v : grid.noise_variances) {
    noise.push_back(std::max(v, cfg.min_noise_variance));
  }
  noise.erase(std::unique(noise.begin(), noise.end()), noise.end());
  grid.noise_variances = std::move(noise);
  return grid;
}

void require_algorithm(const BoConfig& cfg, Algorithm expected, const char* who) {
  cfg.validate();
  if (cfg.algorithm != expected) {
    throw std::invalid_argument(std::string(who) + ": config names algorithm " + to_string(cfg.algorithm));
  }
}

struct Member {
  Permutation perm;
  double value;
};

const Member& tournament(const std::vector<Member>& pop, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const Member& a = pop[pick(rng)];
  const Member& b = pop[pick(rng)];
  return b.value < a.value ? b : a;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kBopsT: return "bops-t";
    case Algorithm::kBopsH: return "bops-h";
    case Algorithm::kRandom: return "random";
    case Algorithm::kGa: return "ga";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "bops-t") return Algorithm::kBopsT;
  if (name == "bops-h") return Algorithm::kBopsH;
  if (name == "random") return Algorithm::kRandom;
  if (name == "ga") return Algorithm::kGa;
  return std::nullopt;
}

SearchBudget BoConfig::search_budget() const {
  SearchBudget b = SearchBudget::for_dimension(d, restarts);
  if (max_steps_per_restart > 0) b.max_steps_per_restart = max_steps_per_restart;
  return b;
}

void BoConfig::validate() const {
  if (d < 2) throw std::invalid_argument("BoConfig: d must be >= 2");
  if (n_init < 1) throw std::invalid_argument("BoConfig: n_init must be >= 1");
  if (n_iters < 1) throw std::invalid_argument("BoConfig: n_iters must be >= 1");
  if (max_steps_per_restart < 0) throw std::invalid_argument("BoConfig: max_steps_per_restart must be >= 0");
  search_budget().validate();
  if (ga_population < 2) throw std::invalid_argument("BoConfig: ga_population must be >= 2");
  if (ga_offspring < 1) throw std::invalid_argument("BoConfig: ga_offspring must be >= 1");
  if (!(min_noise_variance > 0.0)) throw std::invalid_argument("BoConfig: min_noise_variance must be > 0");
  if (ei_audit_candidates < 0) throw std::invalid_argument("BoConfig: ei_audit_candidates must be >= 0");
}

const TraceRecord& BoTrace::best() const {
  if (records.empty()) throw std::logic_error("BoTrace::best: empty trace");
  return *std::min_element(records.begin(), records.end(),
                           [](const auto& a, const auto& b) { return a.value < b.value; });
}

std::vector<Permutation> BoTrace::points(std::size_t count) const {
  count = std::min(count, records.size());
  std::vector<Permutation> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(records[i].selected);
  return out;
}

BoTrace run_bops_t(const BoConfig& cfg, const Objective& objective, Rng& rng, const RunHooks& hooks) {
  require_algorithm(cfg, Algorithm::kBopsT, "run_bops_t");
  const SwapSearchQapSolver default_solver(cfg.search_budget());
  const QapSolver& solver = hooks.qap_solver ? *hooks.qap_solver : default_solver;
  const HyperGrid grid = engine_grid(cfg);
  const double feature_scale = std::sqrt(static_cast<double>(pair_count(cfg.d)));

  TraceBuilder tb(cfg, objective);
  tb.initial_design(cfg.n_init, cfg.d, rng);
  for (int it = 0; it < cfg.n_iters; ++it) {
    const auto started = Clock::now();
    const GpModel model = fit(KernelSpec{.family = KernelFamily::kKendall}, tb.xs(), tb.ys(), grid);
    const WeightPosterior posterior = weight_posterior(model);
    const Eigen::VectorXd weights = sample_weights(posterior, rng);
    const QapMatrices qap = build_qap(weights, cfg.d);
    const MultiRestartResult search = solver.solve(qap, rng);
    Selection sel = select_unevaluated(search, cfg.d, tb.evaluated(), rng);
    if (hooks.on_select) {
      hooks.on_select(SelectionEvent{static_cast<int>(tb.xs().size()), &model, &weights, &search,
                                     &sel.point, sel.fallback});
    }
    const double acquisition = qap_trace(qap, sel.point) / feature_scale;
    TraceRecord& rec = tb.evaluate(std::move(sel.point), Phase::kBo, started);
    rec.acquisition = acquisition;
    rec.fallback = sel.fallback;
  }
  return std::move(tb).finish();
}

BoTrace run_bops_h(const BoConfig& cfg, const Objective& objective, Rng& rng, const RunHooks& hooks) {
  require_algorithm(cfg, Algorithm::kBopsH, "run_bops_h");
  const SearchBudget budget = cfg.search_budget();
  const HyperGrid grid = engine_grid(cfg);

  TraceBuilder tb(cfg, objective);
  tb.initial_design(cfg.n_init, cfg.d, rng);
  for (int it = 0; it < cfg.n_iters; ++it) {
    const auto started = Clock::now();
    const int iteration = static_cast<int>(tb.xs().size());
    const GpModel model = fit(KernelSpec{.family = KernelFamily::kMallows}, tb.xs(), tb.ys(), grid);
    const double incumbent = tb.best();
    const PermutationObjective negative_ei = [&](const Permutation& p) {
      return -expected_improvement(model, p, incumbent);
    };
    const MultiRestartResult search = multi_restart_argmin(negative_ei, cfg.d, budget, rng);
    Selection sel = select_unevaluated(search, cfg.d, tb.evaluated(), rng);
    if (hooks.on_select) {
      hooks.on_select(SelectionEvent{iteration, &model, nullptr, &search, &sel.point, sel.fallback});
    }
    const double acquisition = expected_improvement(model, sel.point, incumbent);
    double audit = std::numeric_limits<double>::quiet_NaN();
    if (cfg.ei_audit_candidates > 0) {
      // Separate stream so auditing never changes the selection sequence.
      Rng audit_rng = make_stream(cfg.seed ^ kAuditStream, static_cast<std::uint64_t>(iteration));
      audit = 0.0;
      for (int c = 0; c < cfg.ei_audit_candidates; ++c) {
        audit = std::max(audit, expected_improvement(model, random_permutation(cfg.d, audit_rng), incumbent));
      }
    }
    TraceRecord& rec = tb.evaluate(std::move(sel.point), Phase::kBo, started);
    rec.acquisition = acquisition;
    rec.audit_best_acquisition = audit;
    rec.fallback = sel.fallback;
  }
  return std::move(tb).finish();
}

BoTrace run_random(const BoConfig& cfg, const Objective& objective, Rng& rng) {
  require_algorithm(cfg, Algorithm::kRandom, "run_random");
  TraceBuilder tb(cfg, objective);
  tb.initial_design(cfg.n_init, cfg.d, rng);
  for (int it = 0; it < cfg.n_iters; ++it) {
    const auto started = Clock::now();
    tb.evaluate(random_permutation(cfg.d, rng), Phase::kBo, started);
  }
  return std::move(tb).finish();
}

Permutation order_crossover(const Permutation& parent1, const Permutation& parent2, int lo, int hi) {
  const int d = parent1.size();
  if (parent2.size() != d) throw std::invalid_argument("order_crossover: dimension mismatch");
  if (lo < 0 || hi >= d || lo > hi) throw std::invalid_argument("order_crossover: bad segment");
  std::vector<int> child(static_cast<std::size_t>(d), -1);
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  for (int i = lo; i <= hi; ++i) {
    child[static_cast<std::size_t>(i)] = parent1[i];
    used[static_cast<std::size_t>(parent1[i])] = true;
  }
  int write = (hi + 1) % d;
  for (int k = 0; k < d; ++k) {
    const int v = parent2[(hi + 1 + k) % d];
    if (used[static_cast<std::size_t>(v)]) continue;
    child[static_cast<std::size_t>(write)] = v;
    used[static_cast<std::size_t>(v)] = true;
    write = (write + 1) % d;
  }
  return Permutation(std::move(child));
}

BoTrace run_ga(const BoConfig& cfg, const Objective& objective, Rng& rng) {
  require_algorithm(cfg, Algorithm::kGa, "run_ga");
  const int d = cfg.d;
  TraceBuilder tb(cfg, objective);
  tb.initial_design(cfg.n_init, d, rng);

  std::vector<Member> population;
  for (std::size_t i = 0; i < tb.xs().size(); ++i) population.push_back({tb.xs()[i], tb.ys()[i]});
  const auto by_value = [](const Member& a, const Member& b) { return a.value < b.value; };
  std::stable_sort(population.begin(), population.end(), by_value);
  if (population.size() > static_cast<std::size_t>(cfg.ga_population)) {
    population.resize(static_cast<std::size_t>(cfg.ga_population), population.front());
  }

  std::uniform_int_distribution<int> position(0, d - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int remaining = cfg.n_iters;
  while (remaining > 0) {
    const int brood = std::min(cfg.ga_offspring, remaining);
    std::vector<Member> children;
    for (int c = 0; c < brood; ++c) {
      const auto started = Clock::now();
      const Member& p1 = tournament(population, rng);
      const Member& p2 = tournament(population, rng);
      int lo = position(rng);
      int hi = position(rng);
      if (lo > hi) std::swap(lo, hi);
      Permutation child = order_crossover(p1.perm, p2.perm, lo, hi);
      if (unit(rng) < 1.0 / d) {
        const int i = position(rng);
        int j = position(rng);
        while (j == i) j = position(rng);
        child = swapped(child, i, j);
      }
      const TraceRecord& rec = tb.evaluate(std::move(child), Phase::kBo, started);
      children.push_back({rec.selected, rec.value});
    }
    remaining -= brood;
    for (auto& c : children) population.push_back(std::move(c));
    std::stable_sort(population.begin(), population.end(), by_value);
    population.resize(std::min(population.size(), static_cast<std::size_t>(cfg.ga_population)),
                      population.front());
  }
  return std::move(tb).finish();
}

BoTrace run_algorithm(const BoConfig& cfg, const Objective& objective, Rng& rng, const RunHooks& hooks) {
  switch (cfg.algorithm) {
    case Algorithm::kBopsT: return run_bops_t(cfg, objective, rng, hooks);
    case Algorithm::kBopsH: return run_bops_h(cfg, objective, rng, hooks);
    case Algorithm::kRandom: return run_random(cfg, objective, rng);
    case Algorithm::kGa: return run_ga(cfg, objective, rng);
  }
  throw std::invalid_argument("run_algorithm: unknown algorithm");
}

double info_gain(const Eigen::MatrixXd& gram, double noise_variance) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) {
    throw std::invalid_argument("info_gain: Gram matrix must be square and nonempty");
  }
  if (!(noise_variance > 0.0)) throw std::invalid_argument("info_gain: noise_variance must be > 0");
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("info_gain: Gram matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("info_gain: eigendecomposition failed");
  double total = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < -1e-8 * scale) {
      throw std::invalid_argument("info_gain: Gram matrix is not positive semi-definite");
    }
    total += std::log1p(std::max(lambda, 0.0) / noise_variance);
  }
  return 0.5 * total;
}

double trace_info_gain(const BoTrace& trace, std::size_t count, const KernelSpec& spec) {
  const std::vector<Permutation> pts = trace.points(count);
  Eigen::MatrixXd K = gram_matrix(spec, pts);
  add_jitter(spec, K);
  return info_gain(K, spec.noise_variance);
}

double empirical_regret(const BoTrace& trace, double f_star, std::optional<std::size_t> count) {
  const std::size_t n = std::min(count.value_or(trace.records.size()), trace.records.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += trace.records[i].value - f_star;
  return total;
}

}  // namespace bops
