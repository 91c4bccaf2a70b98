#include "bops/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "bops/gp.hpp"

namespace bops {

namespace {

constexpr std::uint64_t kObjectiveStream = 0x0B1EC7ULL;
constexpr std::uint64_t kNllStream = 0x4E11ULL;

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T parse_scalar(std::string_view text, std::string_view what) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw UsageError("bad value '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

std::map<std::string, std::string> parse_params(std::string_view text, std::string_view scheme) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw UsageError("benchmark " + std::string(scheme) + ": expected key=value, got '" +
                       std::string(item) + "'");
    }
    out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    pos = comma + 1;
  }
  return out;
}

void reject_unknown(const std::map<std::string, std::string>& params,
                    std::initializer_list<std::string_view> allowed, std::string_view scheme) {
  for (const auto& [k, v] : params) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw UsageError("benchmark " + std::string(scheme) + ": unknown parameter '" + k + "'");
    }
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  return in;
}

template <typename Work>
void parallel_for(int count, int jobs, Work&& work) {
  jobs = std::clamp(jobs, 1, std::max(1, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void ensure_ok(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    out.push_back(parse_scalar<int>(text.substr(pos, comma - pos), "integer list"));
    pos = comma + 1;
  }
  return out;
}

Benchmark parse_benchmark(std::string_view uri) {
  const std::size_t colon = uri.find(':');
  if (colon == std::string_view::npos) {
    throw UsageError("benchmark URI must look like scheme:params, got '" + std::string(uri) + "'");
  }
  const std::string_view scheme = uri.substr(0, colon);
  const std::string_view rest = uri.substr(colon + 1);
  Benchmark b;
  b.uri = std::string(uri);

  if (scheme == "synthetic" || scheme == "mallows-gp") {
    const auto params = parse_params(rest, scheme);
    b.kind = scheme == "synthetic" ? Benchmark::Kind::kSynthetic : Benchmark::Kind::kMallowsGp;
    if (b.kind == Benchmark::Kind::kSynthetic) {
      reject_unknown(params, {"d", "noise"}, scheme);
    } else {
      reject_unknown(params, {"d", "noise", "l"}, scheme);
    }
    const auto d = params.find("d");
    if (d == params.end()) throw UsageError("benchmark " + std::string(scheme) + ": missing d=N");
    b.d = parse_scalar<int>(d->second, "d");
    if (b.d < 2) throw UsageError("benchmark " + std::string(scheme) + ": d must be >= 2");
    if (const auto it = params.find("noise"); it != params.end()) {
      b.noise_sd = parse_scalar<double>(it->second, "noise");
      if (!(b.noise_sd >= 0.0)) throw UsageError("noise must be >= 0");
    }
    if (const auto it = params.find("l"); it != params.end()) {
      b.lengthscale = parse_scalar<double>(it->second, "l");
      if (!(b.lengthscale >= 0.0)) throw UsageError("l must be >= 0");
    }
    return b;
  }
  if (scheme == "qaplib") {
    if (rest.empty()) throw UsageError("benchmark qaplib: missing path");
    b.kind = Benchmark::Kind::kQaplib;
    auto in = open_input(std::filesystem::path(rest));
    b.qap = std::make_shared<const QapInstance>(parse_qaplib(in));
    b.d = b.qap->n;
    return b;
  }
  if (scheme == "tsplib") {
    b.kind = Benchmark::Kind::kTsplib;
    std::string_view path = rest;
    std::optional<int> subset;
    if (const std::size_t at = rest.rfind(",subset="); at != std::string_view::npos) {
      path = rest.substr(0, at);
      subset = parse_scalar<int>(rest.substr(at + 8), "subset");
    }
    if (path.empty()) throw UsageError("benchmark tsplib: missing path");
    auto in = open_input(std::filesystem::path(path));
    b.tsp = std::make_shared<const TspInstance>(parse_tsplib(in, subset));
    b.d = b.tsp->n;
    return b;
  }
  throw UsageError("unknown benchmark scheme '" + std::string(scheme) +
                   "' (expected synthetic, qaplib, tsplib or mallows-gp)");
}

Objective Benchmark::make_objective(std::uint64_t seed, int replication) const {
  const std::uint64_t stream_seed = mix_seed(seed ^ kObjectiveStream, static_cast<std::uint64_t>(replication));
  switch (kind) {
    case Kind::kSynthetic: {
      Rng target_rng = make_stream(stream_seed, 0);
      auto objective = std::make_shared<SyntheticObjective>(make_hidden_optimum(d, noise_sd, target_rng));
      auto noise_rng = std::make_shared<Rng>(make_stream(stream_seed, 1));
      return [objective, noise_rng](const Permutation& p) {
        return synthetic_objective(*objective, p, *noise_rng);
      };
    }
    case Kind::kQaplib: {
      auto inst = qap;
      return [inst](const Permutation& p) { return qap_objective(*inst, p); };
    }
    case Kind::kTsplib: {
      auto inst = tsp;
      return [inst](const Permutation& p) { return tsp_tour_length(*inst, p); };
    }
    case Kind::kMallowsGp: {
      const KernelSpec spec{.family = KernelFamily::kMallows, .lengthscale = lengthscale,
                            .signal_variance = 1.0, .noise_variance = 1e-6};
      auto draw = std::make_shared<GpPriorSample>(spec, d, stream_seed, noise_sd);
      return [draw](const Permutation& p) { return (*draw)(p); };
    }
  }
  throw std::logic_error("make_objective: unknown benchmark kind");
}

std::optional<double> Benchmark::known_optimum() const {
  if (kind == Kind::kSynthetic) return 0.0;
  return std::nullopt;
}

std::uint64_t replication_seed(std::uint64_t seed, int rep) {
  return mix_seed(seed, static_cast<std::uint64_t>(rep));
}

ExperimentResult run_experiment(const RunOptions& options) {
  if (options.iters < 1) throw UsageError("--iters must be >= 1");
  if (options.init < 1) throw UsageError("--init must be >= 1");
  if (options.reps < 1) throw UsageError("--reps must be >= 1");
  if (options.restarts < 1) throw UsageError("--restarts must be >= 1");
  const Benchmark bench = parse_benchmark(options.benchmark);

  ExperimentResult result{options, {}};
  std::vector<std::optional<BoTrace>> slots(static_cast<std::size_t>(options.reps));
  parallel_for(options.reps, options.jobs, [&](int rep) {
    BoConfig cfg;
    cfg.algorithm = options.algorithm;
    cfg.d = bench.d;
    cfg.n_init = options.init;
    cfg.n_iters = options.iters;
    cfg.restarts = options.restarts;
    cfg.seed = replication_seed(options.seed, rep);
    Rng rng(cfg.seed);
    const Objective objective = bench.make_objective(options.seed, rep);
    slots[static_cast<std::size_t>(rep)] = run_algorithm(cfg, objective, rng);
  });
  for (auto& s : slots) result.traces.push_back(std::move(*s));
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<BoTrace>& traces) {
  if (traces.empty()) return {};
  std::size_t length = traces.front().records.size();
  for (const auto& t : traces) length = std::min(length, t.records.size());
  std::vector<AggregateRow> rows;
  rows.reserve(length);
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<double> best;
    for (const auto& t : traces) best.push_back(t.records[i].best_so_far);
    const double mean = std::accumulate(best.begin(), best.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : best) ss += (v - mean) * (v - mean);
    const double sd = traces.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    rows.push_back({static_cast<int>(i), mean, sd / std::sqrt(n), median(best)});
  }
  return rows;
}

void write_raw_csv(std::ostream& out, const ExperimentResult& result, bool include_timing) {
  out << "rep,phase,iter,permutation,value,best_so_far";
  if (include_timing) out << ",seconds";
  out << '\n';
  for (std::size_t rep = 0; rep < result.traces.size(); ++rep) {
    for (const auto& r : result.traces[rep].records) {
      out << rep << ',' << (r.phase == Phase::kInit ? "init" : "bo") << ',' << r.iteration << ",\""
          << to_string(r.selected) << "\"," << fmt(r.value) << ',' << fmt(r.best_so_far);
      if (include_timing) out << ',' << fmt(r.seconds);
      out << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "iter,mean_best,stderr_best,median_best\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << fmt(r.mean_best) << ',' << fmt(r.stderr_best) << ',' << fmt(r.median_best)
        << '\n';
  }
}

void write_run_config_json(std::ostream& out, const RunOptions& o) {
  const nlohmann::json j = {
      {"command", "run"},         {"benchmark", o.benchmark}, {"algo", to_string(o.algorithm)},
      {"iters", o.iters},         {"init", o.init},           {"reps", o.reps},
      {"restarts", o.restarts},   {"seed", o.seed},           {"jobs", o.jobs},
  };
  out << j.dump(2) << '\n';
}

RunOutputs write_run_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const std::string prefix = to_string(result.options.algorithm);
  RunOutputs paths{dir / (prefix + "_raw.csv"), dir / (prefix + "_aggregate.csv"),
                   dir / (prefix + "_config.json")};
  const auto write = [](const std::filesystem::path& path, const auto& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    body(out);
    out.flush();
    ensure_ok(out, path);
  };
  write(paths.raw_csv, [&](std::ostream& o) { write_raw_csv(o, result); });
  write(paths.aggregate_csv, [&](std::ostream& o) { write_aggregate_csv(o, aggregate(result.traces)); });
  write(paths.config_json, [&](std::ostream& o) { write_run_config_json(o, result.options); });
  return paths;
}

std::vector<NllRow> run_nll(const NllOptions& options) {
  if (options.train_sizes.empty()) throw UsageError("--train-sizes must not be empty");
  for (int n : options.train_sizes) {
    if (n < 1) throw UsageError("training sizes must be >= 1");
  }
  if (options.reps < 1 || options.test_sets < 1 || options.test_size < 1) {
    throw UsageError("--reps, --test-sets and --test-size must be >= 1");
  }
  const Benchmark bench = parse_benchmark(options.benchmark);
  const int max_train = *std::max_element(options.train_sizes.begin(), options.train_sizes.end());
  const std::size_t per_rep = options.train_sizes.size() * 2;
  std::vector<NllRow> rows(static_cast<std::size_t>(options.reps) * per_rep);

  parallel_for(options.reps, options.jobs, [&](int rep) {
    const Objective objective = bench.make_objective(options.seed, rep);
    Rng rng = make_stream(options.seed ^ kNllStream, static_cast<std::uint64_t>(rep));
    std::vector<Permutation> train_x;
    std::vector<double> train_y;
    for (int i = 0; i < max_train; ++i) {
      train_x.push_back(random_permutation(bench.d, rng));
      train_y.push_back(objective(train_x.back()));
    }
    std::vector<std::vector<Permutation>> test_x(static_cast<std::size_t>(options.test_sets));
    std::vector<std::vector<double>> test_y(static_cast<std::size_t>(options.test_sets));
    for (int s = 0; s < options.test_sets; ++s) {
      for (int i = 0; i < options.test_size; ++i) {
        test_x[static_cast<std::size_t>(s)].push_back(random_permutation(bench.d, rng));
        test_y[static_cast<std::size_t>(s)].push_back(objective(test_x[static_cast<std::size_t>(s)].back()));
      }
    }
    std::size_t slot = static_cast<std::size_t>(rep) * per_rep;
    for (int n : options.train_sizes) {
      const std::vector<Permutation> xs(train_x.begin(), train_x.begin() + n);
      const std::vector<double> ys(train_y.begin(), train_y.begin() + n);
      for (KernelFamily family : {KernelFamily::kKendall, KernelFamily::kMallows}) {
        const GpModel model = fit(KernelSpec{.family = family}, xs, ys);
        std::vector<double> scores;
        for (int s = 0; s < options.test_sets; ++s) {
          scores.push_back(test_nll(model, test_x[static_cast<std::size_t>(s)], test_y[static_cast<std::size_t>(s)]));
        }
        rows[slot++] = NllRow{family, n, rep, median(scores)};
      }
    }
  });
  return rows;
}

void write_nll_csv(std::ostream& out, const std::vector<NllRow>& rows) {
  out << "kernel,train_size,replication,nll\n";
  for (const auto& r : rows) {
    out << to_string(r.kernel) << ',' << r.train_size << ',' << r.replication << ',' << fmt(r.nll) << '\n';
  }
}

void write_nll_config_json(std::ostream& out, const NllOptions& o) {
  const nlohmann::json j = {
      {"command", "nll"},       {"benchmark", o.benchmark}, {"train_sizes", o.train_sizes},
      {"reps", o.reps},         {"test_sets", o.test_sets}, {"test_size", o.test_size},
      {"seed", o.seed},         {"jobs", o.jobs},
  };
  out << j.dump(2) << '\n';
}

SearchResult solve_qap_instance(const QapInstance& inst, bool exact, int restarts, std::uint64_t seed) {
  const PermutationObjective objective = [&inst](const Permutation& p) { return qap_objective(inst, p); };
  if (exact) {
    if (inst.n > kMaxBruteForceDimension) {
      throw UsageError("--exact requires n <= " + std::to_string(kMaxBruteForceDimension));
    }
    return brute_force_argmin(objective, inst.n);
  }
  Rng rng(seed);
  const MultiRestartResult r = multi_restart_argmin(objective, inst.n, SearchBudget::for_dimension(inst.n, restarts), rng);
  return SearchResult{r.best, r.value};
}

}  // namespace bops
