#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bops/engine.hpp"
#include "bops/kernels.hpp"
#include "bops/problems.hpp"

namespace bops {

/// Bad flags, unknown benchmark or algorithm. Maps to exit status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable input or unwritable output. Maps to exit status 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parsed benchmark URI:
///   synthetic:d=N[,noise=S]          hidden-optimum objective, target drawn per replication
///   qaplib:PATH                      QAPLIB instance
///   tsplib:PATH[,subset=K]           EUC_2D TSPLIB instance, first K nodes
///   mallows-gp:d=N[,l=L][,noise=S]   lazily realized Mallows-kernel GP prior draw
struct Benchmark {
  enum class Kind { kSynthetic, kQaplib, kTsplib, kMallowsGp };

  Kind kind = Kind::kSynthetic;
  std::string uri;
  int d = 0;
  double noise_sd = 0.0;
  double lengthscale = 0.2;
  std::shared_ptr<const QapInstance> qap;
  std::shared_ptr<const TspInstance> tsp;

  /// Objective for one replication. Replications of the same (seed, rep) see
  /// the same function regardless of algorithm.
  Objective make_objective(std::uint64_t seed, int replication) const;
  /// Global minimum value when known without search (synthetic only).
  std::optional<double> known_optimum() const;
};

/// Throws UsageError on a malformed URI, IoError when a file cannot be read,
/// std::invalid_argument when a file does not parse.
Benchmark parse_benchmark(std::string_view uri);

std::vector<int> parse_int_list(std::string_view text);

struct RunOptions {
  std::string benchmark;
  Algorithm algorithm = Algorithm::kBopsH;
  int iters = 0;
  int init = 20;
  int reps = 20;
  int restarts = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct ExperimentResult {
  RunOptions options;
  std::vector<BoTrace> traces;
};

/// Seed of replication `rep` under the master seed.
std::uint64_t replication_seed(std::uint64_t seed, int rep);

/// Runs options.reps independent replications, up to options.jobs at a time.
/// Output is independent of options.jobs.
ExperimentResult run_experiment(const RunOptions& options);

struct AggregateRow {
  int iter = 0;
  double mean_best = 0.0;
  double stderr_best = 0.0;
  double median_best = 0.0;
};

/// Per-iteration mean, standard error (sample sd / sqrt(reps)) and median of
/// best_so_far across replications.
std::vector<AggregateRow> aggregate(const std::vector<BoTrace>& traces);

/// Columns: rep,phase,iter,permutation,value,best_so_far,seconds. The
/// permutation field is quoted. `include_timing` = false drops the seconds column.
void write_raw_csv(std::ostream& out, const ExperimentResult& result, bool include_timing = true);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_run_config_json(std::ostream& out, const RunOptions& options);

struct RunOutputs {
  std::filesystem::path raw_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path config_json;
};

/// Writes <algo>_raw.csv, <algo>_aggregate.csv and <algo>_config.json into `dir`.
RunOutputs write_run_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct NllOptions {
  std::string benchmark;
  std::vector<int> train_sizes{20, 40, 60};
  int reps = 10;
  int test_sets = 10;
  int test_size = 50;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct NllRow {
  KernelFamily kernel = KernelFamily::kKendall;
  int train_size = 0;
  int replication = 0;
  /// Median over test sets of the mean predictive NLL.
  double nll = 0.0;
};

/// For each replication draws one training set (nested prefixes give the
/// smaller sizes) and `test_sets` test sets, fits Kendall and Mallows GPs and
/// scores each on every test set. Rows are ordered by (replication,
/// train_size, kernel).
std::vector<NllRow> run_nll(const NllOptions& options);
void write_nll_csv(std::ostream& out, const std::vector<NllRow>& rows);
void write_nll_config_json(std::ostream& out, const NllOptions& options);

/// Multi-restart swap search, or brute force when `exact` (n <= 9).
SearchResult solve_qap_instance(const QapInstance& inst, bool exact, int restarts, std::uint64_t seed);

double median(std::vector<double> values);

}  // namespace bops
