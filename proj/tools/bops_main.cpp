// bops: Bayesian optimization over permutation spaces, experiment runner.
//
//   bops run --benchmark synthetic:d=6 --algo bops-h --iters 80 --out results/
//   bops nll --benchmark mallows-gp:d=10 --train-sizes 20,40,60 --out results/
//   bops solve-qap data/qap15.dat [--exact]

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bops/experiment.hpp"
#include "bops/permutation.hpp"
#include "bops/problems.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int cmd_run(const bops::RunOptions& options, const std::filesystem::path& out) {
  const bops::ExperimentResult result = bops::run_experiment(options);
  const bops::RunOutputs paths = bops::write_run_outputs(result, out);
  std::cout << "wrote " << paths.raw_csv.string() << "\n"
            << "wrote " << paths.aggregate_csv.string() << "\n"
            << "wrote " << paths.config_json.string() << "\n";
  return kExitOk;
}

int cmd_nll(const bops::NllOptions& options, const std::filesystem::path& out) {
  const auto rows = bops::run_nll(options);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw bops::IoError("cannot create output directory '" + out.string() + "'");
  const auto csv_path = out / "nll.csv";
  const auto json_path = out / "nll_config.json";
  std::ofstream csv(csv_path);
  std::ofstream json(json_path);
  if (!csv || !json) throw bops::IoError("cannot open output files in '" + out.string() + "'");
  bops::write_nll_csv(csv, rows);
  bops::write_nll_config_json(json, options);
  if (!csv.flush() || !json.flush()) throw bops::IoError("failed writing output files");
  std::cout << "wrote " << csv_path.string() << "\n" << "wrote " << json_path.string() << "\n";
  return kExitOk;
}

int cmd_solve_qap(const std::filesystem::path& path, bool exact, int restarts, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw bops::IoError("cannot open '" + path.string() + "'");
  const bops::QapInstance inst = bops::parse_qaplib(in);
  const bops::SearchResult r = bops::solve_qap_instance(inst, exact, restarts, seed);
  std::cout << bops::to_string(r.best) << " " << r.value << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization over permutation spaces"};
  app.require_subcommand(1);

  bops::RunOptions run;
  std::string run_algo;
  std::filesystem::path run_out = "results";
  auto* run_cmd = app.add_subcommand("run", "Run seeded replications of one algorithm on a benchmark");
  run_cmd->add_option("--benchmark", run.benchmark,
                      "synthetic:d=N[,noise=S] | qaplib:PATH | tsplib:PATH[,subset=K] | mallows-gp:d=N[,l=L][,noise=S]")
      ->required();
  run_cmd->add_option("--algo", run_algo, "bops-t | bops-h | random | ga")->required();
  run_cmd->add_option("--iters", run.iters, "Evaluations after the initial design")->required();
  run_cmd->add_option("--init", run.init, "Initial random permutations")->capture_default_str();
  run_cmd->add_option("--reps", run.reps, "Replications")->capture_default_str();
  run_cmd->add_option("--restarts", run.restarts, "Local-search restarts")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Master seed")->capture_default_str();
  run_cmd->add_option("--jobs", run.jobs, "Replications run in parallel")->capture_default_str();
  run_cmd->add_option("--out", run_out, "Output directory")->capture_default_str();

  bops::NllOptions nll;
  std::string nll_sizes = "20,40,60";
  std::filesystem::path nll_out = "results";
  auto* nll_cmd = app.add_subcommand("nll", "Held-out NLL of Kendall vs Mallows GP surrogates");
  nll_cmd->add_option("--benchmark", nll.benchmark, "Benchmark URI (see run)")->required();
  nll_cmd->add_option("--train-sizes", nll_sizes, "Comma-separated training sizes")->capture_default_str();
  nll_cmd->add_option("--reps", nll.reps, "Training-set replications")->capture_default_str();
  nll_cmd->add_option("--test-sets", nll.test_sets, "Test sets per replication")->capture_default_str();
  nll_cmd->add_option("--test-size", nll.test_size, "Permutations per test set")->capture_default_str();
  nll_cmd->add_option("--seed", nll.seed, "Master seed")->capture_default_str();
  nll_cmd->add_option("--jobs", nll.jobs, "Replications run in parallel")->capture_default_str();
  nll_cmd->add_option("--out", nll_out, "Output directory")->capture_default_str();

  std::filesystem::path qap_path;
  bool qap_exact = false;
  int qap_restarts = 10;
  std::uint64_t qap_seed = 0;
  auto* qap_cmd = app.add_subcommand("solve-qap", "Minimize a QAPLIB instance");
  qap_cmd->add_option("file", qap_path, "QAPLIB instance")->required();
  qap_cmd->add_flag("--exact", qap_exact, "Brute force (n <= 9)");
  qap_cmd->add_option("--restarts", qap_restarts, "Local-search restarts")->capture_default_str();
  qap_cmd->add_option("--seed", qap_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) {
      const auto algo = bops::parse_algorithm(run_algo);
      if (!algo) throw bops::UsageError("unknown algorithm '" + run_algo + "'");
      run.algorithm = *algo;
      return cmd_run(run, run_out);
    }
    if (*nll_cmd) {
      nll.train_sizes = bops::parse_int_list(nll_sizes);
      return cmd_nll(nll, nll_out);
    }
    return cmd_solve_qap(qap_path, qap_exact, qap_restarts, qap_seed);
  } catch (const bops::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
