#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "bops/kernels.hpp"
#include "bops/permutation.hpp"
#include "bops/rng.hpp"

namespace bops {

// ---- QAPLIB -----------------------------------------------------------------

/// Koopmans-Beckmann instance: flow/cost matrix A and distance matrix B.
struct QapInstance {
  int n = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;

  friend bool operator==(const QapInstance& x, const QapInstance& y) {
    return x.n == y.n && x.a == y.a && x.b == y.b;
  }
};

/// Reads n followed by n*n entries of A and n*n entries of B, whitespace
/// delimited with arbitrary line breaks. Throws std::invalid_argument on a
/// truncated stream, a non-numeric token, or n < 2.
QapInstance parse_qaplib(std::istream& in);
std::string serialize_qaplib(const QapInstance& inst);

/// sum_{i,j} A(i, j) * B(p(i), p(j)). Equals Tr(A P B^T P^T) with
/// P = permutation_matrix(p), which is Tr(A P B P^T) for symmetric B.
double qap_objective(const QapInstance& inst, const Permutation& p);

// ---- TSPLIB -----------------------------------------------------------------

struct TspInstance {
  std::string name;
  int n = 0;
  std::vector<std::array<double, 2>> coords;

  friend bool operator==(const TspInstance&, const TspInstance&) = default;
};

/// EUC_2D TSPLIB reader. Node ids are remapped to 0-based order of
/// appearance. `subset` keeps the first k nodes in file order.
/// Throws std::invalid_argument on missing DIMENSION, an edge-weight type
/// other than EUC_2D, or a coordinate count that disagrees with DIMENSION.
TspInstance parse_tsplib(std::istream& in, std::optional<int> subset = std::nullopt);
std::string serialize_tsplib(const TspInstance& inst);

/// TSPLIB nint: floor(x + 0.5).
double tsplib_round(double x);

/// Closed tour visiting coords[p(0)], coords[p(1)], ..., back to coords[p(0)],
/// with each edge rounded to the nearest integer.
double tsp_tour_length(const TspInstance& inst, const Permutation& p);

// ---- Synthetic objectives ----------------------------------------------------

/// Controlled objective with a known minimizer.
/// Without feature weights: scale * n_d(p, target), minimized at target for
/// scale > 0. With feature weights w (length C(d,2)): w^T phi(p), a draw from
/// the Kendall-kernel GP prior when w ~ N(0, I); `target` is then unused.
struct SyntheticObjective {
  Permutation target;
  double scale = 1.0;
  Eigen::VectorXd feature_weights;
  double noise_sd = 0.0;

  int dimension() const { return target.size(); }
  void validate() const;
  /// Noise-free part.
  double deterministic(const Permutation& p) const;
};

/// Deterministic part plus N(0, noise_sd^2) drawn from `rng`.
double synthetic_objective(const SyntheticObjective& s, const Permutation& p, Rng& rng);

/// Hidden-optimum objective with a uniformly random target.
SyntheticObjective make_hidden_optimum(int d, double noise_sd, Rng& rng);

/// Kendall-GP prior draw: feature weights w ~ N(0, I).
SyntheticObjective make_kendall_gp_draw(int d, double noise_sd, Rng& rng);

// ---- Lazy GP prior draw ------------------------------------------------------

/// One sample path of a zero-mean GP over S_d, realized lazily: each new
/// query is drawn from its conditional given every earlier query, so any
/// query order yields a draw from the same joint prior. Repeated queries
/// return the memoized latent value; observation noise (noise_sd) is drawn
/// afresh per call.
class GpPriorSample {
 public:
  GpPriorSample(KernelSpec spec, int d, std::uint64_t seed, double noise_sd = 0.0);

  double operator()(const Permutation& p);
  double latent(const Permutation& p);

  int dimension() const { return d_; }
  std::size_t realized() const { return points_.size(); }

 private:
  KernelSpec spec_;
  int d_;
  double noise_sd_;
  Rng latent_rng_;
  Rng noise_rng_;
  std::vector<Permutation> points_;
  std::vector<Eigen::VectorXd> chol_rows_;
  std::vector<double> whitened_;
  std::vector<double> values_;
  std::unordered_map<Permutation, std::size_t, PermutationHash> index_;
};

}  // namespace bops
