#pragma once

#include <Eigen/Core>

#include "bops/gp.hpp"
#include "bops/permutation.hpp"

namespace bops {

/// Expected improvement below `incumbent` (minimization) for a Gaussian
/// predictive N(mean, sd^2). Returns 0 when sd < 1e-12.
double expected_improvement(double mean, double sd, double incumbent);

/// EI under the model's latent posterior at p.
double expected_improvement(const GpModel& model, const Permutation& p, double incumbent);

/// Thompson-sampling objective w^T phi(p) as a quadratic assignment problem
/// min_P Tr(W P A P^T).
struct QapMatrices {
  /// Strictly upper triangular; W(i, j) = w[pair_index(i, j, d)] for i < j.
  Eigen::MatrixXd W;
  /// A(i, j) = sign(j - i).
  Eigen::MatrixXd A;

  int dimension() const { return static_cast<int>(W.rows()); }
};

/// Throws std::invalid_argument unless weights.size() == C(d,2).
QapMatrices build_qap(const Eigen::VectorXd& weights, int d);

/// Tr(W P A P^T) with P = permutation_matrix(p), evaluated in O(d^2) as
/// sum_{i,j} W(i, j) A(p(j), p(i)). Equals sqrt(C(d,2)) * w^T phi(p).
double qap_trace(const QapMatrices& q, const Permutation& p);

}  // namespace bops
