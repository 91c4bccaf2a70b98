#pragma once

#include <span>
#include <string>

#include <Eigen/Core>

#include "bops/permutation.hpp"

namespace bops {

enum class KernelFamily { kKendall, kMallows };

std::string to_string(KernelFamily family);

/// Kernel family plus scalar hyperparameters. `lengthscale` is used by the
/// Mallows family only.
struct KernelSpec {
  KernelFamily family = KernelFamily::kKendall;
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-2;

  /// Throws std::invalid_argument on l < 0, signal <= 0 or noise <= 0.
  void validate() const;

  /// Diagonal stabilizer added before Cholesky factorization.
  double jitter() const { return kRelativeJitter * signal_variance; }

  static constexpr double kRelativeJitter = 1e-6;
};

/// (n_c - n_d) / C(d,2), in [-1, 1].
double kendall_kernel(const Permutation& a, const Permutation& b);

/// exp(-l * n_d), in (0, 1].
double mallows_kernel(const Permutation& a, const Permutation& b, double lengthscale);

/// Unit-variance kernel value as a function of the discordant-pair count.
double kernel_from_discordance(KernelFamily family, double lengthscale, int discordant, int d);

/// signal_variance * k(a, b).
double kernel_value(const KernelSpec& spec, const Permutation& a, const Permutation& b);

/// Pairwise discordant-pair counts; the kernel-independent part of a Gram matrix.
Eigen::MatrixXi discordance_matrix(std::span<const Permutation> points);

/// K(i, j) = signal_variance * k(x_i, x_j). No jitter is applied.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Permutation> points);
Eigen::MatrixXd gram_from_discordance(const KernelSpec& spec, const Eigen::MatrixXi& discordance,
                                      int d);

/// Adds spec.jitter() to the diagonal.
void add_jitter(const KernelSpec& spec, Eigen::MatrixXd& gram);

/// k_* vector between the training points and a query.
Eigen::VectorXd cross_kernel(const KernelSpec& spec, std::span<const Permutation> points,
                             const Permutation& query);

}  // namespace bops
