#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bops/kernels.hpp"
#include "bops/permutation.hpp"
#include "bops/rng.hpp"

namespace bops {

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

enum class Standardize { kYes, kNo };

/// Candidate hyperparameters for maximum-marginal-likelihood selection.
/// `lengthscales` is consulted for the Mallows family only.
struct HyperGrid {
  std::vector<double> signal_variances;
  std::vector<double> noise_variances;
  std::vector<double> lengthscales;

  /// signal {0.25, 0.5, 1, 2, 4}; noise {1e-4, 1e-3, 1e-2, 1e-1};
  /// lengthscale: 16 log-spaced points in [1e-2, 10].
  static HyperGrid defaults();
};

/// Exact GP regression over permutations with zero prior mean on
/// standardized targets. Immutable after construction.
///
/// The factored matrix is K + (noise + jitter) I where jitter starts at
/// spec.jitter() and escalates x10 up to 1e-2 * signal_variance on Cholesky
/// failure; beyond that construction throws std::runtime_error.
class GpModel {
 public:
  /// Conditions on (xs, ys) with the hyperparameters in `spec` as given.
  static GpModel condition(const KernelSpec& spec, std::vector<Permutation> xs,
                           std::vector<double> ys, Standardize standardize = Standardize::kYes);

  const KernelSpec& spec() const { return spec_; }
  int dimension() const { return train_x_.front().size(); }
  std::size_t size() const { return train_x_.size(); }
  std::span<const Permutation> train_x() const { return train_x_; }
  const std::vector<double>& train_y() const { return train_y_; }
  const Eigen::VectorXd& standardized_y() const { return y_standardized_; }
  double y_mean() const { return y_mean_; }
  double y_std() const { return y_std_; }

  /// Lower Cholesky factor of the regularized Gram matrix.
  const Eigen::MatrixXd& chol() const { return chol_; }
  /// (K + (noise + jitter) I)^-1 y_standardized.
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double applied_jitter() const { return jitter_; }
  /// Total diagonal regularizer: noise_variance + applied jitter.
  double effective_noise() const { return spec_.noise_variance + jitter_; }

  /// Posterior of the latent function in original units. Observation noise
  /// (noise_variance * y_std^2) is added only when `include_noise` is set.
  Prediction predict(const Permutation& p, bool include_noise = false) const;
  /// Latent posterior in standardized units.
  Prediction predict_standardized(const Permutation& p) const;

  /// Negative log marginal likelihood of the standardized targets.
  double nlml() const;

 private:
  GpModel() = default;

  KernelSpec spec_;
  std::vector<Permutation> train_x_;
  std::vector<double> train_y_;
  Eigen::VectorXd y_standardized_;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Selects hyperparameters by exhaustive grid search on NLML (first minimum
/// in grid order wins) and returns the conditioned model. `spec_template`
/// supplies the kernel family. Deterministic.
GpModel fit(const KernelSpec& spec_template, std::vector<Permutation> xs, std::vector<double> ys,
            const HyperGrid& grid = HyperGrid::defaults());

/// -log N(y | mean, variance).
double gaussian_nll(double y, double mean, double variance);

/// Mean predictive NLL over a held-out set, observation noise included.
double test_nll(const GpModel& model, std::span<const Permutation> test_xs,
                std::span<const double> test_ys);

/// Gaussian posterior over the C(d,2) Kendall feature weights.
struct WeightPosterior {
  int d = 0;
  Eigen::VectorXd mean;
  /// Lower Cholesky factor of the posterior covariance.
  Eigen::MatrixXd cov_factor;

  static WeightPosterior prior(int d, double signal_variance);
};

/// Weight-space view of a Kendall-kernel model: prior w ~ N(0, s I), likelihood
/// y = Phi^T w + eps with eps ~ N(0, model.effective_noise()). Throws
/// std::invalid_argument for non-Kendall models.
WeightPosterior weight_posterior(const GpModel& model);

/// mean + cov_factor * z, z ~ N(0, I).
Eigen::VectorXd sample_weights(const WeightPosterior& posterior, Rng& rng);

}  // namespace bops
