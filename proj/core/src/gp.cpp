#include "bops/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>

namespace bops {

namespace {

constexpr double kMaxRelativeJitter = 1e-2;
constexpr double kMinStd = 1e-12;

struct Standardized {
  Eigen::VectorXd y;
  double mean = 0.0;
  double std = 1.0;
};

Standardized standardize(const std::vector<double>& ys, Standardize mode) {
  Standardized out;
  const auto n = static_cast<Eigen::Index>(ys.size());
  out.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  if (mode == Standardize::kNo) {
    return out;
  }
  out.mean = out.y.mean();
  const double var = (out.y.array() - out.mean).square().mean();
  out.std = std::sqrt(var);
  if (!(out.std > kMinStd) || !std::isfinite(out.std)) {
    out.std = 1.0;
  }
  out.y = (out.y.array() - out.mean) / out.std;
  return out;
}

struct Factorization {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

std::optional<Factorization> try_factorize(const Eigen::MatrixXd& gram, const KernelSpec& spec) {
  for (double jitter = spec.jitter(); jitter <= kMaxRelativeJitter * spec.signal_variance * (1 + 1e-9);
       jitter *= 10.0) {
    Eigen::MatrixXd m = gram;
    m.diagonal().array() += spec.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
      return Factorization{llt.matrixL(), jitter};
    }
  }
  return std::nullopt;
}

double nlml_from(const Eigen::MatrixXd& lower, const Eigen::VectorXd& y) {
  const Eigen::VectorXd v = lower.triangularView<Eigen::Lower>().solve(y);
  const double log_det_half = lower.diagonal().array().log().sum();
  return 0.5 * v.squaredNorm() + log_det_half +
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

void check_training_set(const std::vector<Permutation>& xs, const std::vector<double>& ys) {
  if (xs.empty()) {
    throw std::invalid_argument("gp: at least one observation is required");
  }
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("gp: xs and ys differ in length");
  }
  for (const auto& p : xs) {
    if (p.size() != xs.front().size()) {
      throw std::invalid_argument("gp: dimension mismatch in training inputs");
    }
  }
  for (double y : ys) {
    if (!std::isfinite(y)) {
      throw std::invalid_argument("gp: non-finite observation");
    }
  }
}

}  // namespace

HyperGrid HyperGrid::defaults() {
  HyperGrid g;
  g.signal_variances = {0.25, 0.5, 1.0, 2.0, 4.0};
  g.noise_variances = {1e-4, 1e-3, 1e-2, 1e-1};
  constexpr int kLengthscales = 16;
  const double lo = std::log(1e-2);
  const double hi = std::log(10.0);
  for (int i = 0; i < kLengthscales; ++i) {
    g.lengthscales.push_back(std::exp(lo + (hi - lo) * i / (kLengthscales - 1)));
  }
  return g;
}

GpModel GpModel::condition(const KernelSpec& spec, std::vector<Permutation> xs,
                           std::vector<double> ys, Standardize standardize_mode) {
  spec.validate();
  check_training_set(xs, ys);
  const Standardized s = standardize(ys, standardize_mode);
  const Eigen::MatrixXd gram = gram_matrix(spec, xs);
  auto fac = try_factorize(gram, spec);
  if (!fac) {
    throw std::runtime_error("gp: Cholesky factorization failed after jitter escalation");
  }

  GpModel m;
  m.spec_ = spec;
  m.train_x_ = std::move(xs);
  m.train_y_ = std::move(ys);
  m.y_standardized_ = s.y;
  m.y_mean_ = s.mean;
  m.y_std_ = s.std;
  m.chol_ = std::move(fac->lower);
  m.jitter_ = fac->jitter;
  const Eigen::VectorXd v = m.chol_.triangularView<Eigen::Lower>().solve(m.y_standardized_);
  m.alpha_ = m.chol_.transpose().triangularView<Eigen::Upper>().solve(v);
  return m;
}

Prediction GpModel::predict_standardized(const Permutation& p) const {
  if (p.size() != dimension()) {
    throw std::invalid_argument("gp predict: dimension mismatch");
  }
  const Eigen::VectorXd ks = cross_kernel(spec_, train_x_, p);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  Prediction out;
  out.mean = ks.dot(alpha_);
  out.variance = std::max(0.0, spec_.signal_variance - v.squaredNorm());
  return out;
}

Prediction GpModel::predict(const Permutation& p, bool include_noise) const {
  Prediction s = predict_standardized(p);
  Prediction out;
  out.mean = s.mean * y_std_ + y_mean_;
  out.variance = s.variance * y_std_ * y_std_;
  if (include_noise) {
    out.variance += spec_.noise_variance * y_std_ * y_std_;
  }
  return out;
}

double GpModel::nlml() const { return nlml_from(chol_, y_standardized_); }

GpModel fit(const KernelSpec& spec_template, std::vector<Permutation> xs, std::vector<double> ys,
            const HyperGrid& grid) {
  check_training_set(xs, ys);
  if (grid.signal_variances.empty() || grid.noise_variances.empty()) {
    throw std::invalid_argument("fit: empty hyperparameter grid");
  }
  const bool mallows = spec_template.family == KernelFamily::kMallows;
  if (mallows && grid.lengthscales.empty()) {
    throw std::invalid_argument("fit: Mallows kernel needs at least one lengthscale");
  }
  const Standardized s = standardize(ys, Standardize::kYes);
  const Eigen::MatrixXi discordance = discordance_matrix(xs);
  const int d = xs.front().size();

  const std::vector<double> lengthscales =
      mallows ? grid.lengthscales : std::vector<double>{spec_template.lengthscale};

  std::optional<KernelSpec> best;
  double best_nlml = std::numeric_limits<double>::infinity();
  for (double l : lengthscales) {
    KernelSpec unit = spec_template;
    unit.lengthscale = l;
    unit.signal_variance = 1.0;
    const Eigen::MatrixXd unit_gram = gram_from_discordance(unit, discordance, d);
    for (double sv : grid.signal_variances) {
      for (double noise : grid.noise_variances) {
        KernelSpec candidate = unit;
        candidate.signal_variance = sv;
        candidate.noise_variance = noise;
        candidate.validate();
        const auto fac = try_factorize(unit_gram * sv, candidate);
        if (!fac) continue;
        const double value = nlml_from(fac->lower, s.y);
        if (value < best_nlml) {
          best_nlml = value;
          best = candidate;
        }
      }
    }
  }
  if (!best) {
    throw std::runtime_error("fit: no grid point admitted a Cholesky factorization");
  }
  return GpModel::condition(*best, std::move(xs), std::move(ys), Standardize::kYes);
}

double gaussian_nll(double y, double mean, double variance) {
  const double r = y - mean;
  return 0.5 * std::log(2.0 * std::numbers::pi * variance) + 0.5 * r * r / variance;
}

double test_nll(const GpModel& model, std::span<const Permutation> test_xs,
                std::span<const double> test_ys) {
  if (test_xs.empty()) {
    throw std::invalid_argument("test_nll: empty test set");
  }
  if (test_xs.size() != test_ys.size()) {
    throw std::invalid_argument("test_nll: xs and ys differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < test_xs.size(); ++i) {
    const Prediction pred = model.predict(test_xs[i], /*include_noise=*/true);
    total += gaussian_nll(test_ys[i], pred.mean, pred.variance);
  }
  return total / static_cast<double>(test_xs.size());
}

WeightPosterior WeightPosterior::prior(int d, double signal_variance) {
  const int dim = pair_count(d);
  WeightPosterior wp;
  wp.d = d;
  wp.mean = Eigen::VectorXd::Zero(dim);
  wp.cov_factor = Eigen::MatrixXd::Identity(dim, dim) * std::sqrt(signal_variance);
  return wp;
}

WeightPosterior weight_posterior(const GpModel& model) {
  if (model.spec().family != KernelFamily::kKendall) {
    throw std::invalid_argument(
        "weight_posterior: only the Kendall kernel has a finite feature map; the Mallows "
        "feature space is exponentially large");
  }
  const int d = model.dimension();
  const int dim = pair_count(d);
  const auto n = static_cast<Eigen::Index>(model.size());
  const double noise = model.effective_noise();
  const double sv = model.spec().signal_variance;

  Eigen::MatrixXd phi(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phi.col(i) = kendall_feature_map(model.train_x()[static_cast<std::size_t>(i)]);
  }
  Eigen::MatrixXd precision = phi * phi.transpose() / noise;
  precision.diagonal().array() += 1.0 / sv;

  Eigen::LLT<Eigen::MatrixXd> prec_llt(precision);
  if (prec_llt.info() != Eigen::Success) {
    throw std::runtime_error("weight_posterior: posterior precision is not positive definite");
  }
  Eigen::MatrixXd cov = prec_llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  cov = 0.5 * (cov + cov.transpose()).eval();

  WeightPosterior wp;
  wp.d = d;
  wp.mean = cov * (phi * model.standardized_y()) / noise;
  Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
  if (cov_llt.info() != Eigen::Success) {
    throw std::runtime_error("weight_posterior: posterior covariance is not positive definite");
  }
  wp.cov_factor = cov_llt.matrixL();
  return wp;
}

Eigen::VectorXd sample_weights(const WeightPosterior& posterior, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(posterior.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = normal(rng);
  }
  return posterior.mean + posterior.cov_factor.triangularView<Eigen::Lower>() * z;
}

}  // namespace bops
