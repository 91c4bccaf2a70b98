#include "bops/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace bops {

namespace {

int common_dimension(std::span<const Permutation> points) {
  if (points.empty()) {
    throw std::invalid_argument("gram_matrix: empty point list");
  }
  const int d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d) {
      throw std::invalid_argument("gram_matrix: dimension mismatch within point list");
    }
  }
  return d;
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::kKendall ? "kendall" : "mallows";
}

void KernelSpec::validate() const {
  if (!(lengthscale >= 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("KernelSpec: lengthscale must be finite and >= 0");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw std::invalid_argument("KernelSpec: signal_variance must be > 0");
  }
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("KernelSpec: noise_variance must be > 0");
  }
}

double kendall_kernel(const Permutation& a, const Permutation& b) {
  const int nd = discordant_pairs(a, b);
  const int pairs = pair_count(a.size());
  return static_cast<double>(pairs - 2 * nd) / pairs;
}

double mallows_kernel(const Permutation& a, const Permutation& b, double lengthscale) {
  if (lengthscale < 0.0) {
    throw std::invalid_argument("mallows_kernel: lengthscale must be >= 0");
  }
  return std::exp(-lengthscale * discordant_pairs(a, b));
}

double kernel_from_discordance(KernelFamily family, double lengthscale, int discordant, int d) {
  if (family == KernelFamily::kKendall) {
    const int pairs = pair_count(d);
    return static_cast<double>(pairs - 2 * discordant) / pairs;
  }
  return std::exp(-lengthscale * discordant);
}

double kernel_value(const KernelSpec& spec, const Permutation& a, const Permutation& b) {
  return spec.signal_variance *
         kernel_from_discordance(spec.family, spec.lengthscale, discordant_pairs(a, b), a.size());
}

Eigen::MatrixXi discordance_matrix(std::span<const Permutation> points) {
  common_dimension(points);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXi D = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      D(i, j) = D(j, i) = discordant_pairs(points[static_cast<std::size_t>(i)],
                                           points[static_cast<std::size_t>(j)]);
    }
  }
  return D;
}

Eigen::MatrixXd gram_from_discordance(const KernelSpec& spec, const Eigen::MatrixXi& discordance,
                                      int d) {
  const Eigen::Index n = discordance.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = spec.signal_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      K(i, j) = K(j, i) = spec.signal_variance * kernel_from_discordance(spec.family, spec.lengthscale,
                                                                         discordance(i, j), d);
    }
  }
  return K;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Permutation> points) {
  spec.validate();
  const int d = common_dimension(points);
  return gram_from_discordance(spec, discordance_matrix(points), d);
}

void add_jitter(const KernelSpec& spec, Eigen::MatrixXd& gram) {
  gram.diagonal().array() += spec.jitter();
}

Eigen::VectorXd cross_kernel(const KernelSpec& spec, std::span<const Permutation> points,
                             const Permutation& query) {
  Eigen::VectorXd k(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    k(static_cast<Eigen::Index>(i)) = kernel_value(spec, points[i], query);
  }
  return k;
}

}  // namespace bops
