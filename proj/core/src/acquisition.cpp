#include "bops/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bops {

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double expected_improvement(double mean, double sd, double incumbent) {
  if (!(sd >= 1e-12)) {
    return 0.0;
  }
  const double gain = incumbent - mean;
  const double z = gain / sd;
  return std::max(0.0, gain * normal_cdf(z) + sd * normal_pdf(z));
}

double expected_improvement(const GpModel& model, const Permutation& p, double incumbent) {
  const Prediction pred = model.predict(p);
  return expected_improvement(pred.mean, std::sqrt(pred.variance), incumbent);
}

QapMatrices build_qap(const Eigen::VectorXd& weights, int d) {
  if (d < 2 || weights.size() != pair_count(d)) {
    throw std::invalid_argument("build_qap: weight vector must have length C(d,2)");
  }
  QapMatrices q;
  q.W = Eigen::MatrixXd::Zero(d, d);
  q.A = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i < j) {
        q.W(i, j) = weights(pair_index(i, j, d));
        q.A(i, j) = 1.0;
      } else if (i > j) {
        q.A(i, j) = -1.0;
      }
    }
  }
  return q;
}

double qap_trace(const QapMatrices& q, const Permutation& p) {
  const int d = q.dimension();
  if (p.size() != d) {
    throw std::invalid_argument("qap_trace: dimension mismatch");
  }
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      total += q.W(i, j) * q.A(p[j], p[i]);
    }
  }
  return total;
}

}  // namespace bops
