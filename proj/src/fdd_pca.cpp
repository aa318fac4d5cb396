/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cecbench/error.hpp"
#include "cecbench/fdd.hpp"

namespace cecbench::fdd {

namespace {

Eigen::VectorXd to_vector(const ProcessSample& s) {
  return Eigen::Map<const Eigen::VectorXd>(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
}

Eigen::VectorXd standardize(const PcaModel& model, const ProcessSample& sample) {
  detail::require(sample.values.size() == model.dimension(), "sample",
                  "dimension " + std::to_string(sample.values.size()) + " does not match the model (" +
                      std::to_string(model.dimension()) + ")");
  return (to_vector(sample) - model.mean).cwiseQuotient(model.scale);
}

}  // namespace

double t2_control_limit(std::size_t k, std::size_t n, double alpha) {
  detail::require(k >= 1 && n > k, "n_train", "needs more samples than components");
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const boost::math::fisher_f_distribution<double> f(kd, nd - kd);
  return kd * (nd * nd - 1.0) / (nd * (nd - kd)) * boost::math::quantile(f, 1.0 - alpha);
}

SpeLimit spe_control_limit(const Eigen::VectorXd& residual, double alpha) {
  SpeLimit out;
  const double theta1 = residual.sum();
  const double theta2 = residual.array().square().sum();
  const double theta3 = residual.array().cube().sum();
  if (residual.size() == 0 || !(theta1 > 1e-12) || !(theta2 > 0.0)) {
    out.degenerate = true;
    out.value = std::numeric_limits<double>::epsilon();
    return out;
  }
  const double h0 = 1.0 - 2.0 * theta1 * theta3 / (3.0 * theta2 * theta2);
  if (h0 <= 0.0) {
    const double g = theta2 / theta1;
    const double h = theta1 * theta1 / theta2;
    const boost::math::chi_squared_distribution<double> chi(h);
    out.value = g * boost::math::quantile(chi, 1.0 - alpha);
    out.box_fallback = true;
    return out;
  }
  const double c_alpha = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha);
  const double term = c_alpha * std::sqrt(2.0 * theta2 * h0 * h0) / theta1 + 1.0 +
                      theta2 * h0 * (h0 - 1.0) / (theta1 * theta1);
  out.value = theta1 * std::pow(term, 1.0 / h0);
  return out;
}

PcaModel fit_pca(const std::vector<ProcessSample>& training, std::size_t n_components, double alpha) {
  detail::require(!training.empty(), "training", "no samples");
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0, 1)");
  const std::size_t d = training.front().values.size();
  const std::size_t n = training.size();
  detail::require(d >= 1, "training", "samples have no values");
  detail::require(n_components >= 1 && n_components <= d, "n_components",
                  "must lie in [1, " + std::to_string(d) + "]");
  detail::require(n >= 10 * d, "training",
                  "needs at least " + std::to_string(10 * d) + " samples, got " + std::to_string(n));

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(training[i].values.size() == d, "training", "sample " + std::to_string(i) + " has wrong dimension");
    for (std::size_t j = 0; j < d; ++j) {
      const double v = training[i].values[j];
      detail::require(std::isfinite(v), "training", "non-finite value in sample " + std::to_string(i));
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }

  PcaModel model;
  model.alpha = alpha;
  model.n_train = n;
  model.mean = x.colwise().mean().transpose();
  x.rowwise() -= model.mean.transpose();
  model.scale = (x.colwise().squaredNorm() / static_cast<double>(n - 1)).cwiseSqrt().transpose();
  for (std::size_t j = 0; j < d; ++j) {
    const double s = model.scale(static_cast<Eigen::Index>(j));
    const double m = std::abs(model.mean(static_cast<Eigen::Index>(j)));
    detail::require(s > 1e-12 * std::max(1.0, m), "training", "column " + std::to_string(j) + " is constant");
  }
  for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) /= model.scale(j);

  const Eigen::MatrixXd corr = (x.transpose() * x) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  detail::require(eig.info() == Eigen::Success, "training", "eigendecomposition failed");

  // Eigen sorts ascending; reverse to descending variance.
  const Eigen::Index di = static_cast<Eigen::Index>(d);
  const Eigen::Index k = static_cast<Eigen::Index>(n_components);
  const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  model.eigenvalues = values.head(k);
  model.residual_eigenvalues = values.tail(di - k);
  model.loadings = vectors.leftCols(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index r = 0; r < di; ++r) {
      const double v = model.loadings(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) model.loadings.col(c) *= -1.0;
        break;
      }
    }
  }

  model.t2_limit = t2_control_limit(n_components, n, alpha);
  const SpeLimit spe = spe_control_limit(model.residual_eigenvalues, alpha);
  model.spe_limit = spe.value;
  model.spe_degenerate = spe.degenerate;
  return model;
}

DetectionResult score(const PcaModel& model, const ProcessSample& sample) {
  const Eigen::VectorXd z = standardize(model, sample);
  const Eigen::VectorXd t = model.loadings.transpose() * z;
  const Eigen::VectorXd residual = z - model.loadings * t;
  DetectionResult r;
  r.timestamp = sample.timestamp;
  r.t2 = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i)
    if (model.eigenvalues(i) > 0.0) r.t2 += t(i) * t(i) / model.eigenvalues(i);
  r.spe = residual.squaredNorm();
  r.fault_flag = r.spe > model.spe_limit || r.t2 > model.t2_limit;
  return r;
}

std::vector<DetectionResult> score_all(const PcaModel& model, const std::vector<ProcessSample>& samples) {
  std::vector<DetectionResult> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(score(model, s));
  return out;
}

std::vector<Contribution> residual_contributions(const PcaModel& model, const ProcessSample& sample) {
  const Eigen::VectorXd z = standardize(model, sample);
  const Eigen::VectorXd residual = z - model.loadings * (model.loadings.transpose() * z);
  std::vector<Contribution> out(model.dimension());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = {j, residual(static_cast<Eigen::Index>(j)) * residual(static_cast<Eigen::Index>(j))};
  std::stable_sort(out.begin(), out.end(), [](const Contribution& a, const Contribution& b) { return a.value > b.value; });
  return out;
}

void write_detection_csv(std::ostream& out, const PcaModel& model, const std::vector<DetectionResult>& results) {
  out << "timestamp,spe,t2,spe_limit,t2_limit,fault_flag\n";
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%d\n", r.timestamp, r.spe, r.t2, model.spe_limit,
                  model.t2_limit, r.fault_flag ? 1 : 0);
    out << buf;
  }
}

}  // namespace cecbench::fdd
