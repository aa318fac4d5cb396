/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <cmath>
#include <sstream>

#include "cecbench/error.hpp"
#include "cecbench/fdd.hpp"
#include "cecbench/rng.hpp"

namespace cecbench::fdd {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_number(const std::string& s, const char* field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError(field, "'" + s + "' is not a number");
  }
  detail::require(used == s.size() && std::isfinite(v), field, "'" + s + "' is not a finite number");
  return v;
}

// Random correlation matrix with eigenvalues log-spaced over the requested
// condition number before rescaling to unit diagonal.
Eigen::MatrixXd random_correlation(std::size_t d, double condition, RngStream& rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd lambda(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lambda(i) = n > 1 ? std::pow(condition, -static_cast<double>(i) / static_cast<double>(n - 1)) : 1.0;
  const Eigen::MatrixXd cov = q * lambda.asDiagonal() * q.transpose();
  const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  corr = 0.5 * (corr + corr.transpose());
  corr.diagonal().setOnes();
  return corr;
}

}  // namespace

FaultSpec FaultSpec::parse(const std::string& text) {
  FaultSpec f;
  if (text == "none" || text.empty()) return f;
  const auto parts = split(text, ':');
  detail::require(parts.size() == 3, "fault", "expected type:variables:magnitude, got '" + text + "'");
  if (parts[0] == "mean_shift")
    f.type = FaultType::MeanShift;
  else if (parts[0] == "drift")
    f.type = FaultType::Drift;
  else if (parts[0] == "variance_bump")
    f.type = FaultType::VarianceBump;
  else
    throw ValidationError("fault", "unknown fault type '" + parts[0] + "'");
  for (const auto& v : split(parts[1], ',')) {
    const double idx = parse_number(v, "fault.variables");
    detail::require(idx >= 0.0 && std::floor(idx) == idx, "fault.variables", "'" + v + "' is not an index");
    f.variables.push_back(static_cast<std::size_t>(idx));
  }
  f.magnitude = parse_number(parts[2], "fault.magnitude");
  return f;
}

void FaultSpec::validate(std::size_t dimension) const {
  if (type == FaultType::None) return;
  detail::require(!variables.empty(), "fault.variables", "at least one variable is required");
  for (std::size_t v : variables)
    detail::require(v < dimension, "fault.variables", "index " + std::to_string(v) + " is out of range");
  detail::require(std::isfinite(magnitude), "fault.magnitude", "must be finite");
  if (type == FaultType::VarianceBump)
    detail::require(magnitude > 0.0, "fault.magnitude", "variance factor must be positive");
}

SyntheticData generate_synthetic_te(std::size_t n_normal, std::size_t n_fault, const FaultSpec& fault,
                                    std::uint64_t seed, const SyntheticOptions& options) {
  const std::size_t d = options.dimension;
  detail::require(d >= 1, "dimension", "must be at least 1");
  detail::require(std::isfinite(options.condition_number) && options.condition_number >= 1.0, "condition_number",
                  "must be at least 1");
  fault.validate(d);

  RngStream rng(seed, 0x7465'7370ULL);
  RngStream structure = rng.split(1);
  RngStream train_rng = rng.split(2);
  RngStream test_rng = rng.split(3);

  SyntheticData out;
  out.correlation = random_correlation(d, options.condition_number, structure);
  const Eigen::Index n = static_cast<Eigen::Index>(d);
  out.mean.resize(n);
  out.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.mean(i) = -10.0 + 20.0 * structure.uniform();
    out.scale(i) = 0.5 + 4.5 * structure.uniform();
  }
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(out.correlation).matrixL();

  auto draw = [&](RngStream& r) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = r.normal();
    return Eigen::VectorXd(chol * z);
  };
  auto emit = [&](const Eigen::VectorXd& std_values, double t) {
    ProcessSample s;
    s.timestamp = t;
    s.values.resize(d);
    for (Eigen::Index i = 0; i < n; ++i) s.values[static_cast<std::size_t>(i)] = out.mean(i) + out.scale(i) * std_values(i);
    return s;
  };

  const std::size_t n_train = options.n_training ? options.n_training : std::max(n_normal, 10 * d);
  out.training.reserve(n_train);
  for (std::size_t i = 0; i < n_train; ++i) out.training.push_back(emit(draw(train_rng), static_cast<double>(i)));

  out.fault_onset = n_normal;
  out.test.reserve(n_normal + n_fault);
  for (std::size_t i = 0; i < n_normal + n_fault; ++i) {
    Eigen::VectorXd z = draw(test_rng);
    if (i >= n_normal) {
      const double age = static_cast<double>(i - n_normal + 1);
      for (std::size_t v : fault.variables) {
        const Eigen::Index vi = static_cast<Eigen::Index>(v);
        switch (fault.type) {
          case FaultType::MeanShift: z(vi) += fault.magnitude; break;
          case FaultType::Drift: z(vi) += fault.magnitude * age; break;
          case FaultType::VarianceBump: z(vi) *= fault.magnitude; break;
          case FaultType::None: break;
        }
      }
    }
    out.test.push_back(emit(z, static_cast<double>(i)));
  }
  return out;
}

}  // namespace cecbench::fdd
