/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// PCA process monitoring run as the edge task: offline fit, online SPE / T^2
// scoring, a synthetic correlated process for experiments and CSV ingestion.
namespace cecbench::fdd {

struct ProcessSample {
  double timestamp = 0.0;
  std::vector<double> values;
};

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd loadings;  // dimension x components, orthonormal columns
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd residual_eigenvalues;
  double spe_limit = 0.0;
  double t2_limit = 0.0;
  double alpha = 0.01;
  std::size_t n_train = 0;
  // No residual variance to bound: every direction was retained or the
  // discarded ones carry no variance.
  bool spe_degenerate = false;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(mean.size()); }
  std::size_t components() const noexcept { return static_cast<std::size_t>(loadings.cols()); }
};

struct DetectionResult {
  double timestamp = 0.0;
  double spe = 0.0;
  double t2 = 0.0;
  bool fault_flag = false;
};

inline constexpr std::size_t kDefaultComponents = 17;
inline constexpr double kDefaultAlpha = 0.01;

PcaModel fit_pca(const std::vector<ProcessSample>& training, std::size_t n_components = kDefaultComponents,
                 double alpha = kDefaultAlpha);

DetectionResult score(const PcaModel& model, const ProcessSample& sample);
std::vector<DetectionResult> score_all(const PcaModel& model, const std::vector<ProcessSample>& samples);

// k (n^2 - 1) / (n (n - k)) F_{k, n-k}(1 - alpha).
double t2_control_limit(std::size_t k, std::size_t n, double alpha);

struct SpeLimit {
  double value = 0.0;
  bool degenerate = false;
  bool box_fallback = false;  // h0 <= 0, scaled chi-square used instead
};
// Jackson-Mudholkar limit from the residual eigenvalues.
SpeLimit spe_control_limit(const Eigen::VectorXd& residual_eigenvalues, double alpha);

struct Contribution {
  std::size_t variable = 0;
  double value = 0.0;
};
// Squared standardized residual per variable, largest first; sums to SPE.
std::vector<Contribution> residual_contributions(const PcaModel& model, const ProcessSample& sample);

enum class FaultType { None, MeanShift, Drift, VarianceBump };

struct FaultSpec {
  FaultType type = FaultType::None;
  std::vector<std::size_t> variables;
  // MeanShift: shift in standard deviations. Drift: standard deviations per
  // sample. VarianceBump: multiplier of the deviation from the mean.
  double magnitude = 0.0;

  // "none", "mean_shift:0,1,2:3", "drift:4:0.05", "variance_bump:7:3".
  static FaultSpec parse(const std::string& text);
  void validate(std::size_t dimension) const;
};

struct SyntheticOptions {
  std::size_t dimension = 52;
  double condition_number = 50.0;
  std::size_t n_training = 0;  // 0: max(n_normal, 10 * dimension)
};

struct SyntheticData {
  std::vector<ProcessSample> training;
  std::vector<ProcessSample> test;  // n_normal clean samples, then n_fault faulty
  std::size_t fault_onset = 0;      // index of the first faulty test sample
  Eigen::MatrixXd correlation;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

SyntheticData generate_synthetic_te(std::size_t n_normal, std::size_t n_fault, const FaultSpec& fault,
                                    std::uint64_t seed, const SyntheticOptions& options = {});

struct CsvSchema {
  bool header = false;
  std::optional<std::size_t> timestamp_column;  // remaining columns are values
  char delimiter = ',';
};

struct CsvData {
  std::vector<ProcessSample> samples;
  std::vector<std::string> warnings;
};

CsvData ingest_csv(const std::string& path, const CsvSchema& schema = {});
CsvData parse_csv(std::istream& in, const std::string& source, const CsvSchema& schema = {});

// timestamp,spe,t2,spe_limit,t2_limit,fault_flag
void write_detection_csv(std::ostream& out, const PcaModel& model, const std::vector<DetectionResult>& results);

}  // namespace cecbench::fdd
