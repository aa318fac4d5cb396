/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cecbench/cec_core.hpp"
#include "cecbench/channel.hpp"
#include "cecbench/protocols.hpp"

// Declarative experiment runner: INI configuration with strict keys, figure
// sweeps over the analytic models and simulator, CSV output.
namespace cecbench::experiment {

enum class FigureTag { Fig7Surface, Fig9Ucc, Fig10Ucc, Fig11Tcm, Fig12UccSnrTasks, Fig13Pfail };

std::string_view figure_name(FigureTag tag) noexcept;
std::optional<FigureTag> parse_figure(std::string_view name) noexcept;
const std::vector<FigureTag>& all_figures();

struct NetworkConfig {
  std::size_t n_g = 250;
  double relay_ratio = 0.2;  // n_s / n_v
  double packet_bytes = 22.0;
  double c_to_m_latency = 0.0;

  double packet_bits() const noexcept { return 8.0 * packet_bytes; }
  protocols::NetworkShape shape(std::size_t n_total) const;
};

struct ProtocolConfig {
  double p_timeout = 1e-4;
  protocols::HarqParams harq;
  double occupy_phase1_share = 0.5;
  double reflexup_window_uses = 176.0;  // T_{v->s} in channel uses (1 / W each)
  std::optional<double> reflexup_local_snr_db;
};

struct SweepConfig {
  std::vector<double> snr_db{10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  std::vector<std::size_t> n_g{50, 100, 150, 200, 250, 300, 350, 400, 450, 500};
  std::vector<std::size_t> tasks{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  double fig9_t_cp = 0.5;
  double fig10_t_cp = 0.005;
  double fig7_tcm_max = 10.0;
  double fig7_tcp_max = 0.5;
  std::size_t fig7_points = 40;
  std::size_t fig12_n_g = 250;
  std::size_t fig13_n_g = 250;
};

struct ExperimentConfig {
  std::string name = "default";
  std::vector<FigureTag> figures = all_figures();
  std::vector<protocols::Protocol> protocols{protocols::Protocol::SelectiveRepeatArq, protocols::Protocol::Harq,
                                             protocols::Protocol::OccupyCow, protocols::Protocol::ReFlexUp};
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t trials = 100000;  // HARQ Monte-Carlo trials per sweep point
  std::size_t sim_runs = 10000;  // simulated fig13 runs per SNR point; 0 disables
  bool per_series_files = false;

  ChannelParams channel;
  NetworkConfig network;
  cec::CecConfig cec;
  double t_cp = 0.5;
  ProtocolConfig protocol;
  SweepConfig sweep;

  void validate() const;
  bool has_protocol(protocols::Protocol p) const;
};

struct ConfigReport {
  ExperimentConfig config;
  std::vector<std::string> resolved;  // "section.key = value", suffixed " (default)" when not given
  std::vector<std::string> warnings;
};

ConfigReport parse_config(std::istream& in, const std::string& source);
ConfigReport load_config(const std::string& path);
// Re-checks the config after command-line overrides and refreshes warnings.
void revalidate(ConfigReport& report);

struct Row {
  double x = 0.0;
  std::string series;
  double y = 0.0;
  double ci = 0.0;
};

struct FigureDataset {
  FigureTag tag = FigureTag::Fig7Surface;
  std::vector<Row> rows;  // sorted by x within each series
};

struct SeriesSummary {
  std::string series;
  double min = 0.0;
  double max = 0.0;
  double argmax_x = 0.0;
  std::size_t points = 0;
};

std::vector<SeriesSummary> summarize(const FigureDataset& data);
// Empty when the figure-specific sanity predicate holds.
std::vector<std::string> sanity_check(const FigureDataset& data);

FigureDataset compute_figure(FigureTag tag, const ExperimentConfig& cfg);

struct FigureFailure {
  FigureTag tag;
  std::string message;
};

struct RunReport {
  std::vector<FigureDataset> datasets;
  std::vector<std::string> files;
  std::vector<FigureFailure> failures;
  std::vector<std::string> sanity_warnings;
};

// Computes and writes every configured figure; a failing figure is recorded
// and the remaining ones still run. `log` receives the summary table.
RunReport run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// x,series,y,ci with %.10g numbers.
void write_dataset_csv(std::ostream& out, const FigureDataset& data);
std::string format_number(double v);

// Helpers shared by the figures and the acceptance checks.
double reflexup_window(const ExperimentConfig& cfg);
protocols::ReflexUpParams reflexup_params(const ExperimentConfig& cfg, const ChannelParams& chan);
cec::CecConfig cec_for_tasks(const ExperimentConfig& cfg, std::size_t n_tasks);

}  // namespace cecbench::experiment
