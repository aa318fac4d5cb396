/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cecbench/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "cecbench/error.hpp"
#include "cecbench/rng.hpp"
#include "cecbench/sim.hpp"

namespace cecbench::experiment {

namespace {

using protocols::Protocol;

constexpr std::array<std::pair<FigureTag, std::string_view>, 6> kFigureNames{{
    {FigureTag::Fig7Surface, "fig7_surface"},
    {FigureTag::Fig9Ucc, "fig9_ucc"},
    {FigureTag::Fig10Ucc, "fig10_ucc"},
    {FigureTag::Fig11Tcm, "fig11_tcm"},
    {FigureTag::Fig12UccSnrTasks, "fig12_ucc_snr_tasks"},
    {FigureTag::Fig13Pfail, "fig13_pfail"},
}};

constexpr std::uint64_t kHarqRoundsTag = 0x4852;
constexpr std::uint64_t kHarqPfailTag = 0x4850;
constexpr std::uint64_t kSimPfailTag = 0x5350;

double harq_rounds(const ExperimentConfig& cfg, const ChannelParams& chan) {
  RngStream rng(derive_seed(cfg.seed, kHarqRoundsTag, 0));
  return protocols::harq_expected_rounds(chan, cfg.protocol.harq, cfg.trials, rng).value;
}

// Communication time of a protocol for a network of n_total nodes. With
// `scheduled`, ReFlexUp reports the window M assigns (the Case III optimum,
// or the physical time when the channel cannot meet it); otherwise the time
// the two hops physically take.
double protocol_tcm(Protocol p, const ExperimentConfig& cfg, std::size_t n_total, const ChannelParams& chan,
                    double d_hat, double t_cp, const cec::CecConfig& cec_cfg, bool scheduled) {
  const protocols::NetworkShape shape = cfg.network.shape(n_total);
  switch (p) {
    case Protocol::SelectiveRepeatArq:
      return protocols::srarq_latency(shape, chan);
    case Protocol::Harq:
      return protocols::harq_latency(shape, chan, d_hat);
    case Protocol::OccupyCow: {
      const auto oc = protocols::occupycow_default_phases(shape, chan, cfg.protocol.occupy_phase1_share);
      return oc.t1 + oc.t2;
    }
    case Protocol::ReFlexUp: {
      const auto lat = protocols::reflexup_latency(shape, chan, cec_cfg, t_cp, reflexup_params(cfg, chan));
      return scheduled ? std::max(lat.physical, lat.target) : lat.physical;
    }
  }
  return 0.0;
}

void sort_rows(FigureDataset& d) {
  std::stable_sort(d.rows.begin(), d.rows.end(), [](const Row& a, const Row& b) {
    if (a.series != b.series) return a.series < b.series;
    return a.x < b.x;
  });
}

FigureDataset fig7(const ExperimentConfig& cfg) {
  FigureDataset d{FigureTag::Fig7Surface, {}};
  const std::size_t n = cfg.sweep.fig7_points;
  for (std::size_t j = 1; j <= n; ++j) {
    const double t_cp = cfg.sweep.fig7_tcp_max * static_cast<double>(j) / static_cast<double>(n);
    const std::string series = "t_cp=" + format_number(t_cp);
    for (std::size_t i = 1; i <= n; ++i) {
      const double t_cm = cfg.sweep.fig7_tcm_max * static_cast<double>(i) / static_cast<double>(n);
      d.rows.push_back({t_cm, series, cec::ucc_case3(t_cm, t_cp, cfg.cec), 0.0});
    }
  }
  return d;
}

FigureDataset fig_ucc(FigureTag tag, const ExperimentConfig& cfg, double t_cp) {
  FigureDataset d{tag, {}};
  const double d_hat = cfg.has_protocol(Protocol::Harq) ? harq_rounds(cfg, cfg.channel) : 1.0;
  for (Protocol p : cfg.protocols) {
    const std::string series(protocols::protocol_name(p));
    for (std::size_t n_g : cfg.sweep.n_g) {
      const double t_cm = protocol_tcm(p, cfg, n_g, cfg.channel, d_hat, t_cp, cfg.cec, true);
      d.rows.push_back({static_cast<double>(n_g), series, cec::ucc_case3(t_cm, t_cp, cfg.cec), 0.0});
    }
  }
  return d;
}

FigureDataset fig11(const ExperimentConfig& cfg) {
  FigureDataset d{FigureTag::Fig11Tcm, {}};
  const double d_hat = cfg.has_protocol(Protocol::Harq) ? harq_rounds(cfg, cfg.channel) : 1.0;
  for (Protocol p : cfg.protocols) {
    const std::string series(protocols::protocol_name(p));
    for (std::size_t n_g : cfg.sweep.n_g)
      d.rows.push_back({static_cast<double>(n_g), series,
                        protocol_tcm(p, cfg, n_g, cfg.channel, d_hat, cfg.t_cp, cfg.cec, false), 0.0});
  }
  return d;
}

// ReFlexUp efficiency weighted by the probability that the loop's data
// actually arrives: U_cc (1 - P_fail).
double reliable_ucc(const ExperimentConfig& cfg, const ChannelParams& chan, const cec::CecConfig& cec_cfg) {
  const protocols::NetworkShape shape = cfg.network.shape(cfg.sweep.fig12_n_g);
  const double t_cm = protocol_tcm(Protocol::ReFlexUp, cfg, cfg.sweep.fig12_n_g, chan, 1.0, cfg.t_cp, cec_cfg, true);
  const double p_fail = protocols::reflexup_pfail(shape, chan, reflexup_params(cfg, chan));
  return cec::ucc_case3(t_cm, cfg.t_cp, cec_cfg) * (1.0 - p_fail);
}

FigureDataset fig12(const ExperimentConfig& cfg) {
  FigureDataset d{FigureTag::Fig12UccSnrTasks, {}};
  for (double snr : cfg.sweep.snr_db)
    d.rows.push_back({snr, "reflexup_vs_snr", reliable_ucc(cfg, cfg.channel.with_snr_db(snr), cfg.cec), 0.0});
  for (std::size_t n : cfg.sweep.tasks)
    d.rows.push_back(
        {static_cast<double>(n), "reflexup_vs_tasks", reliable_ucc(cfg, cfg.channel, cec_for_tasks(cfg, n)), 0.0});
  return d;
}

FigureDataset fig13(const ExperimentConfig& cfg) {
  FigureDataset d{FigureTag::Fig13Pfail, {}};
  const protocols::NetworkShape shape = cfg.network.shape(cfg.sweep.fig13_n_g);
  for (std::size_t i = 0; i < cfg.sweep.snr_db.size(); ++i) {
    const double snr = cfg.sweep.snr_db[i];
    const ChannelParams chan = cfg.channel.with_snr_db(snr);
    for (Protocol p : cfg.protocols) {
      const std::string series(protocols::protocol_name(p));
      switch (p) {
        case Protocol::SelectiveRepeatArq:
          d.rows.push_back({snr, series, protocols::srarq_pfail(cfg.protocol.p_timeout, outage_probability(chan)), 0.0});
          break;
        case Protocol::Harq: {
          RngStream rng(derive_seed(cfg.seed, kHarqPfailTag, i));
          const auto est = protocols::harq_pfail(chan, cfg.protocol.harq, cfg.trials, rng);
          d.rows.push_back({snr, series, est.value, sim::kZ99 * est.std_error});
          break;
        }
        case Protocol::OccupyCow: {
          const auto oc = protocols::occupycow_default_phases(shape, chan, cfg.protocol.occupy_phase1_share);
          d.rows.push_back({snr, series, protocols::occupycow_pfail(shape, oc), 0.0});
          break;
        }
        case Protocol::ReFlexUp: {
          d.rows.push_back({snr, series, protocols::reflexup_pfail(shape, chan, reflexup_params(cfg, chan)), 0.0});
          if (cfg.sim_runs > 0) {
            sim::Scenario sc;
            sc.protocol = Protocol::ReFlexUp;
            sc.shape = shape;
            sc.chan = chan;
            sc.cec = cfg.cec;
            sc.options.p_timeout = cfg.protocol.p_timeout;
            sc.options.relay_window = reflexup_window(cfg);
            sc.options.local_snr_db = cfg.protocol.reflexup_local_snr_db;
            sc.options.packet_bits = cfg.network.packet_bits();
            sc.options.t_cp = cfg.t_cp;
            const auto est = sim::estimate_pfail(cfg.sim_runs, sc, derive_seed(cfg.seed, kSimPfailTag, i));
            d.rows.push_back({snr, "reflexup_sim", est.probability, est.ci_halfwidth});
          }
          break;
        }
      }
    }
  }
  return d;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') ? ch : '_';
  return out;
}

std::map<std::string, std::vector<const Row*>> by_series(const FigureDataset& d) {
  std::map<std::string, std::vector<const Row*>> out;
  for (const Row& r : d.rows) out[r.series].push_back(&r);
  return out;
}

}  // namespace

std::string_view figure_name(FigureTag tag) noexcept {
  for (const auto& [t, name] : kFigureNames)
    if (t == tag) return name;
  return "unknown";
}

std::optional<FigureTag> parse_figure(std::string_view name) noexcept {
  for (const auto& [t, n] : kFigureNames)
    if (n == name) return t;
  return std::nullopt;
}

const std::vector<FigureTag>& all_figures() {
  static const std::vector<FigureTag> tags = [] {
    std::vector<FigureTag> out;
    for (const auto& [t, n] : kFigureNames) out.push_back(t);
    return out;
  }();
  return tags;
}

protocols::NetworkShape NetworkConfig::shape(std::size_t n_total) const {
  return protocols::NetworkShape::from_relay_ratio(n_total, relay_ratio, packet_bits());
}

double reflexup_window(const ExperimentConfig& cfg) {
  return cfg.protocol.reflexup_window_uses / cfg.channel.bandwidth_hz;
}

protocols::ReflexUpParams reflexup_params(const ExperimentConfig& cfg, const ChannelParams& chan) {
  protocols::ReflexUpParams p;
  p.relay_window = cfg.protocol.reflexup_window_uses / chan.bandwidth_hz;
  p.p_timeout = cfg.protocol.p_timeout;
  p.local_snr_db = cfg.protocol.reflexup_local_snr_db;
  return p;
}

cec::CecConfig cec_for_tasks(const ExperimentConfig& cfg, std::size_t n_tasks) {
  cec::CecConfig c = cfg.cec;
  c.n_tasks = n_tasks;
  c.validate();
  return c;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

FigureDataset compute_figure(FigureTag tag, const ExperimentConfig& cfg) {
  FigureDataset d;
  switch (tag) {
    case FigureTag::Fig7Surface: d = fig7(cfg); break;
    case FigureTag::Fig9Ucc: d = fig_ucc(tag, cfg, cfg.sweep.fig9_t_cp); break;
    case FigureTag::Fig10Ucc: d = fig_ucc(tag, cfg, cfg.sweep.fig10_t_cp); break;
    case FigureTag::Fig11Tcm: d = fig11(cfg); break;
    case FigureTag::Fig12UccSnrTasks: d = fig12(cfg); break;
    case FigureTag::Fig13Pfail: d = fig13(cfg); break;
  }
  sort_rows(d);
  return d;
}

std::vector<SeriesSummary> summarize(const FigureDataset& data) {
  std::vector<SeriesSummary> out;
  for (const auto& [series, rows] : by_series(data)) {
    SeriesSummary s;
    s.series = series;
    s.points = rows.size();
    s.min = rows.front()->y;
    s.max = rows.front()->y;
    s.argmax_x = rows.front()->x;
    for (const Row* r : rows) {
      s.min = std::min(s.min, r->y);
      if (r->y > s.max) {
        s.max = r->y;
        s.argmax_x = r->x;
      }
    }
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> sanity_check(const FigureDataset& data) {
  std::vector<std::string> problems;
  const std::string tag(figure_name(data.tag));
  for (const Row& r : data.rows)
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.ci)) {
      problems.push_back(tag + ": non-finite value in series " + r.series);
      return problems;
    }
  for (const auto& [series, rows] : by_series(data)) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const Row& a = *rows[i - 1];
      const Row& b = *rows[i];
      const std::string where = tag + "/" + series + " between x=" + format_number(a.x) + " and " + format_number(b.x);
      switch (data.tag) {
        case FigureTag::Fig11Tcm:
          if (!(b.y > a.y)) problems.push_back(where + ": latency does not increase");
          break;
        case FigureTag::Fig13Pfail:
          if (b.y > a.y + a.ci + b.ci) problems.push_back(where + ": P_fail increases with SNR");
          break;
        case FigureTag::Fig12UccSnrTasks:
          if (series == "reflexup_vs_tasks" && a.x >= 10.0 && b.y > a.y)
            problems.push_back(where + ": U_cc increases with the task count");
          break;
        default:
          break;
      }
    }
  }
  return problems;
}

void write_dataset_csv(std::ostream& out, const FigureDataset& data) {
  out << "x,series,y,ci\n";
  for (const Row& r : data.rows)
    out << format_number(r.x) << ',' << r.series << ',' << format_number(r.y) << ',' << format_number(r.ci) << '\n';
}

RunReport run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  RunReport report;
  for (FigureTag tag : cfg.figures) {
    const std::string name(figure_name(tag));
    try {
      FigureDataset data = compute_figure(tag, cfg);
      for (auto& w : sanity_check(data)) report.sanity_warnings.push_back(std::move(w));

      const fs::path file = dir / (name + ".csv");
      std::ofstream out(file);
      if (!out) throw std::runtime_error(file.string() + ": cannot write");
      write_dataset_csv(out, data);
      report.files.push_back(file.string());
      if (cfg.per_series_files) {
        for (const auto& [series, rows] : by_series(data)) {
          FigureDataset part{tag, {}};
          for (const Row* r : rows) part.rows.push_back(*r);
          const fs::path series_file = dir / (name + "__" + sanitize(series) + ".csv");
          std::ofstream s(series_file);
          if (!s) throw std::runtime_error(series_file.string() + ": cannot write");
          write_dataset_csv(s, part);
          report.files.push_back(series_file.string());
        }
      }

      log << name << "\n";
      char line[256];
      std::snprintf(line, sizeof line, "  %-22s %16s %16s %14s\n", "series", "min", "max", "argmax x");
      log << line;
      for (const auto& s : summarize(data)) {
        std::snprintf(line, sizeof line, "  %-22s %16.6g %16.6g %14.6g\n", s.series.c_str(), s.min, s.max, s.argmax_x);
        log << line;
      }
      report.datasets.push_back(std::move(data));
    } catch (const std::exception& e) {
      report.failures.push_back({tag, e.what()});
      log << name << ": failed: " << e.what() << "\n";
    }
  }
  return report;
}

}  // namespace cecbench::experiment
