/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "cecbench/error.hpp"
#include "cecbench/experiment.hpp"

namespace cecbench::experiment {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string& value, const std::string& path)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct KeySpec {
  std::string section;
  std::string key;
  Setter set;
  Getter show;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& text, const std::string& path) {
  const std::string s = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ValidationError(path, "expected a finite number, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& text, const std::string& path) {
  const std::string s = trim(text);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    // Accept integral scientific notation such as 1e5.
    const double v = to_double(s, path);
    if (v < 0.0 || std::floor(v) != v || v > 1.8e19)
      throw ValidationError(path, "expected a non-negative integer, got '" + text + "'");
    return static_cast<std::uint64_t>(v);
  }
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ValidationError(path, "integer out of range: '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const std::string& path) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError(path, "expected a boolean, got '" + text + "'");
}

// "a:b:step" expands to an inclusive grid; anything else is a comma list.
std::vector<double> to_grid(const std::string& text, const std::string& path) {
  const std::string s = trim(text);
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto a = s.find(':');
    const auto b = s.find(':', a + 1);
    const double lo = to_double(s.substr(0, a), path);
    const double hi = to_double(s.substr(a + 1, b - a - 1), path);
    const double step = to_double(s.substr(b + 1), path);
    if (!(step > 0.0) || hi < lo) throw ValidationError(path, "range needs lo <= hi and a positive step");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    if (n > 100000) throw ValidationError(path, "range has too many points");
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item, path));
  return out;
}

std::vector<std::size_t> to_count_grid(const std::string& text, const std::string& path) {
  std::vector<std::size_t> out;
  for (double v : to_grid(text, path)) {
    if (v < 0.0 || std::floor(v) != v) throw ValidationError(path, "expected non-negative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>)
      out += format_number(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

template <typename Field>
KeySpec number_key(const char* section, const char* key, Field field) {
  return {section, key,
          [field](ExperimentConfig& c, const std::string& v, const std::string& path) {
            using T = std::decay_t<decltype(field(c))>;
            if constexpr (std::is_floating_point_v<T>)
              field(c) = to_double(v, path);
            else
              field(c) = static_cast<T>(to_u64(v, path));
          },
          [field](const ExperimentConfig& c) {
            auto& value = field(const_cast<ExperimentConfig&>(c));
            using T = std::decay_t<decltype(value)>;
            if constexpr (std::is_floating_point_v<T>)
              return format_number(value);
            else
              return std::to_string(value);
          }};
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    t.push_back({"experiment", "name",
                 [](ExperimentConfig& c, const std::string& v, const std::string&) { c.name = trim(v); },
                 [](const ExperimentConfig& c) { return c.name; }});
    t.push_back({"experiment", "figures",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   c.figures.clear();
                   for (const auto& item : split_list(v)) {
                     if (item == "all") {
                       c.figures = all_figures();
                       continue;
                     }
                     const auto tag = parse_figure(item);
                     if (!tag) throw ValidationError(path, "unknown figure tag '" + item + "'");
                     if (std::find(c.figures.begin(), c.figures.end(), *tag) == c.figures.end())
                       c.figures.push_back(*tag);
                   }
                 },
                 [](const ExperimentConfig& c) {
                   std::string out;
                   for (auto f : c.figures) out += (out.empty() ? "" : ",") + std::string(figure_name(f));
                   return out;
                 }});
    t.push_back({"experiment", "protocols",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   c.protocols.clear();
                   for (const auto& item : split_list(v)) {
                     const auto p = protocols::parse_protocol(item);
                     if (!p) throw ValidationError(path, "unknown protocol '" + item + "'");
                     if (!c.has_protocol(*p)) c.protocols.push_back(*p);
                   }
                 },
                 [](const ExperimentConfig& c) {
                   std::string out;
                   for (auto p : c.protocols) out += (out.empty() ? "" : ",") + std::string(protocols::protocol_name(p));
                   return out;
                 }});
    t.push_back(number_key("experiment", "seed", [](ExperimentConfig& c) -> auto& { return c.seed; }));
    t.push_back({"experiment", "output_dir",
                 [](ExperimentConfig& c, const std::string& v, const std::string&) { c.output_dir = trim(v); },
                 [](const ExperimentConfig& c) { return c.output_dir; }});
    t.push_back(number_key("experiment", "trials", [](ExperimentConfig& c) -> auto& { return c.trials; }));
    t.push_back(number_key("experiment", "sim_runs", [](ExperimentConfig& c) -> auto& { return c.sim_runs; }));
    t.push_back({"experiment", "per_series_files",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   c.per_series_files = to_bool(v, path);
                 },
                 [](const ExperimentConfig& c) { return std::string(c.per_series_files ? "true" : "false"); }});

    t.push_back(number_key("channel", "snr_db", [](ExperimentConfig& c) -> auto& { return c.channel.snr_db; }));
    t.push_back(
        number_key("channel", "bandwidth_hz", [](ExperimentConfig& c) -> auto& { return c.channel.bandwidth_hz; }));
    t.push_back(number_key("channel", "rate_bps", [](ExperimentConfig& c) -> auto& { return c.channel.rate_bps; }));

    t.push_back(number_key("network", "n_g", [](ExperimentConfig& c) -> auto& { return c.network.n_g; }));
    t.push_back(
        number_key("network", "relay_ratio", [](ExperimentConfig& c) -> auto& { return c.network.relay_ratio; }));
    t.push_back(
        number_key("network", "packet_bytes", [](ExperimentConfig& c) -> auto& { return c.network.packet_bytes; }));
    t.push_back(number_key("network", "c_to_m_latency",
                           [](ExperimentConfig& c) -> auto& { return c.network.c_to_m_latency; }));

    t.push_back(number_key("cec", "n_tasks", [](ExperimentConfig& c) -> auto& { return c.cec.n_tasks; }));
    t.push_back(number_key("cec", "k_rbs", [](ExperimentConfig& c) -> auto& { return c.cec.k_rbs; }));
    t.push_back(number_key("cec", "c", [](ExperimentConfig& c) -> auto& { return c.cec.c; }));
    t.push_back(number_key("cec", "c0", [](ExperimentConfig& c) -> auto& { return c.cec.c0; }));
    t.push_back(number_key("cec", "epsilon", [](ExperimentConfig& c) -> auto& { return c.cec.epsilon; }));
    t.push_back(number_key("cec", "t_cp", [](ExperimentConfig& c) -> auto& { return c.t_cp; }));
    t.push_back({"cec", "slot_policy",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   const std::string s = trim(v);
                   if (s == "padded")
                     c.cec.slot_policy = cec::SlotPolicy::PaddedSlot;
                   else if (s == "adaptive")
                     c.cec.slot_policy = cec::SlotPolicy::AdaptiveSlot;
                   else
                     throw ValidationError(path, "expected 'padded' or 'adaptive', got '" + v + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.cec.slot_policy == cec::SlotPolicy::PaddedSlot ? "padded" : "adaptive");
                 }});

    t.push_back(
        number_key("protocols", "p_timeout", [](ExperimentConfig& c) -> auto& { return c.protocol.p_timeout; }));
    t.push_back(number_key("protocols", "harq_max_rounds",
                           [](ExperimentConfig& c) -> auto& { return c.protocol.harq.max_rounds; }));
    t.push_back(number_key("protocols", "harq_diversity",
                           [](ExperimentConfig& c) -> auto& { return c.protocol.harq.diversity; }));
    t.push_back(number_key("protocols", "occupycow_phase1_share",
                           [](ExperimentConfig& c) -> auto& { return c.protocol.occupy_phase1_share; }));
    t.push_back(number_key("protocols", "reflexup_window_channel_uses",
                           [](ExperimentConfig& c) -> auto& { return c.protocol.reflexup_window_uses; }));
    t.push_back({"protocols", "reflexup_local_snr_db",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   if (trim(v) == "same")
                     c.protocol.reflexup_local_snr_db.reset();
                   else
                     c.protocol.reflexup_local_snr_db = to_double(v, path);
                 },
                 [](const ExperimentConfig& c) {
                   return c.protocol.reflexup_local_snr_db ? format_number(*c.protocol.reflexup_local_snr_db)
                                                           : std::string("same");
                 }});

    t.push_back({"sweep", "snr_db",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   c.sweep.snr_db = to_grid(v, path);
                 },
                 [](const ExperimentConfig& c) { return join(c.sweep.snr_db); }});
    t.push_back({"sweep", "n_g",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   c.sweep.n_g = to_count_grid(v, path);
                 },
                 [](const ExperimentConfig& c) { return join(c.sweep.n_g); }});
    t.push_back({"sweep", "tasks",
                 [](ExperimentConfig& c, const std::string& v, const std::string& path) {
                   c.sweep.tasks = to_count_grid(v, path);
                 },
                 [](const ExperimentConfig& c) { return join(c.sweep.tasks); }});
    t.push_back(number_key("sweep", "fig9_t_cp", [](ExperimentConfig& c) -> auto& { return c.sweep.fig9_t_cp; }));
    t.push_back(number_key("sweep", "fig10_t_cp", [](ExperimentConfig& c) -> auto& { return c.sweep.fig10_t_cp; }));
    t.push_back(
        number_key("sweep", "fig7_tcm_max", [](ExperimentConfig& c) -> auto& { return c.sweep.fig7_tcm_max; }));
    t.push_back(
        number_key("sweep", "fig7_tcp_max", [](ExperimentConfig& c) -> auto& { return c.sweep.fig7_tcp_max; }));
    t.push_back(number_key("sweep", "fig7_points", [](ExperimentConfig& c) -> auto& { return c.sweep.fig7_points; }));
    t.push_back(number_key("sweep", "fig12_n_g", [](ExperimentConfig& c) -> auto& { return c.sweep.fig12_n_g; }));
    t.push_back(number_key("sweep", "fig13_n_g", [](ExperimentConfig& c) -> auto& { return c.sweep.fig13_n_g; }));
    return t;
  }();
  return table;
}

void snr_warning(std::vector<std::string>& warnings, const std::string& path, double snr) {
  if (snr < 10.0 || snr > 60.0)
    warnings.push_back(path + " = " + format_number(snr) + " dB lies outside the evaluated range [10, 60] dB");
}

void collect_warnings(ConfigReport& report) {
  report.warnings.clear();
  const ExperimentConfig& c = report.config;
  snr_warning(report.warnings, "channel.snr_db", c.channel.snr_db);
  for (double s : c.sweep.snr_db) snr_warning(report.warnings, "sweep.snr_db", s);
  if (c.protocol.reflexup_local_snr_db)
    snr_warning(report.warnings, "protocols.reflexup_local_snr_db", *c.protocol.reflexup_local_snr_db);
}

}  // namespace

void ExperimentConfig::validate() const {
  detail::require(!figures.empty(), "experiment.figures", "must name at least one figure");
  detail::require(!protocols.empty(), "experiment.protocols", "must name at least one protocol");
  detail::require(!output_dir.empty(), "experiment.output_dir", "must not be empty");
  detail::require(trials >= protocols::kMinMonteCarloTrials, "experiment.trials", "needs at least 10000 trials");
  detail::require(sim_runs == 0 || sim_runs >= 1000, "experiment.sim_runs", "must be 0 or at least 1000");
  try {
    channel.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("channel." + e.field(), e.what());
  }
  detail::require(network.relay_ratio > 0.0, "network.relay_ratio", "must be positive");
  detail::require(network.packet_bytes > 0.0, "network.packet_bytes", "must be positive");
  detail::require(network.c_to_m_latency >= 0.0, "network.c_to_m_latency", "must be non-negative");
  detail::require(network.n_g >= 2, "network.n_g", "must be at least 2");
  try {
    cec.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("cec." + e.field(), e.what());
  }
  detail::require(t_cp > 0.0, "cec.t_cp", "must be positive");
  detail::require(protocol.p_timeout >= 0.0 && protocol.p_timeout <= 1.0, "protocols.p_timeout",
                  "must lie in [0, 1]");
  detail::require(protocol.harq.max_rounds >= 1 && protocol.harq.max_rounds < 255, "protocols.harq_max_rounds",
                  "must lie in [1, 254]");
  detail::require(protocol.harq.diversity >= 1, "protocols.harq_diversity", "must be at least 1");
  detail::require(protocol.occupy_phase1_share > 0.0 && protocol.occupy_phase1_share < 1.0,
                  "protocols.occupycow_phase1_share", "must lie in (0, 1)");
  detail::require(protocol.reflexup_window_uses > 0.0, "protocols.reflexup_window_channel_uses", "must be positive");
  detail::require(!sweep.snr_db.empty(), "sweep.snr_db", "grid must not be empty");
  detail::require(!sweep.n_g.empty(), "sweep.n_g", "grid must not be empty");
  detail::require(!sweep.tasks.empty(), "sweep.tasks", "grid must not be empty");
  for (std::size_t n : sweep.n_g) detail::require(n >= 2, "sweep.n_g", "every network needs at least 2 nodes");
  for (std::size_t n : sweep.tasks) {
    detail::require(n >= 1, "sweep.tasks", "task counts must be positive");
    cec::CecConfig probe = cec;
    probe.n_tasks = n;
    try {
      probe.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("sweep.tasks", "task count " + std::to_string(n) + " is invalid: " + e.what());
    }
  }
  detail::require(sweep.fig9_t_cp > 0.0, "sweep.fig9_t_cp", "must be positive");
  detail::require(sweep.fig10_t_cp > 0.0, "sweep.fig10_t_cp", "must be positive");
  detail::require(sweep.fig7_tcm_max > 0.0, "sweep.fig7_tcm_max", "must be positive");
  detail::require(sweep.fig7_tcp_max > 0.0, "sweep.fig7_tcp_max", "must be positive");
  detail::require(sweep.fig7_points >= 2, "sweep.fig7_points", "must be at least 2");
  detail::require(sweep.fig12_n_g >= 2, "sweep.fig12_n_g", "must be at least 2");
  detail::require(sweep.fig13_n_g >= 2, "sweep.fig13_n_g", "must be at least 2");
}

bool ExperimentConfig::has_protocol(protocols::Protocol p) const {
  return std::find(protocols.begin(), protocols.end(), p) != protocols.end();
}

ConfigReport parse_config(std::istream& in, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source, e.line(), 0, e.message());
  }

  ConfigReport report;
  const auto& table = key_table();
  std::vector<std::string> given;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ValidationError(section, "keys must appear inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      const auto spec = std::find_if(table.begin(), table.end(),
                                     [&](const KeySpec& k) { return k.section == section && k.key == key; });
      if (spec == table.end()) throw ValidationError(path, "unknown key");
      spec->set(report.config, value.data(), path);
      given.push_back(path);
    }
  }
  for (const auto& spec : table) {
    const std::string path = spec.section + "." + spec.key;
    const bool explicit_value = std::find(given.begin(), given.end(), path) != given.end();
    report.resolved.push_back(path + " = " + spec.show(report.config) + (explicit_value ? "" : " (default)"));
  }
  report.config.validate();
  collect_warnings(report);
  return report;
}

ConfigReport load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open configuration");
  return parse_config(in, path);
}

void revalidate(ConfigReport& report) {
  report.config.validate();
  collect_warnings(report);
}

}  // namespace cecbench::experiment
