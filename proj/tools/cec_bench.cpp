/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "cecbench/error.hpp"
#include "cecbench/experiment.hpp"
#include "cecbench/fdd.hpp"
#include "cecbench/kernels.hpp"
#include "cecbench/sim.hpp"

namespace {

using namespace cecbench;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::vector<std::string> figures;
  bool quiet = false;
};

struct DetectArgs {
  std::string train;
  std::string test;
  bool synthetic = false;
  std::string fault = "mean_shift:0,1,2,3,4:3";
  std::size_t n_normal = 5000;
  std::size_t n_fault = 1000;
  std::size_t dimension = 52;
  std::uint64_t seed = 1;
  std::size_t components = fdd::kDefaultComponents;
  double alpha = fdd::kDefaultAlpha;
  bool header = false;
  std::optional<std::size_t> timestamp_column;
  std::string out;
};

struct TraceArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void print_resolved(const experiment::ConfigReport& report, std::ostream& os) {
  for (const auto& line : report.resolved) os << "  " << line << "\n";
}

void print_warnings(const experiment::ConfigReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

experiment::ConfigReport load(const std::string& path, const RunArgs* overrides) {
  experiment::ConfigReport report = experiment::load_config(path);
  if (overrides) {
    auto& c = report.config;
    if (!overrides->out.empty()) c.output_dir = overrides->out;
    if (overrides->seed) c.seed = *overrides->seed;
    if (overrides->trials) c.trials = *overrides->trials;
    if (!overrides->figures.empty()) {
      c.figures.clear();
      for (const auto& f : overrides->figures) {
        const auto tag = experiment::parse_figure(f);
        if (!tag) throw ValidationError("--figure", "unknown figure tag '" + f + "'");
        c.figures.push_back(*tag);
      }
    }
    experiment::revalidate(report);
  }
  return report;
}

int cmd_run(const RunArgs& args) {
  const auto report = load(args.config, &args);
  print_warnings(report);
  if (!args.quiet) {
    std::cout << "configuration " << report.config.name << " (kernels: "
              << kernels::isa_name(kernels::active_isa()) << ")\n";
    print_resolved(report, std::cout);
  }
  const auto result = experiment::run_experiment(report.config, std::cout);
  for (const auto& w : result.sanity_warnings) std::cerr << "sanity: " << w << "\n";
  for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
  return result.failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_validate(const std::string& path) {
  const auto report = load(path, nullptr);
  print_warnings(report);
  std::cout << "configuration " << report.config.name << " is valid\n";
  print_resolved(report, std::cout);
  return kExitOk;
}

int cmd_detect(const DetectArgs& args) {
  std::vector<fdd::ProcessSample> train;
  std::vector<fdd::ProcessSample> test;
  std::size_t onset = 0;
  if (args.synthetic) {
    fdd::SyntheticOptions opts;
    opts.dimension = args.dimension;
    const auto data = fdd::generate_synthetic_te(args.n_normal, args.n_fault, fdd::FaultSpec::parse(args.fault),
                                                 args.seed, opts);
    train = data.training;
    test = data.test;
    onset = data.fault_onset;
  } else {
    if (args.train.empty() || args.test.empty())
      throw ValidationError("detect", "either --synthetic or both --train and --test are required");
    fdd::CsvSchema schema;
    schema.header = args.header;
    schema.timestamp_column = args.timestamp_column;
    auto tr = fdd::ingest_csv(args.train, schema);
    auto te = fdd::ingest_csv(args.test, schema);
    for (const auto& w : tr.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& w : te.warnings) std::cerr << "warning: " << w << "\n";
    train = std::move(tr.samples);
    test = std::move(te.samples);
  }
  const fdd::PcaModel model = fdd::fit_pca(train, args.components, args.alpha);
  if (model.spe_degenerate) std::cerr << "warning: no residual subspace, SPE limit is degenerate\n";
  const auto results = fdd::score_all(model, test);

  if (args.out.empty()) {
    fdd::write_detection_csv(std::cout, model, results);
  } else {
    std::ofstream out(args.out);
    if (!out) throw std::runtime_error(args.out + ": cannot write");
    fdd::write_detection_csv(out, model, results);
  }

  std::size_t flagged = 0;
  std::size_t flagged_after = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].fault_flag) continue;
    ++flagged;
    if (args.synthetic && i >= onset) ++flagged_after;
  }
  std::fprintf(stderr, "samples %zu, flagged %zu, SPE limit %.6g, T2 limit %.6g\n", results.size(), flagged,
               model.spe_limit, model.t2_limit);
  if (args.synthetic && results.size() > onset)
    std::fprintf(stderr, "post-onset detection rate %.4f\n",
                 static_cast<double>(flagged_after) / static_cast<double>(results.size() - onset));
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].fault_flag) continue;
    const auto contrib = fdd::residual_contributions(model, test[i]);
    std::fprintf(stderr, "first flag at t=%.10g; largest residual contributions:", results[i].timestamp);
    for (std::size_t k = 0; k < std::min<std::size_t>(5, contrib.size()); ++k)
      std::fprintf(stderr, " x%zu=%.4g", contrib[k].variable, contrib[k].value);
    std::fprintf(stderr, "\n");
    break;
  }
  return kExitOk;
}

int cmd_trace(const TraceArgs& args) {
  const auto report = load(args.config, nullptr);
  print_warnings(report);
  const auto& c = report.config;
  const auto shape = c.network.shape(c.network.n_g);
  sim::Topology topo = sim::Topology::clustered(shape);
  topo.c_to_m_latency = c.network.c_to_m_latency;
  const auto flows = sim::make_flows(topo, c.cec.n_tasks, c.cec.epsilon, 0.0);
  sim::SimOptions opts;
  opts.p_timeout = c.protocol.p_timeout;
  opts.relay_window = experiment::reflexup_window(c);
  opts.local_snr_db = c.protocol.reflexup_local_snr_db;
  opts.packet_bits = c.network.packet_bits();
  opts.t_cp = c.t_cp;
  const auto trace = sim::run_reflexup(topo, flows, c.channel, c.cec, args.seed.value_or(c.seed), opts);
  if (args.out.empty()) {
    sim::write_trace_csv(std::cout, trace);
  } else {
    std::ofstream out(args.out);
    if (!out) throw std::runtime_error(args.out + ": cannot write");
    sim::write_trace_csv(out, trace);
  }
  const auto measured = sim::measure_cec(trace, c.cec, c.t_cp);
  std::size_t failures = 0;
  for (const auto& t : trace.tasks) failures += t.comm_failure ? 1 : 0;
  std::fprintf(stderr, "events %zu, communication failures %zu, T_p %.6g s, target T_cm %.6g s, U_cc %.6g\n",
               trace.events.size(), failures, trace.t_p, trace.target_t_cm, measured.u_cc);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication/edge-computing efficiency and uplink protocol benchmark"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Compute the configured figures and write CSV datasets");
  run_cmd->add_option("config", run.config, "Configuration file")->required();
  run_cmd->add_option("--out", run.out, "Output directory (overrides experiment.output_dir)");
  run_cmd->add_option("--seed", run.seed, "Master seed (overrides experiment.seed)");
  run_cmd->add_option("--trials", run.trials, "Monte-Carlo trials (overrides experiment.trials)");
  run_cmd->add_option("--figure", run.figures, "Restrict to these figure tags");
  run_cmd->add_flag("--quiet", run.quiet, "Do not echo the resolved configuration");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration and print it with defaults applied");
  validate_cmd->add_option("config", validate_path, "Configuration file")->required();

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Fit a PCA monitor and score a test stream");
  detect_cmd->add_option("--train", detect.train, "Fault-free training CSV");
  detect_cmd->add_option("--test", detect.test, "CSV to score");
  detect_cmd->add_flag("--synthetic", detect.synthetic, "Use the synthetic correlated process instead of CSV input");
  detect_cmd->add_option("--fault", detect.fault, "Synthetic fault: none | mean_shift:VARS:SIGMA | drift:VARS:SLOPE | "
                                                  "variance_bump:VARS:FACTOR");
  detect_cmd->add_option("--n-normal", detect.n_normal, "Synthetic clean samples before the fault");
  detect_cmd->add_option("--n-fault", detect.n_fault, "Synthetic faulty samples");
  detect_cmd->add_option("--dimension", detect.dimension, "Synthetic process variables");
  detect_cmd->add_option("--seed", detect.seed, "Synthetic seed");
  detect_cmd->add_option("--components", detect.components, "Retained principal components");
  detect_cmd->add_option("--alpha", detect.alpha, "Significance level of the control limits");
  detect_cmd->add_flag("--header", detect.header, "CSV files start with a header row");
  detect_cmd->add_option("--timestamp-column", detect.timestamp_column, "CSV column holding the timestamp");
  detect_cmd->add_option("--out", detect.out, "Detection CSV path (default stdout)");

  TraceArgs trace;
  auto* trace_cmd = app.add_subcommand("trace", "Simulate one ReFlexUp loop and export its event trace");
  trace_cmd->add_option("config", trace.config, "Configuration file")->required();
  trace_cmd->add_option("--out", trace.out, "Trace CSV path (default stdout)");
  trace_cmd->add_option("--seed", trace.seed, "Simulation seed (overrides experiment.seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*detect_cmd) return cmd_detect(detect);
    if (*trace_cmd) return cmd_trace(trace);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
