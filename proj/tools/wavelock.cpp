// wavelock command-line front end.
//
//   wavelock synth scenario.json -o data.bin
//   wavelock localize scenario.json [--data data.bin] [--baseline delay-only] [--paper-scale] -o result.json
//   wavelock crlb scenario.json [--snr-grid 0:10:30] [-o bounds.csv]
//   wavelock sweep scenario.json --var duration --grid 0.1:0.1:1.0 --trials 50 [-o sweep.csv]
//   wavelock make-scenario example1|example2 [...] -o scenario.json
//
// Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavelock/harness.hpp"
#include "wavelock/io.hpp"

namespace {

using namespace wavelock;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text(path, text);
}

Scenario load_with_scale(const std::string& path, bool paper_scale) {
  Scenario sc = load_scenario(path);
  if (paper_scale) apply_scale(sc.signal, Scale::paper);
  sc.validate();
  return sc;
}

struct Options {
  std::string scenario;
  std::string output;
  bool paper_scale = false;
  // synth
  bool json_container = false;
  // localize
  std::string data;
  std::string baseline = "none";
  std::string trace;
  bool timing = false;
  // crlb
  std::string snr_grid;
  std::string convention = "literal";
  // sweep
  std::string var = "duration";
  std::string grid;
  int trials = 20;
  std::string agg = "rms";
  bool no_baseline = false;
  bool no_crlb = false;
  // make-scenario
  std::string example;
  std::string variant = "single_at_12_10";
  double sync_ms = 0.0;
  bool multipath = false;
  std::uint64_t noise_seed = 7;
  std::uint64_t de_seed = 1;
};

int cmd_synth(const Options& o) {
  const Scenario sc = load_with_scale(o.scenario, o.paper_scale);
  const Synthesis syn = synthesize(sc);
  if (o.output.empty()) throw ConfigError("synth: -o is required");
  if (o.json_container)
    write_text(o.output, spectrum_to_json(syn.data, sc).dump() + "\n");
  else
    save_spectrum(o.output, syn.data, sc);
  std::fprintf(stderr, "wrote %d x %d spectrum (noise variance per bin %.6g)\n", syn.data.sensors(), syn.data.bins(),
               syn.data.noise_variance_freq);
  return 0;
}

int cmd_localize(const Options& o) {
  if (o.baseline != "none" && o.baseline != "delay-only")
    throw ConfigError("--baseline must be 'none' or 'delay-only'");
  Scenario sc = load_with_scale(o.scenario, o.paper_scale);
  SpectrumData data;
  if (!o.data.empty()) {
    SpectrumFile f = load_spectrum(o.data);
    if (f.data.n_f != sc.signal.n_f || f.data.sensors() != static_cast<int>(sc.array.size()))
      throw ConfigError(o.data + ": spectrum does not match the scenario");
    data = std::move(f.data);
  } else {
    data = synthesize(sc).data;
  }
  const ExperimentResult r = localize(sc, data, o.baseline == "delay-only", default_threads());
  emit(o.output, result_to_json(r, o.timing).dump(2) + "\n");
  if (!o.trace.empty()) write_text(o.trace, trace_to_csv(r.trace, r.layout.size()));
  return 0;
}

int cmd_crlb(const Options& o) {
  const Scenario sc = load_with_scale(o.scenario, o.paper_scale);
  FisherConvention conv = FisherConvention::literal;
  if (o.convention == "circular")
    conv = FisherConvention::circular;
  else if (o.convention != "literal")
    throw ConfigError("--convention must be 'literal' or 'circular'");
  std::vector<double> snrs;
  if (o.snr_grid.empty()) {
    if (!sc.signal.snr_db) throw ConfigError("crlb: scenario has no snr_db and no --snr-grid was given");
    snrs.push_back(*sc.signal.snr_db);
  } else {
    snrs = parse_grid(o.snr_grid);
  }
  std::string out = "snr_db,source,var_x,var_y,sqrt_x,sqrt_y,singular\n";
  for (double snr : snrs) {
    Scenario point = sc;
    point.signal.snr_db = snr;
    const CrlbReport rep = crlb_report(point, conv);
    for (std::size_t n = 0; n < rep.bounds.size(); ++n) {
      const auto& b = rep.bounds[n];
      out += format_double(snr) + "," + std::to_string(n) + "," + format_double(b.var_x) + "," +
             format_double(b.var_y) + "," + format_double(std::sqrt(b.var_x)) + "," +
             format_double(std::sqrt(b.var_y)) + "," + (rep.singular ? "1" : "0") + "\n";
    }
  }
  emit(o.output, out);
  return 0;
}

int cmd_sweep(const Options& o) {
  const Scenario sc = load_with_scale(o.scenario, o.paper_scale);
  SweepSpec spec;
  spec.var = parse_sweep_var(o.var);
  if (o.grid.empty()) throw ConfigError("sweep: --grid is required");
  spec.grid = parse_grid(o.grid);
  spec.trials = o.trials;
  spec.agg = parse_aggregation(o.agg);
  spec.with_baseline = !o.no_baseline;
  spec.with_crlb = !o.no_crlb;
  emit(o.output, sweep_to_csv(run_sweep(spec, sc, default_threads())));
  return 0;
}

int cmd_make_scenario(const Options& o) {
  const Scale scale = o.paper_scale ? Scale::paper : Scale::desk;
  const RunSeeds seeds{o.noise_seed, o.de_seed};
  Scenario sc;
  if (o.example == "example1")
    sc = example1_scenario(parse_example1_variant(o.variant), scale, seeds);
  else if (o.example == "example2")
    sc = example2_scenario(o.sync_ms, o.multipath, scale, seeds);
  else
    throw ConfigError("make-scenario: expected 'example1' or 'example2'");
  emit(o.output, to_json(sc).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wideband acoustic source localization"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Simulate sensor spectra for a scenario");
  synth->add_option("scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--output", o.output, "Spectrum container (.json for the JSON variant)")->required();
  synth->add_flag("--json", o.json_container, "Write the JSON container regardless of extension");
  synth->add_flag("--paper-scale", o.paper_scale, "Use n_t = 4000, n_f = 4100");

  auto* loc = app.add_subcommand("localize", "Estimate source positions");
  loc->add_option("scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  loc->add_option("--data", o.data, "Spectrum container; simulated from the scenario when omitted")
      ->check(CLI::ExistingFile);
  loc->add_option("--baseline", o.baseline, "none | delay-only");
  loc->add_flag("--paper-scale", o.paper_scale, "Use n_t = 4000, n_f = 4100");
  loc->add_option("-o,--output", o.output, "Result JSON (stdout when omitted)");
  loc->add_option("--trace", o.trace, "Optimizer trace CSV");
  loc->add_flag("--timing", o.timing, "Include wall time in the result");

  auto* crlb = app.add_subcommand("crlb", "Cramer-Rao bounds on the source positions");
  crlb->add_option("scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  crlb->add_option("--snr-grid", o.snr_grid, "start:step:stop or comma list, dB");
  crlb->add_option("--convention", o.convention, "literal | circular");
  crlb->add_flag("--paper-scale", o.paper_scale, "Use n_t = 4000, n_f = 4100");
  crlb->add_option("-o,--output", o.output, "CSV (stdout when omitted)");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep against the delay-only baseline");
  sweep->add_option("scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--var", o.var, "duration (s) | snr (dB) | sync_std (ms)");
  sweep->add_option("--grid", o.grid, "start:step:stop or comma list")->required();
  sweep->add_option("--trials", o.trials, "Noise realizations per grid value")->check(CLI::PositiveNumber);
  sweep->add_option("--agg", o.agg, "mean | median | rms");
  sweep->add_flag("--no-baseline", o.no_baseline, "Skip the delay-only baseline");
  sweep->add_flag("--no-crlb", o.no_crlb, "Skip the bound columns");
  sweep->add_flag("--paper-scale", o.paper_scale, "Use n_t = 4000, n_f = 4100");
  sweep->add_option("-o,--output", o.output, "CSV (stdout when omitted)");

  auto* make = app.add_subcommand("make-scenario", "Write one of the reference scenarios");
  make->add_option("example", o.example, "example1 | example2")->required();
  make->add_option("--variant", o.variant, "single_at_4_3 | single_at_12_10 | two_sources");
  make->add_option("--sync-ms", o.sync_ms, "Clock jitter std in ms (example2)");
  make->add_flag("--multipath", o.multipath, "Add the default multipath profile (example2)");
  make->add_option("--noise-seed", o.noise_seed, "Noise seed");
  make->add_option("--de-seed", o.de_seed, "Optimizer seed");
  make->add_flag("--paper-scale", o.paper_scale, "Use n_t = 4000, n_f = 4100");
  make->add_option("-o,--output", o.output, "Scenario JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*loc) return cmd_localize(o);
    if (*crlb) return cmd_crlb(o);
    if (*sweep) return cmd_sweep(o);
    if (*make) return cmd_make_scenario(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
