#pragma once

// Experiment drivers: the two reference geometries, single localization runs,
// pseudo-true CRLB evaluation, Monte-Carlo sweeps, and result/trace/sweep export.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavelock/attenuation.hpp"
#include "wavelock/cost.hpp"
#include "wavelock/crlb.hpp"
#include "wavelock/errors.hpp"
#include "wavelock/io.hpp"
#include "wavelock/layout.hpp"
#include "wavelock/optimize.hpp"
#include "wavelock/parallel.hpp"
#include "wavelock/rng.hpp"
#include "wavelock/scene.hpp"
#include "wavelock/synth.hpp"

namespace wavelock {

enum class Scale { desk, paper };

/// Desk scale: n_t = 1000, n_f = 1100. Paper scale: n_t = 4000, n_f = 4100.
inline void apply_scale(SignalConfig& s, Scale scale) {
  s.n_t = scale == Scale::paper ? 4000 : 1000;
  s.n_f = s.n_t + 100;
}

// -- Reference scenarios ------------------------------------------------------------------

enum class Example1Variant { single_at_4_3, single_at_12_10, two_sources };

inline Example1Variant parse_example1_variant(const std::string& s) {
  if (s == "single_at_4_3") return Example1Variant::single_at_4_3;
  if (s == "single_at_12_10") return Example1Variant::single_at_12_10;
  if (s == "two_sources") return Example1Variant::two_sources;
  throw ConfigError("unknown example-1 variant '" + s + "'");
}

struct RunSeeds {
  std::uint64_t noise = 7;
  std::uint64_t de = 1;
};

/// Seeds for trial k of a seeded batch.
inline RunSeeds trial_seeds(std::uint64_t base, int k) {
  return {derive_seed(base, 0x6e, static_cast<std::uint64_t>(k)), derive_seed(base, 0x64, static_cast<std::uint64_t>(k))};
}

/// Spiral of 40 sensors around (4, 4), s in [2 pi, 4 pi], 500 +- 100 Hz at
/// 4 kHz, 20 dB, L = 2, DE with G = 5, N_P = 40, F = 0.8, C_R = 1.
inline Scenario example1_scenario(Example1Variant variant, Scale scale = Scale::desk, RunSeeds seeds = {}) {
  Scenario sc;
  sc.array = spiral_array(40, {4.0, 4.0}, {2.0 * std::numbers::pi, 4.0 * std::numbers::pi});
  switch (variant) {
    case Example1Variant::single_at_4_3: sc.sources = {{{4.0, 3.0}, 11}}; break;
    case Example1Variant::single_at_12_10: sc.sources = {{{12.0, 10.0}, 12}}; break;
    case Example1Variant::two_sources: sc.sources = {{{4.0, 3.0}, 11}, {{12.0, 10.0}, 12}}; break;
  }
  apply_scale(sc.signal, scale);
  sc.signal.snr_db = 20.0;
  sc.noise_seed = seeds.noise;
  sc.model.attenuation_order = 2;
  sc.optimizer.de.population = 40;
  sc.optimizer.de.amplification = 0.8;
  sc.optimizer.de.crossover = 1.0;
  sc.optimizer.de.max_generations = 5;
  sc.optimizer.de.seed = seeds.de;
  return sc;
}

/// Three-tap profile per (cluster, source): gains 0.5/0.3/0.2 of the direct
/// path's true attenuation at the cluster center, delays 60/140/260 samples
/// shifted by 20 samples per cluster index.
inline MultipathChannel default_multipath_profile(const SensorArray& array, const std::vector<SourceSpec>& sources) {
  const int C = array.cluster_count();
  std::vector<Point2> centers(static_cast<std::size_t>(C), Point2::Zero());
  std::vector<int> counts(static_cast<std::size_t>(C), 0);
  for (std::size_t m = 0; m < array.size(); ++m) {
    centers[static_cast<std::size_t>(array.cluster_ids[m])] += array.positions[m];
    ++counts[static_cast<std::size_t>(array.cluster_ids[m])];
  }
  MultipathChannel ch;
  for (int c = 0; c < C; ++c) {
    const Point2 center = centers[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
    for (std::size_t n = 0; n < sources.size(); ++n) {
      const double a = true_model_eval(distance(center, sources[n].position));
      const double shift = 20.0 * c;
      ch.taps[{c, static_cast<int>(n)}] = {{0.5 * a, 60.0 + shift}, {0.3 * a, 140.0 + shift}, {0.2 * a, 260.0 + shift}};
    }
  }
  return ch;
}

/// Three circles of 25 sensors (radius 1.5 m) at (15,5), (2,15), (5,28);
/// source at (35,25); L = 1; G = 20. With multipath, one path per cluster is
/// estimated.
inline Scenario example2_scenario(double sync_std_ms, bool multipath, Scale scale = Scale::desk, RunSeeds seeds = {}) {
  Scenario sc;
  sc.array = circular_arrays({{15.0, 5.0}, {2.0, 15.0}, {5.0, 28.0}}, 25, 1.5);
  sc.sources = {{{35.0, 25.0}, 21}};
  apply_scale(sc.signal, scale);
  sc.signal.snr_db = 20.0;
  sc.signal.sync_error_std = sync_std_ms * 1e-3;
  if (multipath) sc.channels = default_multipath_profile(sc.array, sc.sources);
  sc.noise_seed = seeds.noise;
  sc.model.attenuation_order = 1;
  sc.model.paths = multipath ? 1 : 0;
  sc.optimizer.de.max_generations = 20;
  sc.optimizer.de.seed = seeds.de;
  return sc;
}

// -- Single runs ------------------------------------------------------------------------

struct ExperimentResult {
  std::string scenario_hash;
  ParamLayout layout;
  Eigen::VectorXd theta;
  std::vector<Point2> estimated;
  std::vector<Point2> truth;
  std::vector<double> errors;  // per true source, under the best assignment
  double cost = 0.0;           // normalized
  int de_generations = 0;
  int lma_iterations = 0;
  std::string lma_status;
  RunSeeds seeds;
  bool baseline = false;
  double wall_time = 0.0;  // seconds
  OptimizerTrace trace;
};

/// Errors of estimated positions against the truth under the source
/// permutation minimizing the summed error.
inline std::vector<double> match_errors(const std::vector<Point2>& estimated, const std::vector<Point2>& truth) {
  if (estimated.size() != truth.size()) throw ConfigError("match_errors: source count mismatch");
  std::vector<int> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> best;
  double best_sum = std::numeric_limits<double>::infinity();
  do {
    std::vector<double> e(truth.size());
    double sum = 0.0;
    for (std::size_t n = 0; n < truth.size(); ++n) {
      e[n] = (estimated[static_cast<std::size_t>(perm[n])] - truth[n]).norm();
      sum += e[n];
    }
    if (sum < best_sum) {
      best_sum = sum;
      best = e;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Runs the hybrid optimizer on `data` with the scenario's model (or the
/// delay-only baseline).
inline ExperimentResult localize(const Scenario& scenario, const SpectrumData& data, bool baseline = false,
                                 int threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig model = scenario.model;
  if (baseline) model.delay_only = true;
  const Problem problem(scenario, data, model);
  const HybridResult hr = hybrid_minimize(problem, scenario.optimizer.de, scenario.optimizer.lma, threads);

  ExperimentResult r;
  r.scenario_hash = scenario_hash(scenario);
  r.layout = problem.layout();
  r.theta = hr.theta;
  r.estimated = decode(r.layout, hr.theta).positions;
  for (const auto& s : scenario.sources) r.truth.push_back(s.position);
  r.errors = match_errors(r.estimated, r.truth);
  r.cost = hr.cost;
  r.de_generations = hr.de_generations;
  r.lma_iterations = hr.lma_iterations;
  r.lma_status = hr.lma_status;
  r.seeds = {scenario.noise_seed, scenario.optimizer.de.seed};
  r.baseline = baseline;
  r.trace = hr.trace;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline ExperimentResult localize(const Scenario& scenario, bool baseline = false, int threads = 1) {
  return localize(scenario, synthesize(scenario).data, baseline, threads);
}

inline ExperimentResult run_example1(Example1Variant variant, Scale scale = Scale::desk, RunSeeds seeds = {},
                                     int threads = 1) {
  return localize(example1_scenario(variant, scale, seeds), false, threads);
}

inline ExperimentResult run_example2(double sync_std_ms, bool multipath, Scale scale = Scale::desk,
                                     RunSeeds seeds = {}, int threads = 1) {
  return localize(example2_scenario(sync_std_ms, multipath, scale, seeds), false, threads);
}

// -- CRLB at a scenario ------------------------------------------------------------------

/// theta with true positions, beta = 0, and for each estimated path the
/// strongest configured tap of that (cluster, source).
inline Eigen::VectorXd nominal_theta(const Scenario& sc, const ParamLayout& layout) {
  DecodedParams d;
  for (const auto& s : sc.sources) d.positions.push_back(s.position);
  d.beta.assign(static_cast<std::size_t>(layout.order), 0.0);
  d.gamma.assign(static_cast<std::size_t>(layout.path_count()), 0.0);
  d.delay.assign(static_cast<std::size_t>(layout.path_count()), 0.0);
  for (int c = 0; c < layout.clusters; ++c)
    for (int n = 0; n < layout.sources; ++n) {
      std::vector<Tap> taps;
      if (const auto* t = sc.channels.find(c, n)) taps = *t;
      std::stable_sort(taps.begin(), taps.end(), [](const Tap& a, const Tap& b) { return a.gain > b.gain; });
      for (int p = 0; p < layout.paths && p < static_cast<int>(taps.size()); ++p) {
        const int k = layout.path(c, n, p);
        d.gamma[static_cast<std::size_t>(k)] = taps[static_cast<std::size_t>(p)].gain;
        d.delay[static_cast<std::size_t>(k)] = taps[static_cast<std::size_t>(p)].delay;
      }
    }
  return encode(layout, d);
}

struct CrlbReport {
  Eigen::VectorXd theta;  // pseudo-true parameters
  std::vector<PositionBound> bounds;
  bool singular = false;
  double noise_variance_freq = 0.0;
};

/// Bounds at the pseudo-true parameters: LMA on the noiseless, jitter-free
/// data started from nominal_theta; S is the least-squares spectrum there.
/// The noise level is that of the scenario's SNR.
inline CrlbReport crlb_report(const Scenario& scenario, FisherConvention conv = FisherConvention::literal) {
  if (!scenario.signal.snr_db) throw ConfigError("crlb: scenario needs a finite snr_db");
  Scenario clean = scenario;
  clean.signal.sync_error_std = 0.0;
  const Synthesis syn = synthesize(clean);
  SpectrumData noiseless = syn.data;
  noiseless.X = syn.clean;
  const Problem problem(clean, noiseless, clean.model);

  LocalizationObjective objective(problem);
  LMAConfig lcfg = scenario.optimizer.lma;
  lcfg.max_iterations = std::max(lcfg.max_iterations, 500);
  const LmaResult fit = lma_minimize(
      nominal_theta(clean, problem.layout()), [&](const VectorXd& t) { return objective.residual(t); },
      [&](const VectorXd& t) { return objective.jacobian(t); }, lcfg);

  const CMatrix S = recover_spectrum(problem, fit.theta);
  const FisherMatrix fm = fisher(problem, fit.theta, S, syn.data.sensor_noise_variance, conv);
  const CrlbResult cr = crlb_positions(fm);
  return {fit.theta, cr.positions, cr.singular, syn.data.noise_variance_freq};
}

// -- Sweeps ----------------------------------------------------------------------------------

enum class SweepVar { duration, snr, sync_std };
enum class Aggregation { mean, median, rms };

inline SweepVar parse_sweep_var(const std::string& s) {
  if (s == "duration") return SweepVar::duration;
  if (s == "snr") return SweepVar::snr;
  if (s == "sync_std") return SweepVar::sync_std;
  throw ConfigError("unknown sweep variable '" + s + "' (duration | snr | sync_std)");
}

inline const char* sweep_var_name(SweepVar v) {
  switch (v) {
    case SweepVar::duration: return "duration";
    case SweepVar::snr: return "snr";
    case SweepVar::sync_std: return "sync_std";
  }
  return "?";
}

inline Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "median") return Aggregation::median;
  if (s == "rms") return Aggregation::rms;
  throw ConfigError("unknown aggregation '" + s + "' (mean | median | rms)");
}

/// "a:step:b" (inclusive, tolerant to rounding) or a comma list.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  try {
    if (spec.find(':') != std::string::npos) {
      const auto parts = split_csv_line([&] {
        std::string s = spec;
        std::replace(s.begin(), s.end(), ':', ',');
        return s;
      }());
      if (parts.size() != 3) throw ConfigError("grid: expected start:step:stop");
      const double a = std::stod(parts[0]), step = std::stod(parts[1]), b = std::stod(parts[2]);
      if (!(step > 0.0) || b < a) throw ConfigError("grid: need step > 0 and stop >= start");
      const auto n = static_cast<int>(std::floor((b - a) / step + 1e-9));
      for (int k = 0; k <= n; ++k) out.push_back(a + k * step);
    } else {
      for (const auto& p : split_csv_line(spec))
        if (!p.empty()) out.push_back(std::stod(p));
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("grid: cannot parse '" + spec + "'");
  }
  return out;
}

struct SweepSpec {
  SweepVar var = SweepVar::duration;
  std::vector<double> grid;
  int trials = 20;
  Aggregation agg = Aggregation::rms;
  bool with_crlb = true;
  bool with_baseline = true;

  void validate() const {
    if (grid.empty()) throw ConfigError("sweep: grid is empty");
    if (trials < 1) throw ConfigError("sweep: trials must be at least 1");
  }
};

/// Scenario at one grid value. Duration is in seconds (n_t = d N_s,
/// n_f = n_t + 100), snr in dB, sync_std in milliseconds.
inline Scenario apply_sweep_value(Scenario sc, SweepVar var, double value) {
  switch (var) {
    case SweepVar::duration:
      sc.signal.n_t = static_cast<int>(std::lround(value * sc.signal.sample_rate));
      sc.signal.n_f = sc.signal.n_t + 100;
      break;
    case SweepVar::snr: sc.signal.snr_db = value; break;
    case SweepVar::sync_std: sc.signal.sync_error_std = value * 1e-3; break;
  }
  return sc;
}

inline double aggregate(std::vector<double> v, Aggregation agg) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  switch (agg) {
    case Aggregation::mean: return pairwise_sum(v) / static_cast<double>(v.size());
    case Aggregation::median: {
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    case Aggregation::rms: {
      for (double& x : v) x *= x;
      return std::sqrt(pairwise_sum(v) / static_cast<double>(v.size()));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct MethodStats {
  int failures = 0;
  double error = std::numeric_limits<double>::quiet_NaN();   // aggregate of per-source errors
  double rmse_x = std::numeric_limits<double>::quiet_NaN();  // pooled over sources and trials
  double rmse_y = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> errors;  // raw per-source errors of successful trials
};

struct SweepRow {
  double value = 0.0;
  int trials = 0;
  MethodStats full;
  MethodStats baseline;
  double crlb_x = std::numeric_limits<double>::quiet_NaN();  // sqrt of the bound, mean over sources
  double crlb_y = std::numeric_limits<double>::quiet_NaN();
};

struct SweepTable {
  SweepVar var = SweepVar::duration;
  std::vector<SweepRow> rows;
};

namespace detail {
struct TrialOutcome {
  bool ok = false;
  std::vector<double> errors, dx, dy;
};

inline TrialOutcome outcome_of(const ExperimentResult& r) {
  TrialOutcome o;
  o.ok = true;
  o.errors = r.errors;
  // dx, dy under the same assignment as the errors
  for (std::size_t n = 0; n < r.truth.size(); ++n) {
    double best = std::numeric_limits<double>::infinity();
    Point2 d = Point2::Zero();
    for (const auto& e : r.estimated) {
      const double dist = (e - r.truth[n]).norm();
      if (std::abs(dist - r.errors[n]) < best) {
        best = std::abs(dist - r.errors[n]);
        d = e - r.truth[n];
      }
    }
    o.dx.push_back(d.x());
    o.dy.push_back(d.y());
  }
  return o;
}

inline MethodStats summarize(const std::vector<TrialOutcome>& outs, Aggregation agg) {
  MethodStats s;
  std::vector<double> sx, sy;
  for (const auto& o : outs) {
    if (!o.ok) {
      ++s.failures;
      continue;
    }
    s.errors.insert(s.errors.end(), o.errors.begin(), o.errors.end());
    for (double v : o.dx) sx.push_back(v * v);
    for (double v : o.dy) sy.push_back(v * v);
  }
  if (!s.errors.empty()) {
    s.error = aggregate(s.errors, agg);
    s.rmse_x = std::sqrt(pairwise_sum(sx) / static_cast<double>(sx.size()));
    s.rmse_y = std::sqrt(pairwise_sum(sy) / static_cast<double>(sy.size()));
  }
  return s;
}
}  // namespace detail

/// Runs `trials` noise realizations per grid value for the full model and
/// (optionally) the delay-only baseline on the same data. Trial k at grid
/// index g uses seeds derived from (scenario seeds, g, k). Failed trials are
/// counted, not fatal.
inline SweepTable run_sweep(const SweepSpec& spec, const Scenario& base, int threads = 1) {
  spec.validate();
  SweepTable table;
  table.var = spec.var;
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    const Scenario point = apply_sweep_value(base, spec.var, spec.grid[g]);
    point.validate();
    std::vector<detail::TrialOutcome> full(static_cast<std::size_t>(spec.trials));
    std::vector<detail::TrialOutcome> baseline(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, threads, [&](int k) {
      Scenario sc = point;
      sc.noise_seed = derive_seed(base.noise_seed, g, static_cast<std::uint64_t>(k));
      sc.optimizer.de.seed = derive_seed(base.optimizer.de.seed, g, static_cast<std::uint64_t>(k));
      try {
        const SpectrumData data = synthesize(sc).data;
        try {
          full[static_cast<std::size_t>(k)] = detail::outcome_of(localize(sc, data, false, 1));
        } catch (const NumericalError&) {
        } catch (const DomainError&) {
        }
        if (spec.with_baseline) {
          try {
            baseline[static_cast<std::size_t>(k)] = detail::outcome_of(localize(sc, data, true, 1));
          } catch (const NumericalError&) {
          } catch (const DomainError&) {
          }
        }
      } catch (const NumericalError&) {
      }
    });
    SweepRow row;
    row.value = spec.grid[g];
    row.trials = spec.trials;
    row.full = detail::summarize(full, spec.agg);
    if (spec.with_baseline) row.baseline = detail::summarize(baseline, spec.agg);
    if (spec.with_crlb && point.signal.snr_db) {
      try {
        const CrlbReport cr = crlb_report(point, FisherConvention::circular);
        double vx = 0.0, vy = 0.0;
        for (const auto& b : cr.bounds) {
          vx += std::sqrt(b.var_x);
          vy += std::sqrt(b.var_y);
        }
        row.crlb_x = vx / static_cast<double>(cr.bounds.size());
        row.crlb_y = vy / static_cast<double>(cr.bounds.size());
      } catch (const NumericalError&) {
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// -- Export -------------------------------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "var,value,trials,full_failures,baseline_failures,full_error,baseline_error,"
    "full_rmse_x,full_rmse_y,baseline_rmse_x,baseline_rmse_y,crlb_sqrt_x,crlb_sqrt_y";

inline std::string sweep_to_csv(const SweepTable& t) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const auto& r : t.rows) {
    out += std::string(sweep_var_name(t.var)) + "," + format_double(r.value) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.full.failures) + "," + std::to_string(r.baseline.failures) + "," +
           format_double(r.full.error) + "," + format_double(r.baseline.error) + "," + format_double(r.full.rmse_x) +
           "," + format_double(r.full.rmse_y) + "," + format_double(r.baseline.rmse_x) + "," +
           format_double(r.baseline.rmse_y) + "," + format_double(r.crlb_x) + "," + format_double(r.crlb_y) + "\n";
  }
  return out;
}

/// Header: phase,iter,cost,aux,theta_0,...,theta_{D-1}.
inline std::string trace_to_csv(const OptimizerTrace& trace, int dims) {
  std::string out = "phase,iter,cost,aux";
  for (int i = 0; i < dims; ++i) out += ",theta_" + std::to_string(i);
  out += "\n";
  for (const auto& e : trace) {
    if (e.theta.size() != dims) throw ConfigError("trace: entry dimension does not match the header");
    out += std::string(phase_name(e.phase)) + "," + std::to_string(e.iteration) + "," + format_double(e.cost) + "," +
           format_double(e.aux);
    for (Eigen::Index i = 0; i < e.theta.size(); ++i) out += "," + format_double(e.theta(i));
    out += "\n";
  }
  return out;
}

inline OptimizerTrace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace CSV: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "phase" || header[1] != "iter" || header[2] != "cost" || header[3] != "aux")
    throw ConfigError("trace CSV: unexpected header");
  const auto dims = static_cast<Eigen::Index>(header.size() - 4);
  OptimizerTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<Eigen::Index>(f.size()) != dims + 4)
      throw ConfigError("trace CSV line " + std::to_string(lineno) + ": wrong field count");
    TraceEntry e;
    if (f[0] == "DE")
      e.phase = Phase::de;
    else if (f[0] == "LMA")
      e.phase = Phase::lma;
    else
      throw ConfigError("trace CSV line " + std::to_string(lineno) + ": unknown phase");
    e.iteration = std::stoi(f[1]);
    e.cost = std::strtod(f[2].c_str(), nullptr);
    e.aux = std::strtod(f[3].c_str(), nullptr);
    e.theta.resize(dims);
    for (Eigen::Index i = 0; i < dims; ++i) e.theta(i) = std::strtod(f[static_cast<std::size_t>(4 + i)].c_str(), nullptr);
    trace.push_back(std::move(e));
  }
  return trace;
}

/// Result document. Wall time is left out unless requested so that repeated
/// runs produce identical bytes.
inline json result_to_json(const ExperimentResult& r, bool include_timing = false) {
  json j;
  j["scenario_hash"] = r.scenario_hash;
  j["method"] = r.baseline ? "delay-only" : "full";
  j["layout"] = {{"sources", r.layout.sources},
                 {"attenuation_order", r.layout.order},
                 {"clusters", r.layout.clusters},
                 {"paths", r.layout.paths},
                 {"delay_only", r.layout.delay_only}};
  json params = json::object();
  std::vector<double> theta(r.theta.data(), r.theta.data() + r.theta.size());
  for (int i = 0; i < r.layout.size(); ++i) params[r.layout.name(i)] = r.theta(i);
  j["theta"] = theta;
  j["parameters"] = params;
  json sources = json::array();
  for (std::size_t n = 0; n < r.truth.size(); ++n)
    sources.push_back({{"true", {r.truth[n].x(), r.truth[n].y()}}, {"error", r.errors[n]}});
  json est = json::array();
  for (const auto& p : r.estimated) est.push_back({p.x(), p.y()});
  j["estimated_positions"] = est;
  j["sources"] = sources;
  j["cost"] = r.cost;
  j["de_generations"] = r.de_generations;
  j["lma_iterations"] = r.lma_iterations;
  j["lma_status"] = r.lma_status;
  j["seeds"] = {{"noise", r.seeds.noise}, {"de", r.seeds.de}};
  if (include_timing) j["wall_time"] = r.wall_time;
  return j;
}

}  // namespace wavelock
