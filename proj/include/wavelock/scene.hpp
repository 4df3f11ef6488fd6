#pragma once

// Geometry and configuration data model shared by every other module.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wavelock/errors.hpp"

namespace wavelock {

using Point2 = Eigen::Vector2d;

struct SensorArray {
  std::vector<Point2> positions;
  std::vector<int> cluster_ids;

  std::size_t size() const { return positions.size(); }

  int cluster_count() const {
    if (cluster_ids.empty()) return 0;
    return *std::max_element(cluster_ids.begin(), cluster_ids.end()) + 1;
  }

  void validate() const {
    if (positions.empty()) throw ConfigError("sensor array is empty");
    if (cluster_ids.size() != positions.size())
      throw ConfigError("sensor array: cluster_id count does not match sensor count");
    for (const auto& p : positions)
      if (!p.allFinite()) throw ConfigError("sensor array: non-finite position");
    const int c = cluster_count();
    std::vector<bool> seen(static_cast<std::size_t>(std::max(c, 0)), false);
    for (int id : cluster_ids) {
      if (id < 0) throw ConfigError("sensor array: negative cluster id");
      seen[static_cast<std::size_t>(id)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      throw ConfigError("sensor array: cluster ids are not a contiguous range 0..C-1");
  }
};

struct SourceSpec {
  Point2 position{0.0, 0.0};
  std::uint64_t seed = 0;
};

struct SignalConfig {
  double center_freq = 500.0;       // Hz
  double bandwidth = 200.0;         // Hz
  double sample_rate = 4000.0;      // samples/s
  int n_t = 1000;                   // time samples
  int n_f = 1100;                   // DFT length
  double propagation_speed = 345.0; // m/s
  std::optional<double> snr_db = 20.0;  // nullopt: noiseless
  double sync_error_std = 0.0;      // seconds, 0 disables jitter

  int bin_count() const { return n_f / 2 + 1; }
  double band_low() const { return center_freq - 0.5 * bandwidth; }
  double band_high() const { return center_freq + 0.5 * bandwidth; }
  double duration() const { return n_t / sample_rate; }

  /// DFT bin index -> frequency in Hz.
  double bin_frequency(int f) const { return f * sample_rate / n_f; }

  void validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
      throw ConfigError("signal: sample_rate must be positive");
    if (!(propagation_speed > 0.0) || !std::isfinite(propagation_speed))
      throw ConfigError("signal: propagation_speed must be positive");
    if (n_t < 1) throw ConfigError("signal: n_t must be at least 1");
    if (n_f <= n_t) throw ConfigError("signal: n_f must exceed n_t");
    if (!(bandwidth > 0.0)) throw ConfigError("signal: bandwidth must be positive");
    if (!(band_low() > 0.0) || !(band_high() < 0.5 * sample_rate))
      throw ConfigError("signal: band must lie strictly inside (0, Nyquist)");
    if (snr_db && !std::isfinite(*snr_db)) throw ConfigError("signal: snr_db must be finite");
    if (!(sync_error_std >= 0.0) || !std::isfinite(sync_error_std))
      throw ConfigError("signal: sync_error_std must be non-negative");
  }
};

struct Tap {
  double gain = 0.0;   // dimensionless
  double delay = 0.0;  // samples
};

/// Multipath taps keyed by (cluster_id, source index).
struct MultipathChannel {
  std::map<std::pair<int, int>, std::vector<Tap>> taps;

  const std::vector<Tap>* find(int cluster, int source) const {
    auto it = taps.find({cluster, source});
    return it == taps.end() ? nullptr : &it->second;
  }

  bool empty() const {
    return std::all_of(taps.begin(), taps.end(), [](const auto& kv) { return kv.second.empty(); });
  }

  void validate() const {
    for (const auto& [key, list] : taps) {
      if (key.first < 0 || key.second < 0) throw ConfigError("multipath: negative key");
      for (const auto& t : list) {
        if (!std::isfinite(t.gain) || !std::isfinite(t.delay))
          throw ConfigError("multipath: non-finite tap");
        if (t.delay < 0.0) throw ConfigError("multipath: negative tap delay");
      }
    }
  }
};

/// What the estimator models: attenuation order L, estimated paths per
/// (cluster, source), the delay-only baseline, and the in-band bin mask.
struct ModelConfig {
  int attenuation_order = 2;
  int paths = 0;
  bool delay_only = false;
  bool band_only = false;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DEConfig {
  int population = 40;
  double amplification = 0.8;  // F
  double crossover = 1.0;      // C_R
  int max_generations = 5;
  std::uint64_t seed = 1;
  int stagnation_generations = 5;
  double stagnation_rtol = 1e-12;
  // Per-class search box; expanded into per-parameter bounds by the layout.
  Interval x_range{0.0, 40.0};
  Interval y_range{0.0, 40.0};
  Interval beta_range{-100.0, 100.0};
  Interval gamma_range{0.0, 1.0};
  Interval delay_range{0.0, 400.0};

  void validate() const {
    if (population < 4) throw ConfigError("de: population must be at least 4");
    if (!(amplification >= 0.0 && amplification <= 2.0))
      throw ConfigError("de: amplification F must lie in [0, 2]");
    if (!(crossover >= 0.0 && crossover <= 1.0))
      throw ConfigError("de: crossover C_R must lie in [0, 1]");
    if (max_generations < 0) throw ConfigError("de: max_generations must be non-negative");
    for (const Interval& r : {x_range, y_range, beta_range, gamma_range, delay_range})
      if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
        throw ConfigError("de: search ranges must be finite with lo <= hi");
  }
};

struct LMAConfig {
  double tau = 1e-3;             // initial damping scale
  double gradient_tol = 1e-12;   // on the normalized cost
  double step_tol = 1e-12;
  int max_iterations = 200;
  bool scaled_damping = false;   // lambda*diag(J^T J) instead of lambda*I

  void validate() const {
    if (!(tau > 0.0) || !(gradient_tol > 0.0) || !(step_tol > 0.0) || max_iterations < 1)
      throw ConfigError("lma: all settings must be positive");
  }
};

struct OptimizerConfig {
  DEConfig de;
  LMAConfig lma;
};

struct Scenario {
  SensorArray array;
  std::vector<SourceSpec> sources;
  SignalConfig signal;
  MultipathChannel channels;
  std::uint64_t noise_seed = 0;
  ModelConfig model;
  OptimizerConfig optimizer;

  void validate() const {
    array.validate();
    signal.validate();
    channels.validate();
    if (sources.empty()) throw ConfigError("scenario: at least one source is required");
    for (const auto& s : sources)
      if (!s.position.allFinite()) throw ConfigError("scenario: non-finite source position");
    if (array.size() < sources.size())
      throw ConfigError("scenario: need at least as many sensors as sources");
    if (model.attenuation_order < 0) throw ConfigError("model: attenuation_order must be >= 0");
    if (model.paths < 0) throw ConfigError("model: paths must be >= 0");
    for (const auto& [key, list] : channels.taps) {
      if (key.first >= array.cluster_count() || key.second >= static_cast<int>(sources.size()))
        throw ConfigError("multipath: key refers to an unknown cluster or source");
    }
    optimizer.de.validate();
    optimizer.lma.validate();
  }
};

// ---------------------------------------------------------------------------
// Array generators

/// Spiral c + (s/pi)(cos s, sin s) with s equally spaced over the angle range.
inline SensorArray spiral_array(int m_count, const Point2& center, Interval angle_range) {
  if (m_count < 1) throw ConfigError("spiral_array: m_count must be at least 1");
  SensorArray out;
  out.positions.reserve(static_cast<std::size_t>(m_count));
  for (int k = 0; k < m_count; ++k) {
    const double s = m_count == 1
                         ? angle_range.lo
                         : angle_range.lo + (angle_range.hi - angle_range.lo) * k / (m_count - 1);
    const double r = s / std::numbers::pi;
    out.positions.emplace_back(center.x() + r * std::cos(s), center.y() + r * std::sin(s));
  }
  out.cluster_ids.assign(static_cast<std::size_t>(m_count), 0);
  return out;
}

/// One circle of `per_array` sensors around each center; cluster id = circle index.
inline SensorArray circular_arrays(const std::vector<Point2>& centers, int per_array, double radius) {
  if (centers.empty()) throw ConfigError("circular_arrays: no centers given");
  if (per_array < 1) throw ConfigError("circular_arrays: per_array must be at least 1");
  if (!(radius > 0.0)) throw ConfigError("circular_arrays: radius must be positive");
  SensorArray out;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int k = 0; k < per_array; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / per_array;
      out.positions.emplace_back(centers[c].x() + radius * std::cos(phi),
                                 centers[c].y() + radius * std::sin(phi));
      out.cluster_ids.push_back(static_cast<int>(c));
    }
  }
  return out;
}

inline double distance(const Point2& sensor, const Point2& source) {
  return (sensor - source).norm();
}

/// Propagation delay in (fractional) samples.
inline double delay_samples(double rho, const SignalConfig& cfg) {
  if (!(rho > 0.0)) throw DomainError("delay_samples: distance must be positive");
  return rho * cfg.sample_rate / cfg.propagation_speed;
}

/// Distance that is guaranteed non-degenerate; throws for coincident points.
inline double checked_distance(const Point2& sensor, const Point2& source, int m, int n) {
  const double rho = distance(sensor, source);
  if (!(rho > 0.0)) throw DegenerateGeometryError(m, n);
  return rho;
}

}  // namespace wavelock
