#pragma once

// Scenario JSON, spectrum containers (binary and JSON), and CSV helpers.
//
// Binary spectrum container, little-endian:
//   char[8]  magic "WVLKSPEC"
//   u32      version (1)
//   u32      M (sensors)
//   u32      n_f
//   u32      bins (n_f/2 + 1)
//   u32      bytes per real scalar (4: complex64, 8: complex128)
//   f64      mean noise variance per bin (n_t sigma^2)
//   u8       1 if per-sensor variances follow, else 0
//   f64[M]   per-sensor noise variance (only when flagged)
//   u64      length of the scenario JSON that follows
//   u8[...]  scenario JSON (UTF-8)
//   M x bins (re, im) pairs, row-major by sensor

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavelock/errors.hpp"
#include "wavelock/scene.hpp"
#include "wavelock/synth.hpp"

namespace wavelock {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "spectrum container assumes a little-endian host");

/// I/O failure with the offending path in the message.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what) {}
};

/// 17 significant digits; bit-stable for identical inputs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// -- Scenario <-> JSON ------------------------------------------------------------

namespace detail {

inline json interval_json(const Interval& r) { return json::array({r.lo, r.hi}); }

inline Interval interval_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + ": expected [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Point2 point_from(const json& j, const char* what) {
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) return {j.at("x").get<double>(), j.at("y").get<double>()};
  throw ConfigError(std::string(what) + ": expected [x, y] or {\"x\", \"y\"}");
}

inline SensorArray array_from_generator(const json& g) {
  const std::string type = g.at("type").get<std::string>();
  if (type == "spiral") {
    return spiral_array(g.at("count").get<int>(), point_from(g.at("center"), "array.center"),
                        interval_from(g.at("angle_range"), "array.angle_range"));
  }
  if (type == "circular") {
    std::vector<Point2> centers;
    for (const auto& c : g.at("centers")) centers.push_back(point_from(c, "array.centers"));
    return circular_arrays(centers, g.at("per_array").get<int>(), g.value("radius", 1.5));
  }
  throw ConfigError("array: unknown generator type '" + type + "'");
}

}  // namespace detail

inline json to_json(const Scenario& sc) {
  json j;
  json sensors = json::array();
  for (std::size_t m = 0; m < sc.array.size(); ++m)
    sensors.push_back({{"x", sc.array.positions[m].x()},
                       {"y", sc.array.positions[m].y()},
                       {"cluster", sc.array.cluster_ids[m]}});
  j["sensors"] = sensors;
  json sources = json::array();
  for (const auto& s : sc.sources) sources.push_back({{"x", s.position.x()}, {"y", s.position.y()}, {"seed", s.seed}});
  j["sources"] = sources;
  const auto& g = sc.signal;
  j["signal"] = {{"center_freq", g.center_freq},
                 {"bandwidth", g.bandwidth},
                 {"sample_rate", g.sample_rate},
                 {"n_t", g.n_t},
                 {"n_f", g.n_f},
                 {"propagation_speed", g.propagation_speed},
                 {"snr_db", g.snr_db ? json(*g.snr_db) : json(nullptr)},
                 {"sync_error_std", g.sync_error_std}};
  json channels = json::array();
  for (const auto& [key, taps] : sc.channels.taps) {
    json tj = json::array();
    for (const auto& t : taps) tj.push_back({{"gain", t.gain}, {"delay", t.delay}});
    channels.push_back({{"cluster", key.first}, {"source", key.second}, {"taps", tj}});
  }
  j["channels"] = channels;
  j["noise_seed"] = sc.noise_seed;
  j["attenuation_order"] = sc.model.attenuation_order;
  j["model"] = {{"multipath_paths", sc.model.paths},
                {"baseline", sc.model.delay_only ? "delay-only" : "none"},
                {"band_only", sc.model.band_only}};
  const auto& de = sc.optimizer.de;
  const auto& lma = sc.optimizer.lma;
  j["optimizer"] = {
      {"de",
       {{"population", de.population},
        {"amplification", de.amplification},
        {"crossover", de.crossover},
        {"max_generations", de.max_generations},
        {"seed", de.seed},
        {"stagnation_generations", de.stagnation_generations},
        {"stagnation_rtol", de.stagnation_rtol},
        {"x_range", detail::interval_json(de.x_range)},
        {"y_range", detail::interval_json(de.y_range)},
        {"beta_range", detail::interval_json(de.beta_range)},
        {"gamma_range", detail::interval_json(de.gamma_range)},
        {"delay_range", detail::interval_json(de.delay_range)}}},
      {"lma",
       {{"tau", lma.tau},
        {"gradient_tol", lma.gradient_tol},
        {"step_tol", lma.step_tol},
        {"max_iterations", lma.max_iterations},
        {"scaled_damping", lma.scaled_damping}}}};
  return j;
}

/// Parses a scenario. Missing optional sections keep their defaults; the
/// sensor list may be given explicitly ("sensors") or as a generator ("array").
inline Scenario scenario_from_json(const json& j) {
  try {
    Scenario sc;
    if (j.contains("sensors")) {
      for (const auto& s : j.at("sensors")) {
        sc.array.positions.push_back(detail::point_from(s, "sensors"));
        sc.array.cluster_ids.push_back(s.is_object() ? s.value("cluster", 0) : 0);
      }
    } else if (j.contains("array")) {
      sc.array = detail::array_from_generator(j.at("array"));
    } else {
      throw ConfigError("scenario: needs \"sensors\" or \"array\"");
    }
    for (const auto& s : j.at("sources")) {
      SourceSpec spec;
      spec.position = detail::point_from(s, "sources");
      spec.seed = s.is_object() ? s.value("seed", std::uint64_t{0}) : 0;
      sc.sources.push_back(spec);
    }
    if (j.contains("signal")) {
      const auto& g = j.at("signal");
      auto& s = sc.signal;
      s.center_freq = g.value("center_freq", s.center_freq);
      s.bandwidth = g.value("bandwidth", s.bandwidth);
      s.sample_rate = g.value("sample_rate", s.sample_rate);
      s.n_t = g.value("n_t", s.n_t);
      s.n_f = g.value("n_f", s.n_f);
      s.propagation_speed = g.value("propagation_speed", s.propagation_speed);
      if (g.contains("snr_db")) {
        if (g.at("snr_db").is_null())
          s.snr_db.reset();
        else
          s.snr_db = g.at("snr_db").get<double>();
      }
      s.sync_error_std = g.value("sync_error_std", s.sync_error_std);
    }
    if (j.contains("channels")) {
      for (const auto& c : j.at("channels")) {
        std::vector<Tap> taps;
        for (const auto& t : c.at("taps")) taps.push_back({t.at("gain").get<double>(), t.at("delay").get<double>()});
        sc.channels.taps[{c.at("cluster").get<int>(), c.at("source").get<int>()}] = std::move(taps);
      }
    }
    sc.noise_seed = j.value("noise_seed", std::uint64_t{0});
    sc.model.attenuation_order = j.value("attenuation_order", sc.model.attenuation_order);
    if (j.contains("model")) {
      const auto& m = j.at("model");
      sc.model.paths = m.value("multipath_paths", sc.model.paths);
      const std::string baseline = m.value("baseline", std::string("none"));
      if (baseline != "none" && baseline != "delay-only")
        throw ConfigError("model.baseline must be \"none\" or \"delay-only\"");
      sc.model.delay_only = baseline == "delay-only";
      sc.model.band_only = m.value("band_only", sc.model.band_only);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      if (o.contains("de")) {
        const auto& d = o.at("de");
        auto& de = sc.optimizer.de;
        de.population = d.value("population", de.population);
        de.amplification = d.value("amplification", de.amplification);
        de.crossover = d.value("crossover", de.crossover);
        de.max_generations = d.value("max_generations", de.max_generations);
        de.seed = d.value("seed", de.seed);
        de.stagnation_generations = d.value("stagnation_generations", de.stagnation_generations);
        de.stagnation_rtol = d.value("stagnation_rtol", de.stagnation_rtol);
        if (d.contains("x_range")) de.x_range = detail::interval_from(d.at("x_range"), "de.x_range");
        if (d.contains("y_range")) de.y_range = detail::interval_from(d.at("y_range"), "de.y_range");
        if (d.contains("beta_range")) de.beta_range = detail::interval_from(d.at("beta_range"), "de.beta_range");
        if (d.contains("gamma_range")) de.gamma_range = detail::interval_from(d.at("gamma_range"), "de.gamma_range");
        if (d.contains("delay_range")) de.delay_range = detail::interval_from(d.at("delay_range"), "de.delay_range");
      }
      if (o.contains("lma")) {
        const auto& l = o.at("lma");
        auto& lma = sc.optimizer.lma;
        lma.tau = l.value("tau", lma.tau);
        lma.gradient_tol = l.value("gradient_tol", lma.gradient_tol);
        lma.step_tol = l.value("step_tol", lma.step_tol);
        lma.max_iterations = l.value("max_iterations", lma.max_iterations);
        lma.scaled_damping = l.value("scaled_damping", lma.scaled_damping);
      }
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  if (!out) throw IoError(path, "write failed");
}

inline Scenario load_scenario(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const std::string& path, const Scenario& sc) { write_text(path, to_json(sc).dump(2) + "\n"); }

/// Content hash (FNV-1a 64) of the canonical scenario JSON, as 16 hex digits.
inline std::string scenario_hash(const Scenario& sc) {
  const std::string canon = to_json(sc).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// -- Spectrum containers --------------------------------------------------------------

inline constexpr char kSpectrumMagic[8] = {'W', 'V', 'L', 'K', 'S', 'P', 'E', 'C'};

struct SpectrumFile {
  SpectrumData data;
  Scenario scenario;
};

namespace detail {
template <class T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T take(const std::string& buf, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > buf.size()) throw IoError(path, "truncated spectrum container");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
}  // namespace detail

inline std::string encode_spectrum_binary(const SpectrumData& d, const Scenario& sc, bool single_precision = false) {
  std::string buf(kSpectrumMagic, sizeof kSpectrumMagic);
  detail::put<std::uint32_t>(buf, 1);
  detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.sensors()));
  detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.n_f));
  detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.bins()));
  detail::put<std::uint32_t>(buf, single_precision ? 4u : 8u);
  detail::put<double>(buf, d.noise_variance_freq);
  const bool per_sensor = d.sensor_noise_variance.size() == d.sensors();
  detail::put<std::uint8_t>(buf, per_sensor ? 1 : 0);
  if (per_sensor)
    for (int m = 0; m < d.sensors(); ++m) detail::put<double>(buf, d.sensor_noise_variance(m));
  const std::string sj = to_json(sc).dump();
  detail::put<std::uint64_t>(buf, sj.size());
  buf += sj;
  for (int m = 0; m < d.sensors(); ++m)
    for (int f = 0; f < d.bins(); ++f) {
      if (single_precision) {
        detail::put<float>(buf, static_cast<float>(d.X(m, f).real()));
        detail::put<float>(buf, static_cast<float>(d.X(m, f).imag()));
      } else {
        detail::put<double>(buf, d.X(m, f).real());
        detail::put<double>(buf, d.X(m, f).imag());
      }
    }
  return buf;
}

inline SpectrumFile decode_spectrum_binary(const std::string& buf, const std::string& path = "<memory>") {
  if (buf.size() < sizeof kSpectrumMagic || std::memcmp(buf.data(), kSpectrumMagic, sizeof kSpectrumMagic) != 0)
    throw IoError(path, "not a wavelock spectrum container");
  std::size_t pos = sizeof kSpectrumMagic;
  const auto version = detail::take<std::uint32_t>(buf, pos, path);
  if (version != 1) throw IoError(path, "unsupported container version " + std::to_string(version));
  const auto M = detail::take<std::uint32_t>(buf, pos, path);
  const auto n_f = detail::take<std::uint32_t>(buf, pos, path);
  const auto bins = detail::take<std::uint32_t>(buf, pos, path);
  const auto width = detail::take<std::uint32_t>(buf, pos, path);
  if (width != 4 && width != 8) throw IoError(path, "bad scalar width");
  SpectrumFile out;
  out.data.n_f = static_cast<int>(n_f);
  out.data.noise_variance_freq = detail::take<double>(buf, pos, path);
  if (detail::take<std::uint8_t>(buf, pos, path) != 0) {
    out.data.sensor_noise_variance.resize(M);
    for (std::uint32_t m = 0; m < M; ++m) out.data.sensor_noise_variance(m) = detail::take<double>(buf, pos, path);
  }
  const auto len = detail::take<std::uint64_t>(buf, pos, path);
  if (pos + len > buf.size()) throw IoError(path, "truncated scenario block");
  out.scenario = scenario_from_json(json::parse(buf.substr(pos, len)));
  pos += len;
  out.data.X.resize(M, bins);
  for (std::uint32_t m = 0; m < M; ++m)
    for (std::uint32_t f = 0; f < bins; ++f) {
      double re = 0.0, im = 0.0;
      if (width == 4) {
        re = detail::take<float>(buf, pos, path);
        im = detail::take<float>(buf, pos, path);
      } else {
        re = detail::take<double>(buf, pos, path);
        im = detail::take<double>(buf, pos, path);
      }
      out.data.X(m, f) = {re, im};
    }
  if (pos != buf.size()) throw IoError(path, "trailing bytes after spectrum data");
  return out;
}

inline json spectrum_to_json(const SpectrumData& d, const Scenario& sc) {
  json rows = json::array();
  for (int m = 0; m < d.sensors(); ++m) {
    json row = json::array();
    for (int f = 0; f < d.bins(); ++f) {
      row.push_back(d.X(m, f).real());
      row.push_back(d.X(m, f).imag());
    }
    rows.push_back(std::move(row));
  }
  json j = {{"format", "wavelock-spectrum"},
            {"version", 1},
            {"sensors", d.sensors()},
            {"n_f", d.n_f},
            {"bins", d.bins()},
            {"noise_variance_freq", d.noise_variance_freq},
            {"scenario", to_json(sc)},
            {"data", rows}};
  if (d.sensor_noise_variance.size() == d.sensors())
    j["sensor_noise_variance"] = std::vector<double>(d.sensor_noise_variance.data(),
                                                     d.sensor_noise_variance.data() + d.sensors());
  return j;
}

inline SpectrumFile spectrum_from_json(const json& j) {
  if (j.value("format", std::string{}) != "wavelock-spectrum") throw ConfigError("not a wavelock spectrum document");
  SpectrumFile out;
  out.scenario = scenario_from_json(j.at("scenario"));
  out.data.n_f = j.at("n_f").get<int>();
  out.data.noise_variance_freq = j.at("noise_variance_freq").get<double>();
  const int M = j.at("sensors").get<int>();
  if (j.contains("sensor_noise_variance")) {
    const auto v = j.at("sensor_noise_variance").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != M) throw ConfigError("spectrum JSON: sensor_noise_variance length mismatch");
    out.data.sensor_noise_variance = Eigen::Map<const Eigen::VectorXd>(v.data(), M);
  }
  const int B = j.at("bins").get<int>();
  out.data.X.resize(M, B);
  const auto& rows = j.at("data");
  for (int m = 0; m < M; ++m)
    for (int f = 0; f < B; ++f)
      out.data.X(m, f) = {rows.at(m).at(2 * f).get<double>(), rows.at(m).at(2 * f + 1).get<double>()};
  return out;
}

/// Writes binary unless the path ends in ".json".
inline void save_spectrum(const std::string& path, const SpectrumData& d, const Scenario& sc) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    write_text(path, spectrum_to_json(d, sc).dump() + "\n");
  else
    write_text(path, encode_spectrum_binary(d, sc));
}

inline SpectrumFile load_spectrum(const std::string& path) {
  const std::string raw = read_text(path);
  if (!raw.empty() && raw.front() == '{') return spectrum_from_json(json::parse(raw));
  return decode_spectrum_binary(raw, path);
}

// -- CSV ------------------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace wavelock
