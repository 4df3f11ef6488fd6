#pragma once

// Forward simulator: sensor spectra from a Scenario with the true rho^-1.25
// attenuation, fractional delays applied in the frequency domain, multipath
// taps, white Gaussian noise and optional per-sensor clock jitter.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wavelock/attenuation.hpp"
#include "wavelock/errors.hpp"
#include "wavelock/fft.hpp"
#include "wavelock/rng.hpp"
#include "wavelock/scene.hpp"

namespace wavelock {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct SourceSignal {
  std::vector<double> samples;  // n_t real samples, unit RMS
  CVector spectrum;             // full n_f-point DFT of the zero-padded samples
};

/// Observed half spectra: rows are sensors, columns bins 0..n_f/2.
struct SpectrumData {
  CMatrix X;
  int n_f = 0;
  double noise_variance_freq = 0.0;      // mean over sensors of n_t * sigma_m^2
  Eigen::VectorXd sensor_noise_variance;  // n_t * sigma_m^2 per sensor; empty when noiseless

  int sensors() const { return static_cast<int>(X.rows()); }
  int bins() const { return static_cast<int>(X.cols()); }
};

struct Synthesis {
  SpectrumData data;
  CMatrix clean;                       // noiseless half spectra
  std::vector<SourceSignal> signals;   // ground truth per source
  Eigen::VectorXd jitter_samples;      // zeta_m * N_s per sensor
  Eigen::VectorXd signal_power;        // in-band received power per sample, per sensor
  Eigen::VectorXd noise_sigma;         // time-domain noise std per sensor
};

namespace detail {
inline constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
inline constexpr std::uint64_t kJitterStream = 0x6a6974746572ULL;

inline cplx unit_phase(double cycles) {
  const double a = -2.0 * std::numbers::pi * cycles;
  return {std::cos(a), std::sin(a)};
}
}  // namespace detail

/// Band-limited white Gaussian source: brick-wall mask over
/// [center - BW/2, center + BW/2] on the n_t-point DFT, unit RMS.
inline SourceSignal generate_source_signal(const SignalConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int n_t = cfg.n_t;
  Rng rng(seed);
  std::vector<double> white(static_cast<std::size_t>(n_t));
  for (double& w : white) w = standard_normal(rng);

  std::vector<cplx> spec = dft_real(white, n_t);
  int kept = 0;
  for (int k = 0; k < n_t; ++k) {
    const int folded = std::min(k, n_t - k);
    const double freq = folded * cfg.sample_rate / n_t;
    if (freq >= cfg.band_low() && freq <= cfg.band_high()) {
      ++kept;
    } else {
      spec[static_cast<std::size_t>(k)] = 0.0;
    }
  }
  if (kept == 0) throw ConfigError("source signal: no DFT bin falls inside the band (n_t too small)");

  const std::vector<cplx> shaped = idft(spec);
  SourceSignal out;
  out.samples.resize(static_cast<std::size_t>(n_t));
  double power = 0.0;
  for (int t = 0; t < n_t; ++t) {
    out.samples[static_cast<std::size_t>(t)] = shaped[static_cast<std::size_t>(t)].real();
    power += out.samples[static_cast<std::size_t>(t)] * out.samples[static_cast<std::size_t>(t)];
  }
  const double scale = 1.0 / std::sqrt(power / n_t);
  for (double& s : out.samples) s *= scale;

  const std::vector<cplx> full = dft_real(out.samples, cfg.n_f);
  out.spectrum = Eigen::Map<const CVector>(full.data(), static_cast<Eigen::Index>(full.size()));
  return out;
}

/// Frequency response of a tap list at DFT bin f: sum_p gamma_p e^{-j 2 pi f tau_p / n_f}.
inline cplx tap_response(std::span<const Tap> taps, int f, int n_f) {
  cplx h{0.0, 0.0};
  for (const Tap& t : taps) h += t.gain * detail::unit_phase(f * t.delay / n_f);
  return h;
}

/// Multipath contribution sum_p gamma_p e^{-j2 pi f tau_p/n_f} S(f) for bins 0..len-1.
inline CVector apply_multipath_profile(const MultipathChannel& channel, int cluster_id, int source,
                                       const CVector& spectrum, int n_f) {
  CVector out = CVector::Zero(spectrum.size());
  const auto* taps = channel.find(cluster_id, source);
  if (taps == nullptr) return out;
  for (const Tap& t : *taps)
    if (t.delay < 0.0) throw ConfigError("multipath: negative tap delay");
  for (Eigen::Index f = 0; f < spectrum.size(); ++f)
    out(f) = tap_response(*taps, static_cast<int>(f), n_f) * spectrum(f);
  return out;
}

/// Energy of the real time signal whose half spectrum (bins 0..n_f/2) is given,
/// via Parseval: (1/n_f) * sum over the full conjugate-symmetric spectrum.
inline double half_spectrum_energy(const Eigen::Ref<const CVector>& half, int n_f) {
  double e = 0.0;
  const Eigen::Index last = half.size() - 1;
  for (Eigen::Index f = 0; f <= last; ++f) {
    const double w = (f == 0 || (n_f % 2 == 0 && f == last)) ? 1.0 : 2.0;
    const double a = (n_f % 2 == 0 && f == last && f != 0) ? half(f).real() : std::abs(half(f));
    e += w * a * a;
  }
  return e / n_f;
}

/// Parseval energy restricted to bins inside [center - BW/2, center + BW/2].
inline double in_band_energy(const Eigen::Ref<const CVector>& half, const SignalConfig& cfg) {
  CVector masked = half;
  for (Eigen::Index f = 0; f < masked.size(); ++f) {
    const double hz = cfg.bin_frequency(static_cast<int>(f));
    if (hz < cfg.band_low() || hz > cfg.band_high()) masked(f) = 0.0;
  }
  return half_spectrum_energy(masked, cfg.n_f);
}

/// Full n_f-point conjugate-symmetric spectrum from a half spectrum. The
/// Nyquist bin (even n_f) keeps only its real part so the time signal is real.
inline CVector full_spectrum(const Eigen::Ref<const CVector>& half, int n_f) {
  CVector full(n_f);
  const int nb = n_f / 2 + 1;
  for (int f = 0; f < nb; ++f) full(f) = half(f);
  full(0) = full(0).real();
  if (n_f % 2 == 0) full(n_f / 2) = full(n_f / 2).real();
  for (int f = nb; f < n_f; ++f) full(f) = std::conj(half(n_f - f));
  return full;
}

inline Synthesis synthesize(const Scenario& scenario) {
  scenario.validate();
  const SignalConfig& cfg = scenario.signal;
  const auto& sensors = scenario.array.positions;
  const int M = static_cast<int>(sensors.size());
  const int N = static_cast<int>(scenario.sources.size());
  const int nb = cfg.bin_count();

  Synthesis out;
  out.signals.reserve(static_cast<std::size_t>(N));
  for (const auto& src : scenario.sources) out.signals.push_back(generate_source_signal(cfg, src.seed));

  out.jitter_samples = Eigen::VectorXd::Zero(M);
  if (cfg.sync_error_std > 0.0) {
    const double half_width = std::sqrt(3.0) * cfg.sync_error_std;
    for (int m = 0; m < M; ++m) {
      Rng rng(derive_seed(scenario.noise_seed, detail::kJitterStream, static_cast<std::uint64_t>(m)));
      const double zeta = (2.0 * uniform01(rng) - 1.0) * half_width;
      out.jitter_samples(m) = zeta * cfg.sample_rate;
    }
  }

  out.clean = CMatrix::Zero(M, nb);
  for (int m = 0; m < M; ++m) {
    const int cluster = scenario.array.cluster_ids[static_cast<std::size_t>(m)];
    for (int n = 0; n < N; ++n) {
      const double rho = checked_distance(sensors[static_cast<std::size_t>(m)],
                                          scenario.sources[static_cast<std::size_t>(n)].position, m, n);
      const double gain = true_model_eval(rho);
      const double tau = delay_samples(rho, cfg) - out.jitter_samples(m);
      const CVector& S = out.signals[static_cast<std::size_t>(n)].spectrum;
      const auto* taps = scenario.channels.find(cluster, n);
      for (int f = 0; f < nb; ++f) {
        cplx h = gain * detail::unit_phase(f * tau / cfg.n_f);
        if (taps != nullptr) h += tap_response(*taps, f, cfg.n_f);
        out.clean(m, f) += h * S(f);
      }
    }
  }

  out.signal_power.resize(M);
  for (int m = 0; m < M; ++m) out.signal_power(m) = in_band_energy(out.clean.row(m).transpose(), cfg) / cfg.n_t;

  out.data.n_f = cfg.n_f;
  out.data.X = out.clean;
  out.noise_sigma = Eigen::VectorXd::Zero(M);
  if (cfg.snr_db) {
    // Each sensor gets its own noise level so that its SNR equals snr_db.
    const double ratio = std::pow(10.0, *cfg.snr_db / 10.0);
    out.noise_sigma = (out.signal_power / ratio).cwiseSqrt();
    out.data.sensor_noise_variance = cfg.n_t * out.noise_sigma.cwiseAbs2();
    out.data.noise_variance_freq = out.data.sensor_noise_variance.mean();
    std::vector<double> w(static_cast<std::size_t>(cfg.n_t));
    for (int m = 0; m < M; ++m) {
      Rng rng(derive_seed(scenario.noise_seed, detail::kNoiseStream, static_cast<std::uint64_t>(m)));
      for (double& v : w) v = out.noise_sigma(m) * standard_normal(rng);
      const std::vector<cplx> xi = dft_real(w, cfg.n_f);
      for (int f = 0; f < nb; ++f) out.data.X(m, f) += xi[static_cast<std::size_t>(f)];
    }
  }
  return out;
}

}  // namespace wavelock
