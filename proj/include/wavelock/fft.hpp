#pragma once

// Thin wrapper over Eigen's FFT (kissfft backend, arbitrary lengths).

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace wavelock {

using cplx = std::complex<double>;

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}
}  // namespace detail

/// Full n-point DFT of a real sequence zero-padded (or truncated) to n.
inline std::vector<cplx> dft_real(const std::vector<double>& x, int n) {
  std::vector<cplx> in(static_cast<std::size_t>(n), cplx{0.0, 0.0});
  for (std::size_t t = 0; t < x.size() && t < in.size(); ++t) in[t] = x[t];
  std::vector<cplx> out(in.size());
  detail::fft_engine().fwd(out.data(), in.data(), n);
  return out;
}

/// Inverse DFT including the 1/n normalization.
inline std::vector<cplx> idft(const std::vector<cplx>& spectrum) {
  std::vector<cplx> out(spectrum.size());
  detail::fft_engine().inv(out.data(), spectrum.data(), static_cast<Eigen::Index>(spectrum.size()));
  return out;
}

}  // namespace wavelock
