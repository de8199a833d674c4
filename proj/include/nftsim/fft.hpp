#pragma once

#include <unsupported/Eigen/FFT>

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nftsim/core.hpp"

namespace nftsim {

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;  // caches plans per size
  return fft;
}
}  // namespace detail

inline void fft_forward(const std::vector<cplx>& in, std::vector<cplx>& out) {
  detail::fft_engine().fwd(out, in);
}

inline void fft_inverse(const std::vector<cplx>& in, std::vector<cplx>& out) {
  detail::fft_engine().inv(out, in);  // scaled by 1/N
}

/// bin frequency in cycles per time-unit; k >= n/2 maps to negative bins
inline double fft_bin_freq(std::size_t k, std::size_t n, double dt) {
  double f = static_cast<double>(k) / (static_cast<double>(n) * dt);
  if (2 * k >= n) f -= 1.0 / dt;
  return f;
}

/// multiply by e^{+j 2 pi df t}: spectrum moves up by df
inline SampledField frequency_shift(const SampledField& f, double df) {
  SampledField out = f;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.samples[i] *= std::exp(J * (2.0 * M_PI * df * f.t(i)));
  }
  return out;
}

/// circular bandlimited time shift by `delay` (same grid); the burst is
/// treated as periodic.
inline SampledField fractional_delay(const SampledField& f, double delay) {
  std::vector<cplx> spec;
  fft_forward(f.samples, spec);
  const std::size_t n = spec.size();
  for (std::size_t k = 0; k < n; ++k) {
    double nu = fft_bin_freq(k, n, f.dt);
    spec[k] *= std::exp(-J * (2.0 * M_PI * nu * delay));
  }
  SampledField out;
  out.t_start = f.t_start;
  out.dt = f.dt;
  fft_inverse(spec, out.samples);
  return out;
}

/// FFT resampling of a periodic burst to a new rate. The new sample count
/// must land on an integer: duration * new_rate integral.
inline SampledField resample(const SampledField& f, double new_rate) {
  const std::size_t n = f.size();
  const double exact = f.duration() * new_rate;
  const std::size_t m = static_cast<std::size_t>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(m)) > 1e-6)
    throw std::invalid_argument("resample: burst duration not commensurate with new rate");
  if (m == n) return f;

  std::vector<cplx> spec;
  fft_forward(f.samples, spec);
  std::vector<cplx> spec2(m, cplx{0.0, 0.0});
  const std::size_t keep = std::min(n, m);
  const std::size_t half = keep / 2;
  // copy the low-|frequency| bins, preserving bin identity
  for (std::size_t k = 0; k < half; ++k) spec2[k] = spec[k];
  for (std::size_t k = 1; k <= keep - half; ++k) spec2[m - k] = spec[n - k];
  const double amp = static_cast<double>(m) / static_cast<double>(n);
  for (cplx& v : spec2) v *= amp;

  SampledField out;
  out.t_start = f.t_start;
  out.dt = 1.0 / new_rate;
  fft_inverse(spec2, out.samples);
  return out;
}

}  // namespace nftsim
