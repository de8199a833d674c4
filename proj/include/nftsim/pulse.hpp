#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/norm.hpp"

namespace nftsim::pulse {

/// Target NFT parameters of one fundamental soliton.
struct SolitonParams {
  cplx lambda{0.0, 0.5};        // Im > 0; Re in normalized units
  cplx b_target{-1.0, 0.0};     // phase carries the data; |b| > 0
  double center_time_ps = 0.0;
  double carrier_offset_ghz = 0.0;
};

/// Per-channel frame timing (Table-I style).
struct FramePlan {
  int n_channels = 4;
  double delta_t_ps = 150.0;   // pulse-to-pulse spacing within a window
  double delta_f_ghz = 10.0;   // carrier spacing
  double window_ps = 600.0;    // 4-pulse transmission window
  double downtime_ps = 0.0;

  void validate() const {
    if (n_channels < 1) throw std::invalid_argument("FramePlan: n_channels >= 1");
    if (!(delta_f_ghz > 0.0)) throw std::invalid_argument("FramePlan: delta_f must be > 0");
    if (std::abs(window_ps - (n_channels * delta_t_ps + downtime_ps)) > 1e-9)
      throw std::invalid_argument("FramePlan: window != n_channels*delta_T + downtime");
  }

  double f_sym_gbd() const { return 1e3 / window_ps; }

  /// symmetric baseband carrier grid, (k - (n-1)/2) * delta_f
  double carrier_offset_ghz(int channel) const {
    return (channel - 0.5 * (n_channels - 1)) * delta_f_ghz;
  }
};

/// Frequency offset (GHz) -> eigenvalue real part in normalized units.
/// Baseband convention e^{+j 2 pi f t} together with the ZS convention in
/// nftsim::nft puts a +f carrier at xi = -pi f T0.
inline double xi_from_offset_ghz(double f_ghz, double t0_ps) {
  return -M_PI * f_ghz * t0_ps * 1e-3;
}
inline double offset_ghz_from_xi(double xi, double t0_ps) {
  return -xi / (M_PI * t0_ps * 1e-3);
}

/// Eq-6-style normalized frequency distance: dk = pi * df * T_FWHM / 1.763.
inline double delta_k_from_spacing(double delta_f_ghz, double t_fwhm_ps) {
  return M_PI * delta_f_ghz * t_fwhm_ps * 1e-3 / 1.763;
}
/// inverse relation, df = dk / (pi T0)
inline double spacing_from_delta_k(double delta_k, double t0_ps) {
  return delta_k / (M_PI * t0_ps * 1e-3);
}

/// Closed-form fundamental soliton in normalized units on the given grid:
///   q(tau) = 2 eta sech(2 eta (tau - tau_c)) e^{-2 j xi (tau - tau_c)} e^{j psi}
/// with psi chosen so the forward NFT returns arg{b(lambda)} = arg_b and
/// timing T = log|q~|/(2 eta) = tau_c (for eta = 1/2).
inline SampledField soliton_norm(double eta, double xi, double tau_c, double arg_b,
                                 double tau_start, double dtau, std::size_t n) {
  if (!(eta > 0.0)) throw std::invalid_argument("soliton_norm: Im{lambda} must be > 0");
  const double psi = M_PI - 2.0 * xi * tau_c - arg_b;
  SampledField f;
  f.t_start = tau_start;
  f.dt = dtau;
  f.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = f.t(i) - tau_c;
    f.samples[i] = 2.0 * eta / std::cosh(2.0 * eta * u) *
                   std::exp(J * (-2.0 * xi * u + psi));
  }
  return f;
}

/// Physical-units fundamental soliton on a caller-supplied grid (ps, sqrt(W)).
/// The grid must contain the pulse with tails below 1e-6 of peak.
inline SampledField fundamental_soliton(const SolitonParams& p, double t_start_ps,
                                        double dt_ps, std::size_t n,
                                        const norm::NormScales& s) {
  if (!(p.lambda.imag() > 0.0))
    throw std::invalid_argument("fundamental_soliton: Im{lambda} must be > 0");
  if (!(std::abs(p.b_target) > 0.0))
    throw std::invalid_argument("fundamental_soliton: |b_target| must be > 0");
  const double eta = p.lambda.imag();
  const double xi = p.lambda.real() + xi_from_offset_ghz(p.carrier_offset_ghz, s.t0_ps);
  const double tau_c = p.center_time_ps / s.t0_ps;
  const double tau0 = t_start_ps / s.t0_ps;
  const double dtau = dt_ps / s.t0_ps;
  // both edges must sit below 1e-6 of peak
  const double near_edge = std::min(std::abs(tau0 - tau_c),
                                    std::abs(tau0 + dtau * static_cast<double>(n - 1) - tau_c));
  if (1.0 / std::cosh(2.0 * eta * near_edge) > 1e-6)
    throw std::invalid_argument("fundamental_soliton: grid too short, tail above 1e-6 of peak");
  SampledField f = soliton_norm(eta, xi, tau_c, std::arg(p.b_target), tau0, dtau, n);
  f.t_start = t_start_ps;
  f.dt = dt_ps;
  const double amp = std::sqrt(s.p0_w);
  for (cplx& v : f.samples) v *= amp;
  return f;
}

/// Gray-coded QPSK onto b(lambda): 00 -> +45deg, 01 -> +135, 11 -> -135,
/// 10 -> -45; unit base magnitude.
inline std::vector<cplx> qpsk_map(const std::vector<std::uint8_t>& bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_map: odd bit count");
  std::vector<cplx> out(bits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int b1 = bits[2 * i] ? 1 : 0;
    const int b0 = bits[2 * i + 1] ? 1 : 0;
    double deg;
    if (!b1 && !b0) deg = 45.0;
    else if (!b1 && b0) deg = 135.0;
    else if (b1 && b0) deg = -135.0;
    else deg = -45.0;
    out[i] = std::exp(J * (deg * M_PI / 180.0));
  }
  return out;
}

/// inverse of qpsk_map on the decision phase
inline std::pair<std::uint8_t, std::uint8_t> qpsk_decide(double phase) {
  const double p = wrap_phase(phase);
  if (p >= 0.0 && p < M_PI_2) return {0, 0};
  if (p >= M_PI_2) return {0, 1};
  if (p < -M_PI_2) return {1, 1};
  return {1, 0};
}

/// One channel's periodic burst: one soliton per window at offset
/// channel*delta_T, one symbol per window (guards included by the caller in
/// `symbols`). Baseband by default; set apply_carrier to put the channel on
/// its own carrier (used by the dimensionless analysis paths).
inline SampledField assemble_channel(const std::vector<cplx>& symbols, const FramePlan& plan,
                                     int channel, const norm::NormScales& s, double rate_gsa,
                                     bool apply_carrier = false) {
  plan.validate();
  if (channel < 0 || channel >= plan.n_channels)
    throw std::invalid_argument("assemble_channel: channel out of range");
  if (plan.window_ps < plan.n_channels * plan.delta_t_ps)
    throw std::invalid_argument("assemble_channel: window shorter than n_channels*delta_T");

  const double dt_ps = 1e3 / rate_gsa;
  const double total_ps = static_cast<double>(symbols.size()) * plan.window_ps;
  const double n_exact = total_ps / dt_ps;
  const auto n = static_cast<std::size_t>(std::llround(n_exact));
  if (std::abs(n_exact - static_cast<double>(n)) > 1e-6)
    throw std::invalid_argument("assemble_channel: burst duration not an integer sample count");

  SampledField f;
  f.t_start = 0.0;
  f.dt = dt_ps;
  f.samples.assign(n, cplx{0.0, 0.0});

  const double eta = 0.5;
  const double t0 = s.t0_ps;
  const double f_carrier = apply_carrier ? plan.carrier_offset_ghz(channel) : 0.0;
  const double xi = xi_from_offset_ghz(f_carrier, t0);
  const double amp = std::sqrt(s.p0_w);
  // evaluate each pulse only where it is above ~1e-10 of peak
  const long long reach = static_cast<long long>(
      std::ceil((std::log(1e10) / (2.0 * eta)) * t0 / dt_ps));

  for (std::size_t w = 0; w < symbols.size(); ++w) {
    const double tc = static_cast<double>(w) * plan.window_ps + channel * plan.delta_t_ps;
    const double arg_b = std::arg(symbols[w]);
    const double tau_c = tc / t0;
    const double psi = M_PI - 2.0 * xi * tau_c - arg_b;
    const long long ic = std::llround(tc / dt_ps);
    for (long long i = ic - reach; i <= ic + reach; ++i) {
      const std::size_t idx = static_cast<std::size_t>(((i % (long long)n) + (long long)n) % (long long)n);
      // cyclic placement: evaluate at the unwrapped time of this pulse
      const double tau = (static_cast<double>(i) * dt_ps) / t0 - tau_c;
      f.samples[idx] += amp * 2.0 * eta / std::cosh(2.0 * eta * tau) *
                        std::exp(J * (-2.0 * xi * tau + psi));
    }
  }
  return f;
}

}  // namespace nftsim::pulse
