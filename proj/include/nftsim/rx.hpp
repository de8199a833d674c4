#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/fft.hpp"
#include "nftsim/nft.hpp"
#include "nftsim/norm.hpp"
#include "nftsim/pulse.hpp"
#include "nftsim/txchain.hpp"

namespace nftsim::rx {

/// Four parallel coherent single-channel receivers; LOs sit on the
/// transmitted carrier grid and are never retuned (collision-induced
/// frequency shifts are deliberately not tracked).
struct RxConfig {
  std::vector<double> lo_frequencies_ghz;  // = transmitted carrier grid
  txchain::FilterSpec optical_filter = txchain::FilterSpec::gaussian_bw(7.0);
  double adc_rate_gsa = 80.0;
  double window_ps = 600.0;  // single-channel pulse-to-pulse repetition time
};

/// Equalizer input: deviations of the fixed transmitted (a', lambda) plus the
/// received b components.
struct FeatureVector {
  double d_aprime_re = 0.0, d_aprime_im = 0.0;
  double d_lambda_re = 0.0, d_lambda_im = 0.0;
  double b_re = 0.0, b_im = 0.0;
};

struct RxSymbol {
  int channel = 0;
  int window_index = 0;
  bool erasure = false;          // no eigenvalue found in the window
  nft::DiscreteEigen eigen{};    // valid when !erasure
  FeatureVector feature{};
  std::uint8_t decided_bits[2] = {0, 0};
};

/// Downconvert channel `k` to baseband (shift by -LO), apply the narrow
/// optical filter at the nominal carrier and resample to the ADC rate.
inline SampledField demux_channel(const SampledField& field, const RxConfig& cfg, int channel) {
  if (channel < 0 || channel >= (int)cfg.lo_frequencies_ghz.size())
    throw std::invalid_argument("demux_channel: channel out of range");
  SampledField f = frequency_shift(field, -cfg.lo_frequencies_ghz[channel] * 1e-3);
  f = txchain::apply_filter(f, cfg.optical_filter.at(0.0));
  const double rate = 1e3 / f.dt;
  if (std::abs(rate - cfg.adc_rate_gsa) > 1e-9) f = resample(f, cfg.adc_rate_gsa * 1e-3);
  return f;
}

/// Cyclic extraction of one repetition period centred at `center_ps`
/// (absolute burst time). The result is re-referenced so the nominal pulse
/// position is t = 0.
inline SampledField truncate_window(const SampledField& burst, double center_ps,
                                    double window_ps) {
  const auto n = static_cast<long long>(burst.size());
  const auto m = static_cast<long long>(std::llround(window_ps / burst.dt));
  if (m < 2 || m > n) throw std::invalid_argument("truncate_window: bad window length");
  const long long i0 = std::llround((center_ps - 0.5 * window_ps - burst.t_start) / burst.dt);
  SampledField out;
  out.dt = burst.dt;
  out.samples.resize(m);
  for (long long i = 0; i < m; ++i) {
    const long long idx = (((i0 + i) % n) + n) % n;
    out.samples[i] = burst.samples[idx];
  }
  // re-reference: sample i sits at (i0 + i) dt + t_start - center
  out.t_start = static_cast<double>(i0) * burst.dt + burst.t_start - center_ps;
  return out;
}

/// window-index form: nominal position = window*W + channel*delta_T plus the
/// deterministic per-channel group-delay walk of the link
inline SampledField truncate_window(const SampledField& burst, int window_index,
                                    const pulse::FramePlan& plan, int channel,
                                    double drift_ps = 0.0) {
  if (window_index < 0 ||
      static_cast<double>(window_index) * plan.window_ps >= burst.duration())
    throw std::invalid_argument("truncate_window: window index outside burst");
  const double center =
      window_index * plan.window_ps + channel * plan.delta_t_ps + drift_ps;
  return truncate_window(burst, center, plan.window_ps);
}

struct DetectOptions {
  nft::SolverOptions solver;
  double amp_ref_w = 0.0;  // amplitude normalization; 0 -> use scales.p0_w
};

/// NFT detection on one truncated window: normalize into NFT units, Newton
/// from the known transmitted eigenvalue, build the deviation features.
/// a'_Tx is the isolated-soliton value 1/(2 j Im{lambda_Tx}).
inline RxSymbol detect_symbol(const SampledField& window, cplx tx_lambda,
                              const norm::NormScales& scales, const DetectOptions& opt = {},
                              int channel = 0, int window_index = 0) {
  RxSymbol sym;
  sym.channel = channel;
  sym.window_index = window_index;

  norm::NormScales s = scales;
  if (opt.amp_ref_w > 0.0) s.p0_w = opt.amp_ref_w;
  SampledField q = norm::to_normalized(window, s);

  const cplx seeds[1] = {tx_lambda};
  auto eigs = nft::find_eigenvalues(q, std::span<const cplx>(seeds, 1), std::nullopt,
                                    opt.solver);
  if (eigs.empty()) {
    sym.erasure = true;
    return sym;
  }
  // nearest to the seed if several survive
  std::size_t best = 0;
  for (std::size_t i = 1; i < eigs.size(); ++i)
    if (std::abs(eigs[i].lambda - tx_lambda) < std::abs(eigs[best].lambda - tx_lambda))
      best = i;
  sym.eigen = eigs[best];

  const cplx aprime_tx = 1.0 / (2.0 * J * tx_lambda.imag());
  const cplx d_ap = aprime_tx - sym.eigen.a_prime;
  const cplx d_l = tx_lambda - sym.eigen.lambda;
  sym.feature = {d_ap.real(), d_ap.imag(), d_l.real(), d_l.imag(),
                 sym.eigen.b.real(), sym.eigen.b.imag()};
  return sym;
}

/// QPSK decision on b after constant de-rotation (estimated from training).
inline void decide_symbol(RxSymbol& sym, double derotation) {
  if (sym.erasure) return;
  auto [b1, b0] = pulse::qpsk_decide(std::arg(sym.eigen.b) - derotation);
  sym.decided_bits[0] = b1;
  sym.decided_bits[1] = b0;
}

// pre-FEC thresholds quoted with the BER figures
inline constexpr double kSdFecLimit = 2.2e-2;
inline constexpr double kHdFecLimit = 3.8e-3;

struct BerResult {
  std::size_t n_bits = 0;
  double n_errors = 0.0;  // erasures contribute 0.5 per bit
  std::vector<std::size_t> error_positions;
  double ber() const { return n_bits ? n_errors / static_cast<double>(n_bits) : 0.0; }
  bool sd_fec_pass() const { return ber() <= kSdFecLimit; }
  bool hd_fec_pass() const { return ber() <= kHdFecLimit; }
};

inline BerResult ber_count(const std::vector<std::uint8_t>& decided,
                           const std::vector<std::uint8_t>& reference) {
  if (decided.size() != reference.size())
    throw std::invalid_argument("ber_count: length mismatch");
  BerResult r;
  r.n_bits = decided.size();
  for (std::size_t i = 0; i < decided.size(); ++i) {
    if (decided[i] != reference[i]) {
      r.n_errors += 1.0;
      r.error_positions.push_back(i);
    }
  }
  return r;
}

/// BER over symbol records; erasures count as random decisions
/// (0.5 error per bit).
inline BerResult ber_count(const std::vector<RxSymbol>& symbols,
                           const std::vector<std::uint8_t>& reference_bits) {
  if (reference_bits.size() != 2 * symbols.size())
    throw std::invalid_argument("ber_count: length mismatch");
  BerResult r;
  r.n_bits = reference_bits.size();
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i].erasure) {
      r.n_errors += 1.0;  // 0.5 per bit, 2 bits
      continue;
    }
    for (int k = 0; k < 2; ++k) {
      if (symbols[i].decided_bits[k] != reference_bits[2 * i + k]) {
        r.n_errors += 1.0;
        r.error_positions.push_back(2 * i + k);
      }
    }
  }
  return r;
}

}  // namespace nftsim::rx
