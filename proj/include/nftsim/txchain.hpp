#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/fft.hpp"
#include "nftsim/pulse.hpp"
#include "nftsim/rng.hpp"

namespace nftsim::txchain {

/// Analog filter prototype evaluated as a complex baseband response.
struct FilterSpec {
  enum class Kind { chebyshev1, gaussian };
  Kind kind = Kind::chebyshev1;
  int order = 4;
  double bw_3db_ghz = 17.5;
  double center_ghz = 0.0;
  double ripple_db = 0.5;  // chebyshev only

  void validate() const {
    if (order < 1) throw std::invalid_argument("FilterSpec: order >= 1");
    if (!(bw_3db_ghz > 0.0)) throw std::invalid_argument("FilterSpec: bw must be > 0");
  }

  FilterSpec at(double center) const {
    FilterSpec s = *this;
    s.center_ghz = center;
    return s;
  }

  static FilterSpec chebyshev(int order, double bw_ghz, double center = 0.0,
                              double ripple = 0.5) {
    return {Kind::chebyshev1, order, bw_ghz, center, ripple};
  }
  static FilterSpec gaussian_bw(double bw_ghz, double center = 0.0) {
    return {Kind::gaussian, 1, bw_ghz, center, 0.0};
  }
};

/// Complex response at frequency f (GHz). Chebyshev uses the true analog
/// prototype poles (causal phase); Gaussian filters are taken real.
inline cplx filter_response(const FilterSpec& spec, double f_ghz) {
  if (!std::isfinite(spec.bw_3db_ghz) || spec.bw_3db_ghz > 1e9) return 1.0;  // all-pass
  const double df = f_ghz - spec.center_ghz;
  if (spec.kind == FilterSpec::Kind::gaussian) {
    const double x = df / (0.5 * spec.bw_3db_ghz);
    return std::exp(-0.5 * std::log(2.0) * x * x);
  }
  // Chebyshev type I lowpass prototype, -3 dB point rescaled to bw/2
  const int n = spec.order;
  const double eps = std::sqrt(std::pow(10.0, spec.ripple_db / 10.0) - 1.0);
  const double x3 = std::cosh(std::acosh(1.0 / eps) / n);  // ripple-edge -> -3 dB
  const double a = std::asinh(1.0 / eps) / n;
  const cplx s = J * (df / ((0.5 * spec.bw_3db_ghz) / x3));
  cplx denom = 1.0, k_num = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double th = (2 * k - 1) * M_PI / (2 * n);
    const cplx p{-std::sinh(a) * std::sin(th), std::cosh(a) * std::cos(th)};
    denom *= (s - p);
    k_num *= -p;
  }
  cplx h = k_num / denom;
  if (n % 2 == 0) h /= std::sqrt(1.0 + eps * eps);  // even order: DC in the ripple trough
  return h;
}

/// Frequency-domain application of a filter to a periodic burst (times in ps).
inline SampledField apply_filter(const SampledField& f, const FilterSpec& spec) {
  spec.validate();
  const double rate_ghz = 1e3 / f.dt;
  if (std::isfinite(spec.bw_3db_ghz) && spec.bw_3db_ghz < 1e9 &&
      rate_ghz <= 2.0 * (std::abs(spec.center_ghz) + spec.bw_3db_ghz))
    throw std::invalid_argument("apply_filter: sampling rate too low for this filter band");
  std::vector<cplx> spec_v;
  fft_forward(f.samples, spec_v);
  const std::size_t n = spec_v.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double f_ghz = fft_bin_freq(k, n, f.dt) * 1e3;  // cycles/ps -> GHz
    spec_v[k] *= filter_response(spec, f_ghz);
  }
  SampledField out;
  out.t_start = f.t_start;
  out.dt = f.dt;
  fft_inverse(spec_v, out.samples);
  return out;
}

/// DAC model: vertical resolution, analog bandwidth, sampling rate.
struct DacModel {
  int bits = 6;
  double bandwidth_ghz = 20.0;
  double rate_gsa = 92.0;

  void validate() const {
    if (bits < 1) throw std::invalid_argument("DacModel: bits >= 1");
    if (!(rate_gsa > 2.0 * bandwidth_ghz))
      throw std::invalid_argument("DacModel: rate must exceed 2x analog bandwidth");
  }
};

/// Mid-tread I/Q quantization over the signal's full scale, 2nd-order smooth
/// analog response, then resampling to the converter rate.
inline SampledField dac_convert(const SampledField& f, const DacModel& m) {
  m.validate();
  SampledField q = f;
  double fs = 0.0;
  for (const cplx& v : q.samples)
    fs = std::max({fs, std::abs(v.real()), std::abs(v.imag())});
  if (fs > 0.0) {
    const double delta = 2.0 * fs / std::pow(2.0, m.bits);
    const double hi = std::pow(2.0, m.bits - 1) - 1.0, lo = -std::pow(2.0, m.bits - 1);
    auto quant = [&](double x) {
      double code = std::clamp(std::round(x / delta), lo, hi);
      return code * delta;
    };
    for (cplx& v : q.samples) v = {quant(v.real()), quant(v.imag())};
  }
  // 2nd-order Butterworth reconstruction response with its analog phase
  {
    std::vector<cplx> sp;
    fft_forward(q.samples, sp);
    const std::size_t n = sp.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double f_ghz = fft_bin_freq(k, n, q.dt) * 1e3;
      const cplx s = J * (f_ghz / m.bandwidth_ghz);
      sp[k] /= (1.0 + M_SQRT2 * s + s * s);
    }
    fft_inverse(sp, q.samples);
  }
  if (std::abs(1e3 / q.dt - m.rate_gsa) > 1e-9) q = resample(q, m.rate_gsa * 1e-3);
  return q;
}

struct EdfaModel {
  double gain_db = 0.0;           // used when no target power is given
  double nf_db = 5.0;
  double center_frequency_hz = kSpeedOfLightKmS * 1e3 / 1550e-9;  // c/lambda at 1550 nm

  void validate_for_gain(double g_lin) const {
    if (g_lin > 1.0 + 1e-12 && nf_db < 3.0)
      throw std::invalid_argument("EdfaModel: NF below the 3 dB quantum limit");
  }
};

/// Flat-gain EDFA with single-polarization ASE: amplitude x sqrt(G), additive
/// circular white gaussian noise of PSD S = (G-1) h nu nsp, nsp = 10^(NF/10)/2,
/// over the full simulation bandwidth. Pass stream = nullptr for a noiseless
/// amplifier. Gain is solved from target_avg_power_dbm when given.
inline SampledField edfa(const SampledField& f, const EdfaModel& m, RandomStream* stream,
                         std::optional<double> target_avg_power_dbm = {},
                         double* gain_db_out = nullptr) {
  double g;
  if (target_avg_power_dbm) {
    const double p_in = f.mean_power();
    if (!(p_in > 0.0)) throw std::invalid_argument("edfa: zero input with target power mode");
    g = dbm_to_w(*target_avg_power_dbm) / p_in;
  } else {
    g = db_to_lin(m.gain_db);
  }
  if (g < 1.0 - 1e-12)
    throw std::invalid_argument("edfa: requested gain < 1 (this model does not attenuate)");
  m.validate_for_gain(g);
  if (gain_db_out) *gain_db_out = lin_to_db(g);

  SampledField out = f;
  const double amp = std::sqrt(g);
  for (cplx& v : out.samples) v *= amp;
  if (stream != nullptr && g > 1.0) {
    const double nsp = std::pow(10.0, m.nf_db / 10.0) / 2.0;
    const double s_ase = (g - 1.0) * kPlanckJs * m.center_frequency_hz * nsp;  // W/Hz
    const double rate_hz = 1e12 / f.dt;  // dt in ps
    const double var = s_ase * rate_hz;
    for (cplx& v : out.samples) v += stream->circular_normal(var);
  }
  return out;
}

/// Behavioral PIC parameters: the mux filter bank, the MMI combining loss and
/// the off-chip peak power the loss ledger predicts.
struct PicSpec {
  FilterSpec mux_filter = FilterSpec::chebyshev(4, 17.5);
  double mmi_loss_db = 3.0;
  double off_chip_peak_dbm = -20.6;
};

/// Linear superposition of the channel fields: per-channel Chebyshev mux
/// filtering on its own carrier (even/odd bus separation means adjacent
/// channels never share a filter), complex sum, MMI combining loss as an
/// amplitude factor. Strictly linear; power normalization is a separate step.
inline SampledField multiplex(const std::vector<SampledField>& channels,
                              const pulse::FramePlan& plan, const PicSpec& pic,
                              bool already_on_carrier = false) {
  if (channels.empty()) throw std::invalid_argument("multiplex: no channels");
  for (const SampledField& c : channels)
    if (c.size() != channels[0].size() || std::abs(c.dt - channels[0].dt) > 1e-12 ||
        std::abs(c.t_start - channels[0].t_start) > 1e-9)
      throw std::invalid_argument("multiplex: channel grids differ");

  SampledField sum;
  sum.t_start = channels[0].t_start;
  sum.dt = channels[0].dt;
  sum.samples.assign(channels[0].size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const double f_k = plan.carrier_offset_ghz(static_cast<int>(k));
    SampledField ch =
        already_on_carrier ? channels[k] : frequency_shift(channels[k], f_k * 1e-3);
    ch = apply_filter(ch, pic.mux_filter.at(f_k));
    for (std::size_t i = 0; i < sum.size(); ++i) sum.samples[i] += ch.samples[i];
  }
  const double loss = std::pow(10.0, -pic.mmi_loss_db / 20.0);
  for (cplx& v : sum.samples) v *= loss;
  return sum;
}

/// scale so that max |q|^2 equals the given peak power
inline SampledField attenuate_to_peak(const SampledField& f, double peak_dbm) {
  const double p = f.peak_power();
  if (!(p > 0.0)) return f;
  SampledField out = f;
  out.scale(std::sqrt(dbm_to_w(peak_dbm) / p));
  return out;
}

/// One stage of the transmitter power budget: either a loss/gain or an
/// amplifier set-point.
struct LedgerStage {
  std::string name;
  double delta_db = 0.0;      // applied when set_dbm is NaN
  double set_dbm = std::numeric_limits<double>::quiet_NaN();
};

/// The PIC power budget: comb line to off-chip soliton peak.
inline std::vector<LedgerStage> loss_ledger() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {
      {"comb line output", 0.0, -6.0},
      {"45 GHz passband filter IL", -2.0, nan},
      {"injection EDFA (set-point)", 0.0, 10.0},
      {"grating coupler in", -3.0, nan},
      {"2nd-order CROW OADM", -1.6, nan},
      {"IQ-MZM IL + modulation penalty", -13.5, nan},
      {"optical delay line", -3.0, nan},
      {"4th-order CROW mux", -2.0, nan},
      {"MMI combiner", -3.0, nan},
      {"grating coupler out", -3.0, nan},
      {"monitor taps", -1.5, nan},
  };
}

inline double ledger_output_dbm(const std::vector<LedgerStage>& stages) {
  double p = 0.0;
  for (const LedgerStage& st : stages) {
    if (std::isfinite(st.set_dbm)) p = st.set_dbm;
    else p += st.delta_db;
  }
  return p;
}

}  // namespace nftsim::txchain
