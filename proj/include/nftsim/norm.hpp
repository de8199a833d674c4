#pragma once

#include <cmath>
#include <stdexcept>

#include "nftsim/core.hpp"

namespace nftsim::norm {

/// NZDSF-style fiber description in engineering units.
struct FiberParams {
  double dispersion_d = 4.5;        // ps/(nm km), > 0 (anomalous)
  double attenuation_db_km = 0.2;   // dB/km
  double kerr_gamma = 1.6;          // 1/(W km)
  double center_wavelength_nm = 1550.0;
  double span_length_km = 50.0;

  void validate() const {
    if (!(dispersion_d > 0.0))
      throw std::invalid_argument("FiberParams: bright solitons need anomalous dispersion (D > 0)");
    if (attenuation_db_km < 0.0) throw std::invalid_argument("FiberParams: attenuation < 0");
    if (!(kerr_gamma > 0.0)) throw std::invalid_argument("FiberParams: kerr_gamma must be > 0");
    if (!(span_length_km > 0.0)) throw std::invalid_argument("FiberParams: span_length must be > 0");
    if (!(center_wavelength_nm > 0.0)) throw std::invalid_argument("FiberParams: wavelength must be > 0");
  }

  double attenuation_nats_km() const { return attenuation_db_km * std::log(10.0) / 10.0; }
};

/// Characteristic scales (T0, L0, P0) linking physical and dimensionless
/// soliton units: L0 = T0^2/|beta2|, P0 = 1/(gamma L0).
struct NormScales {
  double t0_ps = 1.0;
  double l0_km = 1.0;
  double p0_w = 1.0;
  double beta2_ps2_km = -1.0;  // signed, < 0
};

/// beta2 = -D lambda^2 / (2 pi c), signed; D in ps/(nm km), result ps^2/km.
inline double beta2_from_D(const FiberParams& p) {
  const double lam = p.center_wavelength_nm;  // nm
  return -p.dispersion_d * lam * lam / (2.0 * M_PI * kSpeedOfLightNmPs);
}

inline double beta2_from_D_value(double d_ps_nm_km, double wavelength_nm) {
  return -d_ps_nm_km * wavelength_nm * wavelength_nm / (2.0 * M_PI * kSpeedOfLightNmPs);
}

/// T0 = T_FWHM / 1.763 and the derived L0, P0.
inline NormScales derive_scales(const FiberParams& p, double t_fwhm_ps) {
  p.validate();
  if (!(t_fwhm_ps > 0.0)) throw std::invalid_argument("derive_scales: t_fwhm must be > 0");
  const double beta2 = beta2_from_D(p);
  if (!(beta2 < 0.0))
    throw std::invalid_argument("derive_scales: non-anomalous dispersion rejected");
  NormScales s;
  s.t0_ps = t_fwhm_ps / 1.763;
  s.beta2_ps2_km = beta2;
  s.l0_km = s.t0_ps * s.t0_ps / std::abs(beta2);
  s.p0_w = 1.0 / (p.kerr_gamma * s.l0_km);
  return s;
}

/// physical (ps, sqrt(W)) -> dimensionless soliton units
inline SampledField to_normalized(const SampledField& f, const NormScales& s) {
  SampledField out = f;
  out.t_start = f.t_start / s.t0_ps;
  out.dt = f.dt / s.t0_ps;
  const double a = 1.0 / std::sqrt(s.p0_w);
  for (cplx& v : out.samples) v *= a;
  return out;
}

/// dimensionless -> physical; exact inverse of to_normalized
inline SampledField to_physical(const SampledField& f, const NormScales& s) {
  SampledField out = f;
  out.t_start = f.t_start * s.t0_ps;
  out.dt = f.dt * s.t0_ps;
  const double a = std::sqrt(s.p0_w);
  for (cplx& v : out.samples) v *= a;
  return out;
}

}  // namespace nftsim::norm
