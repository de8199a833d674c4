#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nftsim {

using cplx = std::complex<double>;
inline constexpr cplx J{0.0, 1.0};

// Fixed physical constants. c is used for the D -> beta2 conversion and for
// photon energy in the EDFA noise model.
inline constexpr double kSpeedOfLightKmS = 2.998e5;    // km/s
inline constexpr double kSpeedOfLightNmPs = 2.998e5;   // nm/ps (same numeral)
inline constexpr double kPlanckJs = 6.62607015e-34;    // J*s

// Thrown when scattering exponentials leave the representable range
// (very large Im{lambda} on wide windows).
class NumericalRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_w(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double w_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

inline double wrap_phase(double phi) {
  phi = std::fmod(phi, 2.0 * M_PI);
  if (phi > M_PI) phi -= 2.0 * M_PI;
  if (phi <= -M_PI) phi += 2.0 * M_PI;
  return phi;
}

/// Uniformly sampled complex baseband envelope with its time grid.
/// One unit system per call chain: either physical (ps, sqrt(W)) or
/// dimensionless soliton units; conversions live in nftsim::norm.
struct SampledField {
  std::vector<cplx> samples;
  double t_start = 0.0;  // time of first sample
  double dt = 1.0;       // sample spacing, > 0

  SampledField() = default;
  SampledField(std::vector<cplx> s, double start, double step)
      : samples(std::move(s)), t_start(start), dt(step) {}

  std::size_t size() const { return samples.size(); }
  double t(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
  double duration() const { return static_cast<double>(samples.size()) * dt; }
  double sample_rate() const { return 1.0 / dt; }

  /// integral |q|^2 dt by trapezoidal quadrature.
  double energy_trapezoid() const {
    if (samples.size() < 2) return 0.0;
    double e = 0.0;
    for (const cplx& v : samples) e += std::norm(v);
    e -= 0.5 * (std::norm(samples.front()) + std::norm(samples.back()));
    return e * dt;
  }

  /// mean |q|^2 over the burst (rectangle rule; natural for periodic bursts).
  double mean_power() const {
    if (samples.empty()) return 0.0;
    double p = 0.0;
    for (const cplx& v : samples) p += std::norm(v);
    return p / static_cast<double>(samples.size());
  }

  double peak_power() const {
    double p = 0.0;
    for (const cplx& v : samples) p = std::max(p, std::norm(v));
    return p;
  }

  /// energy-weighted mean time; falls back to the grid midpoint for a
  /// vacuum field.
  double energy_centroid() const {
    double esum = 0.0, tsum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double e = std::norm(samples[i]);
      esum += e;
      tsum += e * t(i);
    }
    if (esum <= 0.0) return t_start + 0.5 * duration();
    return tsum / esum;
  }

  void scale(double amp_factor) {
    for (cplx& v : samples) v *= amp_factor;
  }

  bool all_finite() const {
    for (const cplx& v : samples)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  void validate(const char* who) const {
    if (!(dt > 0.0)) throw std::invalid_argument(std::string(who) + ": dt must be > 0");
    if (samples.size() < 2) throw std::invalid_argument(std::string(who) + ": need >= 2 samples");
    if (!all_finite()) throw std::invalid_argument(std::string(who) + ": non-finite samples");
  }
};

}  // namespace nftsim
