#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/fft.hpp"
#include "nftsim/norm.hpp"
#include "nftsim/pulse.hpp"
#include "nftsim/rng.hpp"
#include "nftsim/txchain.hpp"

namespace nftsim::fiber {

struct StepControl {
  double dz_km = 0.1;           // fixed step
  double max_nl_phase = 0.05;   // rad per step; exceeding it raises a warning
};

struct SsfmStats {
  double max_nl_phase = 0.0;
  bool step_warning = false;
  std::vector<std::string> warnings;
};

/// Symmetric split-step NLSE propagation over length_km (physical units:
/// t in ps, amplitude in sqrt(W)). Dispersion bin nu gets
/// exp(-j (beta2/2) (2 pi nu)^2 dz); the nonlinear step applies
/// exp(-j gamma |A|^2 Leff) with the span loss folded in.
inline SampledField ssfm_propagate(const SampledField& field, const norm::FiberParams& fiber,
                                   double length_km, const StepControl& step,
                                   SsfmStats* stats = nullptr) {
  field.validate("ssfm_propagate");
  fiber.validate();
  if (!(length_km > 0.0)) return field;

  const int n_steps = std::max(1, (int)std::ceil(length_km / step.dz_km));
  const double dz = length_km / n_steps;
  const double beta2 = norm::beta2_from_D(fiber);
  const double alpha = fiber.attenuation_nats_km();
  const double leff = alpha > 0.0 ? (1.0 - std::exp(-alpha * dz)) / alpha : dz;
  const double amp_decay = std::exp(-0.5 * alpha * dz);

  const std::size_t n = field.size();
  std::vector<cplx> half(n), full(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 2.0 * M_PI * fft_bin_freq(k, n, field.dt);  // rad/ps
    const double ph = -0.5 * beta2 * w * w;                      // rad per km
    half[k] = std::exp(-J * (ph * 0.5 * dz));
    full[k] = std::exp(-J * (ph * dz));
  }

  std::vector<cplx> spec, time = field.samples;
  auto disp = [&](const std::vector<cplx>& mult) {
    fft_forward(time, spec);
    for (std::size_t k = 0; k < n; ++k) spec[k] *= mult[k];
    fft_inverse(spec, time);
  };
  double max_phase = 0.0;
  auto nonlin = [&]() {
    double local = 0.0;
    for (cplx& v : time) {
      const double p = std::norm(v);
      local = std::max(local, p);
      v *= std::exp(-J * (fiber.kerr_gamma * p * leff)) * amp_decay;
    }
    max_phase = std::max(max_phase, fiber.kerr_gamma * local * leff);
  };

  disp(half);
  for (int i = 0; i < n_steps; ++i) {
    nonlin();
    disp(i + 1 < n_steps ? full : half);
  }

  SampledField out;
  out.t_start = field.t_start;
  out.dt = field.dt;
  out.samples = std::move(time);
  if (!out.all_finite()) throw std::runtime_error("ssfm_propagate: NaN detected");
  if (stats) {
    stats->max_nl_phase = std::max(stats->max_nl_phase, max_phase);
    if (max_phase > step.max_nl_phase) {
      stats->step_warning = true;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "nonlinear phase per step %.3g rad exceeds %.3g",
                    max_phase, step.max_nl_phase);
      stats->warnings.emplace_back(buf);
    }
  }
  return out;
}

/// one full span
inline SampledField ssfm_span(const SampledField& field, const norm::FiberParams& fiber,
                              const StepControl& step, SsfmStats* stats = nullptr) {
  return ssfm_propagate(field, fiber, fiber.span_length_km, step, stats);
}

struct LinkConfig {
  norm::FiberParams fiber;
  int n_spans = 40;
  txchain::EdfaModel span_amp;       // gain is always the exact span loss
  double launch_power_dbm = 4.88;    // average
  StepControl step;

  void validate() const {
    fiber.validate();
    if (n_spans < 0) throw std::invalid_argument("LinkConfig: n_spans >= 0");
    if (!std::isfinite(launch_power_dbm))
      throw std::invalid_argument("LinkConfig: launch power must be finite");
  }
};

/// Alternates spans and amplifiers (gain restoring span loss exactly) and
/// hands the field after every span to `tap`. Per-span ASE streams are
/// derived from `seed`; pass noise_on = false for a noiseless link.
inline void propagate_link(const SampledField& launch, const LinkConfig& cfg,
                           std::uint64_t seed, bool noise_on,
                           const std::function<void(int, const SampledField&)>& tap,
                           SsfmStats* stats = nullptr) {
  cfg.validate();
  const double p_dbm = w_to_dbm(launch.mean_power());
  if (std::abs(p_dbm - cfg.launch_power_dbm) > 0.01)
    throw std::invalid_argument("propagate_link: field power " + std::to_string(p_dbm) +
                                " dBm does not match configured launch power");
  SampledField f = launch;
  const double span_loss_db = cfg.fiber.attenuation_db_km * cfg.fiber.span_length_km;
  for (int i = 0; i < cfg.n_spans; ++i) {
    f = ssfm_span(f, cfg.fiber, cfg.step, stats);
    txchain::EdfaModel amp = cfg.span_amp;
    amp.gain_db = span_loss_db;
    if (noise_on) {
      RandomStream ase(seed, "edfa.span." + std::to_string(i));
      f = txchain::edfa(f, amp, &ase);
    } else {
      f = txchain::edfa(f, amp, nullptr);
    }
    tap(i + 1, f);
  }
}

/// convenience form returning one field per span boundary
inline std::vector<SampledField> propagate_link(const SampledField& launch,
                                                const LinkConfig& cfg, std::uint64_t seed,
                                                bool noise_on, SsfmStats* stats = nullptr) {
  std::vector<SampledField> taps;
  taps.reserve(cfg.n_spans);
  propagate_link(launch, cfg, seed, noise_on,
                 [&](int, const SampledField& f) { taps.push_back(f); }, stats);
  return taps;
}

inline double path_average_enhancement(const norm::FiberParams& fiber) {
  const double al = fiber.attenuation_nats_km() * fiber.span_length_km;
  if (al < 1e-12) return 1.0;
  return al / (1.0 - std::exp(-al));
}

/// Average launch power for the soliton condition under lumped amplification:
/// per-window energy n_ch * 2 P0 T0 over the window duration, times the
/// path-average enhancement alpha L / (1 - e^{-alpha L}).
inline double launch_power_for_soliton(const pulse::FramePlan& plan,
                                       const norm::NormScales& scales,
                                       const norm::FiberParams& fiber) {
  plan.validate();
  const double e_window_wps = plan.n_channels * 2.0 * scales.p0_w * scales.t0_ps;
  const double p_avg = e_window_wps / plan.window_ps;
  return w_to_dbm(p_avg * path_average_enhancement(fiber));
}

/// per-channel retarded-frame drift rate, ps/km (bin +f arrives at beta2*w*z)
inline double channel_drift_ps_per_km(double carrier_offset_ghz,
                                      const norm::FiberParams& fiber) {
  const double w = 2.0 * M_PI * carrier_offset_ghz * 1e-3;  // rad/ps
  return norm::beta2_from_D(fiber) * w;
}

struct CollisionMap {
  struct Pair {
    int i = 0, j = 0;
    std::vector<double> distances_km;  // sorted
  };
  std::vector<Pair> pairs;
  std::vector<double> complete_km;  // all trajectories within one T_FWHM
  bool degenerate = false;
};

/// Kinematic collision prediction from group-velocity walk-off inside the
/// periodic transmission window.
inline CollisionMap collision_map(const pulse::FramePlan& plan, const norm::FiberParams& fiber,
                                  double t_fwhm_ps, double max_distance_km) {
  plan.validate();
  fiber.validate();
  CollisionMap map;
  const int nc = plan.n_channels;
  const double w = plan.window_ps;
  std::vector<double> v(nc), pos0(nc);
  for (int k = 0; k < nc; ++k) {
    v[k] = channel_drift_ps_per_km(plan.carrier_offset_ghz(k), fiber);
    pos0[k] = k * plan.delta_t_ps;
  }
  for (int i = 0; i < nc; ++i)
    for (int j = i + 1; j < nc; ++j) {
      CollisionMap::Pair pr{i, j, {}};
      const double dv = v[i] - v[j];
      if (std::abs(dv) < 1e-15) {
        map.pairs.push_back(pr);  // zero walk-off: no collision recorded
        continue;
      }
      const double d0 = pos0[i] - pos0[j];
      // (d0 + dv z) = m w  ->  z = (m w - d0)/dv
      const double wrap_km = std::abs(w / dv);
      if (wrap_km < 1.0) map.degenerate = true;
      const long long m_lo = (long long)std::floor((dv > 0 ? -d0 : -d0 - dv * max_distance_km) / w) - 2;
      const long long m_hi = (long long)std::ceil((dv > 0 ? -d0 + dv * max_distance_km : -d0) / w) + 2;
      for (long long m = m_lo; m <= m_hi; ++m) {
        const double z = (m * w - d0) / dv;
        if (z > 1e-9 && z <= max_distance_km) pr.distances_km.push_back(z);
      }
      std::sort(pr.distances_km.begin(), pr.distances_km.end());
      map.pairs.push_back(pr);
    }

  if (nc >= 2) {
    auto spread = [&](double z) {
      double worst = 0.0;
      for (int i = 0; i < nc; ++i)
        for (int j = i + 1; j < nc; ++j) {
          double d = std::fmod(std::abs((pos0[i] + v[i] * z) - (pos0[j] + v[j] * z)), w);
          d = std::min(d, w - d);  // circular distance inside the window
          worst = std::max(worst, d);
        }
      return worst;
    };
    const double dz = 0.5;
    bool inside = false;
    double best_z = 0.0, best_d = 1e300;
    for (double z = dz; z <= max_distance_km; z += dz) {
      const double d = spread(z);
      if (d <= t_fwhm_ps) {
        if (!inside) {
          inside = true;
          best_z = z;
          best_d = d;
        } else if (d < best_d) {
          best_d = d;
          best_z = z;
        }
      } else if (inside) {
        map.complete_km.push_back(best_z);
        inside = false;
        best_d = 1e300;
      }
    }
    if (inside) map.complete_km.push_back(best_z);
  }
  return map;
}

// ---------------------------------------------------------------------------
// span-tap signal files: raw complex64 with a small self-describing header

struct SignalFile {
  SampledField field;
  double center_frequency_ghz = 0.0;
  std::uint32_t span_index = 0;
};

inline void write_signal_file(const std::string& path, const SampledField& f,
                              double center_frequency_ghz, std::uint32_t span_index) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("write_signal_file: cannot open " + path);
  const char magic[4] = {'N', 'F', 'T', 'S'};
  const std::uint32_t version = 1;
  const std::uint64_t n = f.size();
  std::fwrite(magic, 1, 4, fp);
  std::fwrite(&version, sizeof(version), 1, fp);
  std::fwrite(&n, sizeof(n), 1, fp);
  std::fwrite(&f.dt, sizeof(double), 1, fp);
  std::fwrite(&f.t_start, sizeof(double), 1, fp);
  std::fwrite(&center_frequency_ghz, sizeof(double), 1, fp);
  std::fwrite(&span_index, sizeof(span_index), 1, fp);
  const std::uint32_t reserved = 0;
  std::fwrite(&reserved, sizeof(reserved), 1, fp);
  for (const cplx& v : f.samples) {
    const float re = static_cast<float>(v.real()), im = static_cast<float>(v.imag());
    std::fwrite(&re, sizeof(float), 1, fp);
    std::fwrite(&im, sizeof(float), 1, fp);
  }
  std::fclose(fp);
}

inline SignalFile read_signal_file(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("read_signal_file: cannot open " + path);
  char magic[4];
  std::uint32_t version = 0, reserved = 0;
  std::uint64_t n = 0;
  SignalFile out;
  bool ok = std::fread(magic, 1, 4, fp) == 4 &&
            magic[0] == 'N' && magic[1] == 'F' && magic[2] == 'T' && magic[3] == 'S' &&
            std::fread(&version, sizeof(version), 1, fp) == 1 && version == 1 &&
            std::fread(&n, sizeof(n), 1, fp) == 1 &&
            std::fread(&out.field.dt, sizeof(double), 1, fp) == 1 &&
            std::fread(&out.field.t_start, sizeof(double), 1, fp) == 1 &&
            std::fread(&out.center_frequency_ghz, sizeof(double), 1, fp) == 1 &&
            std::fread(&out.span_index, sizeof(out.span_index), 1, fp) == 1 &&
            std::fread(&reserved, sizeof(reserved), 1, fp) == 1;
  if (ok) {
    out.field.samples.resize(n);
    for (std::uint64_t i = 0; i < n && ok; ++i) {
      float re = 0, im = 0;
      ok = std::fread(&re, sizeof(float), 1, fp) == 1 && std::fread(&im, sizeof(float), 1, fp) == 1;
      out.field.samples[i] = cplx(re, im);
    }
  }
  std::fclose(fp);
  if (!ok) throw std::runtime_error("read_signal_file: malformed file " + path);
  return out;
}

}  // namespace nftsim::fiber
