#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/nft.hpp"
#include "nftsim/pulse.hpp"

namespace nftsim::analysis {

inline constexpr double kTFwhmNorm = 1.763;  // FWHM of a unit soliton, T0 units

/// A linear-superposition experiment in dimensionless units. All pulses share
/// Im{lambda} = 0.5 (equal T_FWHM); timing is equidistant with spacing
/// delta_T (in T_FWHM units); phases are the envelope carrier phases at each
/// pulse's own center time.
struct SuperpositionCase {
  std::vector<cplx> lambdas;        // initial eigenvalues, Im = 0.5
  double delta_t_fwhm = 1.0;        // pulse spacing / T_FWHM
  std::vector<double> phases_deg;   // per-pulse envelope phase at center

  static SuperpositionCase two_eigen(double delta_k, double delta_t_fwhm, double delta_phi_deg) {
    SuperpositionCase c;
    c.lambdas = {cplx(-0.5 * delta_k, 0.5), cplx(0.5 * delta_k, 0.5)};
    c.delta_t_fwhm = delta_t_fwhm;
    c.phases_deg = {0.0, delta_phi_deg};
    return c;
  }

  /// the four-channel arrangement with Re{lambda} = [-1.8, -0.6, 0.6, 1.8]
  static SuperpositionCase four_eigen(double delta_t_fwhm, std::vector<double> phases_deg,
                                      double delta_k = 1.2) {
    SuperpositionCase c;
    for (int m = 0; m < 4; ++m) c.lambdas.emplace_back((m - 1.5) * delta_k, 0.5);
    c.delta_t_fwhm = delta_t_fwhm;
    if (phases_deg.empty()) phases_deg.assign(4, 0.0);
    if (phases_deg.size() != 4)
      throw std::invalid_argument("four_eigen: need 4 phases");
    c.phases_deg = std::move(phases_deg);
    return c;
  }

  void validate() const {
    if (lambdas.empty()) throw std::invalid_argument("SuperpositionCase: no pulses");
    if (phases_deg.size() != lambdas.size())
      throw std::invalid_argument("SuperpositionCase: phases/lambdas size mismatch");
    for (const cplx& l : lambdas)
      if (std::abs(l.imag() - 0.5) > 1e-12)
        throw std::invalid_argument("SuperpositionCase: Im{lambda} fixed to 0.5");
  }

  /// pulse center times (T0 units), centered on zero
  std::vector<double> centers() const {
    const double dt = delta_t_fwhm * kTFwhmNorm;
    std::vector<double> c(lambdas.size());
    for (std::size_t m = 0; m < c.size(); ++m)
      c[m] = (static_cast<double>(m) - 0.5 * (static_cast<double>(c.size()) - 1.0)) * dt;
    return c;
  }
};

struct SweepGrid {
  double samples_per_t0 = 64.0;
  double window_factor = 6.0;   // window = factor x total pulse extent
  double min_window = 40.0;     // T0 units
};

/// Linear superposition of the case's fundamental solitons on a shared grid.
inline SampledField superpose(const SuperpositionCase& c, const SweepGrid& g = {}) {
  c.validate();
  const auto centers = c.centers();
  const double extent = (centers.back() - centers.front()) + 2.0 * kTFwhmNorm;
  const double window = std::max(g.min_window, g.window_factor * extent);
  const double dtau = 1.0 / g.samples_per_t0;
  const auto n = static_cast<std::size_t>(std::ceil(window / dtau));

  SampledField f;
  f.t_start = -0.5 * window;
  f.dt = dtau;
  f.samples.assign(n, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < c.lambdas.size(); ++m) {
    const double eta = c.lambdas[m].imag();
    const double xi = c.lambdas[m].real();
    const double psi = c.phases_deg[m] * M_PI / 180.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = f.t(i) - centers[m];
      f.samples[i] += 2.0 * eta / std::cosh(2.0 * eta * u) * std::exp(J * (-2.0 * xi * u + psi));
    }
  }
  // tails must be negligible at the grid edges
  const double edge = std::max(std::abs(f.samples.front()), std::abs(f.samples.back()));
  if (edge > 1e-6) throw std::invalid_argument("superpose: grid does not cover pulse tails");
  return f;
}

struct ClassifierOptions {
  double tol_k = 0.05;          // real-part tolerance
  double tol_im = 0.05;         // imaginary-part tolerance
  double im_threshold = 0.02;   // eigenvalue existence threshold
  SweepGrid grid;
  nft::SolverOptions solver;
};

struct OutcomeLabel {
  enum class Kind { merging, fusion, copropagation, mixed };
  Kind kind = Kind::mixed;
  std::vector<cplx> post_eigenvalues;
  double continuum_energy_fraction = 0.0;
  std::string diagnostics;
};

inline const char* outcome_name(OutcomeLabel::Kind k) {
  switch (k) {
    case OutcomeLabel::Kind::merging: return "merging";
    case OutcomeLabel::Kind::fusion: return "fusion";
    case OutcomeLabel::Kind::copropagation: return "copropagation";
    default: return "mixed";
  }
}

/// post-superposition eigenvalues of the case, via a region scan seeded with
/// the initial eigenvalues
inline std::vector<nft::DiscreteEigen> post_eigenvalues(const SuperpositionCase& c,
                                                        const ClassifierOptions& opt,
                                                        const SampledField* prebuilt = nullptr) {
  SampledField f = prebuilt ? *prebuilt : superpose(c, opt.grid);
  double re_min = 1e300, re_max = -1e300, im_sum = 0.0;
  for (const cplx& l : c.lambdas) {
    re_min = std::min(re_min, l.real());
    re_max = std::max(re_max, l.real());
    im_sum += l.imag();
  }
  nft::SearchRegion region;
  region.re_min = re_min - 1.5;
  region.re_max = re_max + 1.5;
  region.im_min = opt.im_threshold;
  region.im_max = im_sum + 0.6;
  nft::SolverOptions sopt = opt.solver;
  sopt.im_threshold = opt.im_threshold;
  return nft::find_eigenvalues(f, std::span<const cplx>(c.lambdas.data(), c.lambdas.size()),
                               region, sopt);
}

/// Outcome rules: fusion = fewer eigenvalues than inputs; co-propagation =
/// equal count, shared real part, distinct imaginary parts; merging = equal
/// count, shared imaginary part, distinct real parts; otherwise mixed.
inline OutcomeLabel classify_outcome(const SuperpositionCase& c,
                                     const ClassifierOptions& opt = {}) {
  c.validate();
  OutcomeLabel out;
  SampledField f = superpose(c, opt.grid);
  std::vector<nft::DiscreteEigen> eigs;
  try {
    eigs = post_eigenvalues(c, opt, &f);
  } catch (const std::exception& e) {
    out.kind = OutcomeLabel::Kind::mixed;
    out.diagnostics = std::string("eigenvalue search failed: ") + e.what();
    return out;
  }
  for (const auto& d : eigs) out.post_eigenvalues.push_back(d.lambda);

  const double energy = f.energy_trapezoid();
  double e_disc = 0.0;
  for (const auto& d : eigs) e_disc += 4.0 * d.lambda.imag();
  out.continuum_energy_fraction = energy > 0.0 ? std::max(0.0, (energy - e_disc) / energy) : 0.0;

  const std::size_t n_in = c.lambdas.size(), n_out = eigs.size();
  if (n_out == 0) {
    out.kind = OutcomeLabel::Kind::mixed;
    out.diagnostics = "no discrete eigenvalues found";
    return out;
  }
  if (n_out < n_in) {
    out.kind = OutcomeLabel::Kind::fusion;
    return out;
  }
  if (n_out > n_in) {
    out.kind = OutcomeLabel::Kind::mixed;
    out.diagnostics = "more eigenvalues than inputs";
    return out;
  }
  double re_spread = 0.0, im_spread = 0.0;
  for (std::size_t i = 0; i < n_out; ++i)
    for (std::size_t k = i + 1; k < n_out; ++k) {
      re_spread = std::max(re_spread, std::abs(eigs[i].lambda.real() - eigs[k].lambda.real()));
      im_spread = std::max(im_spread, std::abs(eigs[i].lambda.imag() - eigs[k].lambda.imag()));
    }
  const bool same_re = re_spread <= opt.tol_k;
  const bool same_im = im_spread <= opt.tol_im;
  if (same_im && !same_re) out.kind = OutcomeLabel::Kind::merging;
  else if (same_re && !same_im) out.kind = OutcomeLabel::Kind::copropagation;
  else out.kind = OutcomeLabel::Kind::mixed;
  return out;
}

struct SweepPoint {
  double delta_k = 0.0;
  double delta_t_fwhm = 0.0;
  double delta_phi_deg = 0.0;
  OutcomeLabel label;
};

/// two-eigenvalue outcome volume over (delta_k, delta_T, delta_phi)
inline std::vector<SweepPoint> sweep_two(const std::vector<double>& delta_k,
                                         const std::vector<double>& delta_t_fwhm,
                                         const std::vector<double>& delta_phi_deg,
                                         const ClassifierOptions& opt = {}) {
  std::vector<SweepPoint> out;
  out.reserve(delta_k.size() * delta_t_fwhm.size() * delta_phi_deg.size());
  for (double dk : delta_k)
    for (double dt : delta_t_fwhm)
      for (double dp : delta_phi_deg) {
        SweepPoint p;
        p.delta_k = dk;
        p.delta_t_fwhm = dt;
        p.delta_phi_deg = dp;
        p.label = classify_outcome(SuperpositionCase::two_eigen(dk, dt, dp), opt);
        out.push_back(std::move(p));
      }
  return out;
}

struct FourSweepRow {
  double delta_t_fwhm = 0.0;
  std::vector<double> phases_deg;
  std::vector<cplx> post_eigenvalues;
};

/// all 256 QPSK phase combinations of four pulses
inline std::vector<std::vector<double>> qpsk_phase_combinations() {
  static const double q[4] = {0.0, 90.0, 180.0, -90.0};
  std::vector<std::vector<double>> out;
  out.reserve(256);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) out.push_back({q[a], q[b], q[c], q[d]});
  return out;
}

/// Fig-2/Fig-3 style sweep: the 4-eigenvalue arrangement vs delta_T for a
/// fixed phase assignment per row (pass qpsk_phase_combinations() for the
/// histogram mode).
inline std::vector<FourSweepRow> sweep_four(const std::vector<double>& delta_t_fwhm,
                                            const std::vector<std::vector<double>>& phase_sets,
                                            const ClassifierOptions& opt = {},
                                            double delta_k = 1.2) {
  std::vector<FourSweepRow> out;
  out.reserve(delta_t_fwhm.size() * phase_sets.size());
  for (double dt : delta_t_fwhm)
    for (const auto& ph : phase_sets) {
      FourSweepRow row;
      row.delta_t_fwhm = dt;
      row.phases_deg = ph;
      auto c = SuperpositionCase::four_eigen(dt, ph, delta_k);
      try {
        for (const auto& d : post_eigenvalues(c, opt)) row.post_eigenvalues.push_back(d.lambda);
      } catch (const std::exception&) {
        // per-point failures recorded as empty rows
      }
      out.push_back(std::move(row));
    }
  return out;
}

}  // namespace nftsim::analysis
