#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/fft.hpp"

namespace nftsim::nft {

// Zakharov-Shabat scattering convention used throughout:
//   v' = [[-j lam, q], [-conj(q), j lam]] v
// with Jost solutions phi -> [1,0] e^{-j lam t} (t -> -inf) and
// psi -> [0,1] e^{+j lam t} (t -> +inf), so that
//   phi -> [a e^{-j lam t}, b e^{+j lam t}]  (t -> +inf).
// Consequences (all verified by the test suite):
//   * A sech(t) has eigenvalues j(A - k + 1/2);
//   * q(t - tau): a invariant, b *= e^{-2 j lam tau}, so the timing readout
//     T = log|q~|/(2 Im lam) equals +tau;
//   * q e^{-2 j xi t}: spectrum translates by +xi;
//   * q e^{j psi}: b *= e^{-j psi};
//   * low power: b(xi) ~ -conj(Q(2 xi)) with Q(w) = int q e^{+j w t} dt.

struct DiscreteEigen {
  cplx lambda;   // Im > 0
  cplx b;        // b(lambda)
  cplx a_prime;  // da/dlambda at lambda
  cplx q_tilde() const { return b / a_prime; }
};

struct ContinuousSpectrum {
  std::vector<double> xi;  // strictly increasing
  std::vector<cplx> q_hat; // b(xi)/a(xi)
};

struct NftSpectrum {
  std::vector<DiscreteEigen> discrete;
  std::optional<ContinuousSpectrum> continuous;
};

struct ScatterCoeffs {
  cplx a;
  cplx b;
  cplx a_prime;
};

enum class Scheme {
  transfer_matrix2,  // piecewise-constant transfer matrices, O(dt^2)
  cf4,               // commutator-free 4th-order Magnus, O(dt^4)
};

struct SearchRegion {
  double re_min = -3.0, re_max = 3.0;
  double im_min = 0.02, im_max = 3.0;
  int n_re = 41, n_im = 21;
};

struct SolverOptions {
  double tol_a = 1e-8;        // |a(lambda)| at an accepted eigenvalue
  int max_newton_iters = 50;
  double merge_radius = 1e-6;
  double im_threshold = 0.02; // discard near-real spurious roots
  Scheme scheme = Scheme::cf4;
};

namespace detail {

struct Mat2 {
  cplx a, b, c, d;
};

inline Mat2 mul(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
          x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}
inline Mat2 add(const Mat2& x, const Mat2& y) {
  return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}

// exp(h M) and d/dlam exp(h M) for M = [[-j lam, q], [-conj(q), j lam]].
// M^2 = -(lam^2 + |q|^2) I gives the closed form
//   exp(h M) = cos(k h) I + sin(k h)/k M,  k = sqrt(lam^2 + |q|^2).
inline void zs_cell_exp(cplx lam, cplx q, double h, Mat2& E, Mat2* dE) {
  const cplx k2 = lam * lam + std::norm(q);
  const cplx k = std::sqrt(k2);
  const cplx kh = k * h;
  const bool small = std::abs(kh) < 1e-5;
  cplx c, s;  // cos(kh), sin(kh)/k
  if (small) {
    const cplx kh2 = kh * kh;
    c = 1.0 - 0.5 * kh2 + kh2 * kh2 / 24.0;
    s = h * (1.0 - kh2 / 6.0 + kh2 * kh2 / 120.0);
  } else {
    c = std::cos(kh);
    s = std::sin(kh) / k;
  }
  E = {c - J * lam * s, q * s, -std::conj(q) * s, c + J * lam * s};
  if (dE) {
    cplx dc, ds;  // d cos(kh)/dlam, d (sin(kh)/k)/dlam
    if (small) {
      const cplx dk2 = 2.0 * lam;
      dc = -0.5 * h * h * dk2;
      ds = -h * h * h * dk2 / 6.0;
    } else {
      const cplx dk = lam / k;
      dc = -std::sin(kh) * h * dk;
      ds = (h * std::cos(kh) * k - std::sin(kh)) / k2 * dk;
    }
    *dE = {dc - J * s - J * lam * ds, q * ds, -std::conj(q) * ds, dc + J * s + J * lam * ds};
  }
}

}  // namespace detail

/// Workspace bound to one dimensionless signal: precomputes the CF4 node
/// potentials once, then evaluates scattering coefficients for many lambda.
/// The forward-backward sweep matches at the signal's energy centroid, which
/// keeps b well-conditioned at discrete eigenvalues.
class ZsScattering {
 public:
  explicit ZsScattering(const SampledField& q, Scheme scheme = Scheme::cf4)
      : scheme_(scheme), t0_(q.t_start), dt_(q.dt), q_(q.samples) {
    q.validate("ZsScattering");
    const std::size_t n = q_.size();
    if (scheme_ == Scheme::cf4) {
      // q at the two Gauss-Legendre nodes of every cell, t_i -/+ dt*sqrt(3)/6,
      // by bandlimited circular interpolation
      const double s3 = std::sqrt(3.0) / 6.0;
      qa_ = fractional_delay(q, +s3 * dt_).samples;  // q(t - s3 dt)
      qb_ = fractional_delay(q, -s3 * dt_).samples;  // q(t + s3 dt)
    }
    match_ = static_cast<std::size_t>(
        std::clamp<long long>(std::llround((q.energy_centroid() - t0_) / dt_), 1,
                              static_cast<long long>(n) - 1));
  }

  ScatterCoeffs scatter(cplx lambda, bool want_b = true, bool want_derivative = true) const {
    const std::size_t n = q_.size();
    const double TL = t0_ - 0.5 * dt_;
    const double TR = t0_ + (static_cast<double>(n) - 0.5) * dt_;

    // guard against overflow of the boundary carriers
    const double expo = std::abs(lambda.imag()) * (TR - TL);
    if (expo > 650.0)
      throw NumericalRangeError("scatter_coeffs: exponential range exceeded for this Im{lambda}");

    cplx f1 = std::exp(-J * lambda * TL), f2 = 0.0;
    cplx df1 = -J * TL * f1, df2 = 0.0;
    for (std::size_t i = 0; i < match_; ++i)
      step(lambda, i, +1, f1, f2, df1, df2, want_derivative);

    cplx p1 = 0.0, p2 = std::exp(J * lambda * TR);
    cplx dp1 = 0.0, dp2 = J * TR * p2;
    for (std::size_t i = n; i-- > match_;)
      step(lambda, i, -1, p1, p2, dp1, dp2, want_derivative);

    ScatterCoeffs out;
    out.a = f1 * p2 - f2 * p1;
    out.a_prime = want_derivative ? (df1 * p2 + f1 * dp2 - df2 * p1 - f2 * dp1) : cplx{0.0, 0.0};
    if (want_b) {
      if (std::abs(lambda.imag()) < 1e-12) {
        // real axis: psi_bar = [conj(psi2), -conj(psi1)] and b = W(psi_bar, phi)
        out.b = std::conj(p1) * f1 + std::conj(p2) * f2;
      } else {
        // meaningful at (near) zeros of a, where phi = b psi
        out.b = (std::abs(p1) >= std::abs(p2)) ? f1 / p1 : f2 / p2;
      }
    } else {
      out.b = 0.0;
    }
    if (!std::isfinite(out.a.real()) || !std::isfinite(out.a.imag()))
      throw NumericalRangeError("scatter_coeffs: non-finite result");
    return out;
  }

  double dt() const { return dt_; }
  std::size_t size() const { return q_.size(); }

 private:
  // one cell, direction dir = +1 forward / -1 backward (exact inverse)
  void step(cplx lam, std::size_t i, int dir, cplx& v1, cplx& v2, cplx& dv1, cplx& dv2,
            bool deriv) const {
    using detail::Mat2;
    const double h = dir * dt_;
    Mat2 E, dE;
    if (scheme_ == Scheme::transfer_matrix2) {
      detail::zs_cell_exp(lam, q_[i], h, E, deriv ? &dE : nullptr);
    } else {
      // CF4: forward propagator exp(B1) exp(B2) with
      //   B1 = (h/2)[[-j lam, r1],[-conj r1, j lam]], r1 = 2(x1 qa + x2 qb)
      //   B2 = (h/2)[[-j lam, r2],[-conj r2, j lam]], r2 = 2(x2 qa + x1 qb)
      // backward uses the exact inverse exp(-B2) exp(-B1).
      static const double x1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
      static const double x2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;
      const cplx r1 = 2.0 * (x1 * qa_[i] + x2 * qb_[i]);
      const cplx r2 = 2.0 * (x2 * qa_[i] + x1 * qb_[i]);
      Mat2 E1, dE1, E2, dE2;
      detail::zs_cell_exp(lam, r1, 0.5 * h, E1, deriv ? &dE1 : nullptr);
      detail::zs_cell_exp(lam, r2, 0.5 * h, E2, deriv ? &dE2 : nullptr);
      if (dir > 0) {
        E = detail::mul(E1, E2);
        if (deriv) dE = detail::add(detail::mul(dE1, E2), detail::mul(E1, dE2));
      } else {
        E = detail::mul(E2, E1);
        if (deriv) dE = detail::add(detail::mul(dE2, E1), detail::mul(E2, dE1));
      }
    }
    const cplx w1 = E.a * v1 + E.b * v2;
    const cplx w2 = E.c * v1 + E.d * v2;
    if (deriv) {
      const cplx u1 = dE.a * v1 + dE.b * v2 + E.a * dv1 + E.b * dv2;
      const cplx u2 = dE.c * v1 + dE.d * v2 + E.c * dv1 + E.d * dv2;
      dv1 = u1;
      dv2 = u2;
    }
    v1 = w1;
    v2 = w2;
  }

  Scheme scheme_;
  double t0_, dt_;
  std::size_t match_ = 1;
  std::vector<cplx> q_, qa_, qb_;
};

/// One-shot scattering at a single lambda (anywhere in the closed upper
/// half-plane). a' is computed by augmented integration, not finite
/// differences.
inline ScatterCoeffs scatter_coeffs(const SampledField& q, cplx lambda,
                                    Scheme scheme = Scheme::cf4) {
  return ZsScattering(q, scheme).scatter(lambda);
}

struct FindDiagnostics {
  std::vector<cplx> failed_seeds;
  std::size_t grid_candidates = 0;
};

namespace detail {

inline std::optional<cplx> newton_refine(const ZsScattering& zs, cplx lam,
                                         const SolverOptions& opt) {
  for (int it = 0; it < opt.max_newton_iters; ++it) {
    ScatterCoeffs c;
    try {
      c = zs.scatter(lam, /*want_b=*/false, /*want_derivative=*/true);
    } catch (const NumericalRangeError&) {
      return std::nullopt;
    }
    if (std::abs(c.a_prime) == 0.0) return std::nullopt;
    const cplx step = c.a / c.a_prime;
    lam -= step;
    if (lam.imag() <= 0.0 || std::abs(lam) > 50.0) return std::nullopt;  // left the UHP
    if (std::abs(step) < 1e-13) break;
  }
  ScatterCoeffs c;
  try {
    c = zs.scatter(lam, false, true);
  } catch (const NumericalRangeError&) {
    return std::nullopt;
  }
  if (std::abs(c.a) < opt.tol_a && lam.imag() > 0.0) return lam;
  return std::nullopt;
}

}  // namespace detail

/// Newton search for discrete eigenvalues from the given seeds; when a
/// search_region is supplied, additionally grid-scan it and refine every
/// sign-structure candidate. Output is deterministic: canonical sort by
/// (Re, Im), duplicates within merge_radius dropped, Im <= im_threshold
/// discarded. Failed seeds are reported through `diag`, never as errors; an
/// empty region yields an empty list.
inline std::vector<DiscreteEigen> find_eigenvalues(const SampledField& q,
                                                   std::span<const cplx> seeds,
                                                   std::optional<SearchRegion> region = {},
                                                   const SolverOptions& opt = {},
                                                   FindDiagnostics* diag = nullptr) {
  q.validate("find_eigenvalues");
  ZsScattering zs(q, opt.scheme);

  std::vector<cplx> candidates(seeds.begin(), seeds.end());
  if (region) {
    const SearchRegion& r = *region;
    const int nr = std::max(r.n_re, 2), ni = std::max(r.n_im, 2);
    std::vector<cplx> aval(static_cast<std::size_t>(nr) * ni);
    auto at = [&](int i, int k) -> cplx& { return aval[static_cast<std::size_t>(k) * nr + i]; };
    std::vector<double> res(nr), ims(ni);
    for (int i = 0; i < nr; ++i)
      res[i] = r.re_min + (r.re_max - r.re_min) * i / (nr - 1);
    for (int k = 0; k < ni; ++k)
      ims[k] = r.im_min + (r.im_max - r.im_min) * k / (ni - 1);
    for (int k = 0; k < ni; ++k)
      for (int i = 0; i < nr; ++i) {
        try {
          at(i, k) = zs.scatter(cplx(res[i], ims[k]), false, false).a;
        } catch (const NumericalRangeError&) {
          at(i, k) = cplx(1e30, 0.0);
        }
      }
    // cells whose corners change sign in both Re{a} and Im{a}
    auto sgn = [](double x) { return x >= 0.0 ? 1 : -1; };
    for (int k = 0; k + 1 < ni; ++k)
      for (int i = 0; i + 1 < nr; ++i) {
        const cplx c00 = at(i, k), c10 = at(i + 1, k), c01 = at(i, k + 1), c11 = at(i + 1, k + 1);
        const int rs = sgn(c00.real()) + sgn(c10.real()) + sgn(c01.real()) + sgn(c11.real());
        const int is = sgn(c00.imag()) + sgn(c10.imag()) + sgn(c01.imag()) + sgn(c11.imag());
        if (std::abs(rs) < 4 && std::abs(is) < 4) {
          candidates.emplace_back(0.5 * (res[i] + res[i + 1]), 0.5 * (ims[k] + ims[k + 1]));
          if (diag) diag->grid_candidates++;
        }
      }
    // local minima of |a| as fallback candidates
    for (int k = 1; k + 1 < ni; ++k)
      for (int i = 1; i + 1 < nr; ++i) {
        const double v = std::abs(at(i, k));
        bool minimal = true;
        for (int dk = -1; dk <= 1 && minimal; ++dk)
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dk == 0) continue;
            if (std::abs(at(i + di, k + dk)) < v) {
              minimal = false;
              break;
            }
          }
        if (minimal) candidates.emplace_back(res[i], ims[k]);
      }
  }

  std::vector<cplx> found;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    auto lam = detail::newton_refine(zs, candidates[ci], opt);
    if (!lam) {
      if (diag && ci < seeds.size()) diag->failed_seeds.push_back(candidates[ci]);
      continue;
    }
    if (lam->imag() <= opt.im_threshold) continue;
    bool dup = false;
    for (const cplx& g : found)
      if (std::abs(g - *lam) < opt.merge_radius) {
        dup = true;
        break;
      }
    if (!dup) found.push_back(*lam);
  }

  std::sort(found.begin(), found.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });

  std::vector<DiscreteEigen> out;
  out.reserve(found.size());
  for (const cplx& lam : found) {
    ScatterCoeffs c = zs.scatter(lam, true, true);
    out.push_back({lam, c.b, c.a_prime});
  }
  return out;
}

inline std::vector<DiscreteEigen> find_eigenvalues(const SampledField& q,
                                                   std::initializer_list<cplx> seeds,
                                                   std::optional<SearchRegion> region = {},
                                                   const SolverOptions& opt = {},
                                                   FindDiagnostics* diag = nullptr) {
  return find_eigenvalues(q, std::span<const cplx>(seeds.begin(), seeds.size()), region, opt,
                          diag);
}

/// q_hat(xi) = b(xi)/a(xi) on the given real grid.
inline ContinuousSpectrum continuous_spectrum(const SampledField& q,
                                              std::vector<double> xi_grid,
                                              Scheme scheme = Scheme::cf4) {
  q.validate("continuous_spectrum");
  for (std::size_t i = 1; i < xi_grid.size(); ++i)
    if (!(xi_grid[i] > xi_grid[i - 1]))
      throw std::invalid_argument("continuous_spectrum: xi grid must be strictly increasing");
  ZsScattering zs(q, scheme);
  ContinuousSpectrum cs;
  cs.xi = std::move(xi_grid);
  cs.q_hat.resize(cs.xi.size());
  for (std::size_t i = 0; i < cs.xi.size(); ++i) {
    ScatterCoeffs c = zs.scatter(cplx(cs.xi[i], 0.0), true, false);
    cs.q_hat[i] = c.b / c.a;
  }
  return cs;
}

struct EnergyDecomposition {
  double total = 0.0;      // int |q|^2 dt
  double discrete = 0.0;   // 4 sum Im{lambda_m}
  double continuous = 0.0; // (1/pi) int log(1+|q_hat|^2) dxi
};

inline EnergyDecomposition energy_decomposition(const SampledField& q, const NftSpectrum& s) {
  EnergyDecomposition e;
  e.total = q.energy_trapezoid();
  for (const DiscreteEigen& d : s.discrete) e.discrete += 4.0 * d.lambda.imag();
  if (s.continuous && s.continuous->xi.size() >= 2) {
    const auto& cs = *s.continuous;
    double acc = 0.0;
    for (std::size_t i = 1; i < cs.xi.size(); ++i) {
      const double f0 = std::log1p(std::norm(cs.q_hat[i - 1]));
      const double f1 = std::log1p(std::norm(cs.q_hat[i]));
      acc += 0.5 * (f0 + f1) * (cs.xi[i] - cs.xi[i - 1]);
    }
    e.continuous = acc / M_PI;
  }
  return e;
}

/// default xi grid covering the sampled bandwidth (|xi| <= pi/(2 dt) Nyquist)
inline std::vector<double> default_xi_grid(const SampledField& q, std::size_t n = 0) {
  if (n == 0) n = std::max<std::size_t>(q.size(), 128);
  const double xi_max = 0.5 * M_PI / q.dt;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = -xi_max + 2.0 * xi_max * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return xs;
}

}  // namespace nftsim::nft
