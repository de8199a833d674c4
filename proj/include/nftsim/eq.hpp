#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/rng.hpp"
#include "nftsim/rx.hpp"

namespace nftsim::eq {

enum class Scope { single, multi, neighbors };

inline const char* scope_name(Scope s) {
  switch (s) {
    case Scope::single: return "single";
    case Scope::multi: return "multi";
    default: return "neighbors";
  }
}

/// Feature matrix for one channel's equalizer at one distance.
/// single    -> the 4 deviation features of the target channel;
/// multi     -> 16 = same-window features of all channels;
/// neighbors -> 48 = multi plus the preceding and following windows.
/// Boundary windows without neighbors are zero-padded and flagged.
/// Erased windows contribute zero features.
struct FeatureBuild {
  Eigen::MatrixXd x;
  std::vector<std::string> layout;
  std::vector<bool> padded;  // per row
};

inline FeatureBuild build_features(const std::vector<std::vector<rx::RxSymbol>>& symbols,
                                   int target_channel, Scope scope,
                                   bool append_b_of_target = false) {
  const int nc = static_cast<int>(symbols.size());
  if (target_channel < 0 || target_channel >= nc)
    throw std::invalid_argument("build_features: bad target channel");
  const std::size_t nw = symbols[target_channel].size();
  for (const auto& ch : symbols)
    if (ch.size() != nw) throw std::invalid_argument("build_features: ragged symbol streams");

  auto dev4 = [&](int ch, long long w, double* out) {
    if (w < 0 || w >= static_cast<long long>(nw)) {
      out[0] = out[1] = out[2] = out[3] = 0.0;
      return false;
    }
    const rx::RxSymbol& s = symbols[ch][static_cast<std::size_t>(w)];
    if (s.erasure) {
      out[0] = out[1] = out[2] = out[3] = 0.0;
      return true;
    }
    out[0] = s.feature.d_aprime_re;
    out[1] = s.feature.d_aprime_im;
    out[2] = s.feature.d_lambda_re;
    out[3] = s.feature.d_lambda_im;
    return true;
  };

  std::vector<int> window_offsets{0};
  std::vector<int> chans;
  if (scope == Scope::single) {
    chans = {target_channel};
  } else {
    for (int c = 0; c < nc; ++c) chans.push_back(c);
    if (scope == Scope::neighbors) window_offsets = {-1, 0, +1};
  }

  FeatureBuild fb;
  const int ncols = static_cast<int>(window_offsets.size() * chans.size() * 4) +
                    (append_b_of_target ? 2 : 0);
  fb.x.resize(static_cast<Eigen::Index>(nw), ncols);
  fb.padded.assign(nw, false);
  for (int off : window_offsets)
    for (int c : chans)
      for (const char* part : {"da_re", "da_im", "dl_re", "dl_im"}) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "w%+d.ch%d.%s", off, c, part);
        fb.layout.emplace_back(buf);
      }
  if (append_b_of_target) {
    fb.layout.emplace_back("b_re");
    fb.layout.emplace_back("b_im");
  }

  for (std::size_t w = 0; w < nw; ++w) {
    int col = 0;
    for (int off : window_offsets)
      for (int c : chans) {
        double v[4];
        if (!dev4(c, static_cast<long long>(w) + off, v)) fb.padded[w] = true;
        for (int k = 0; k < 4; ++k) fb.x(static_cast<Eigen::Index>(w), col++) = v[k];
      }
    if (append_b_of_target) {
      const rx::RxSymbol& s = symbols[target_channel][w];
      fb.x(static_cast<Eigen::Index>(w), col++) = s.erasure ? 0.0 : s.feature.b_re;
      fb.x(static_cast<Eigen::Index>(w), col++) = s.erasure ? 0.0 : s.feature.b_im;
    }
  }
  return fb;
}

// ---------------------------------------------------------------------------
// linear MMSE (Eqs 4-5 style, centered implementation)

struct MmseModel {
  Scope scope = Scope::single;
  std::vector<std::string> feature_layout;
  Eigen::VectorXd c;       // amplitude weights (centered features)
  Eigen::VectorXd d;       // phase weights
  Eigen::VectorXd mean_n;  // training feature means
  double mean_da = 0.0;    // training target means (intercepts)
  double mean_dphi = 0.0;
};

/// c^T = E[dA n^T] cov(n)^{-1}, d^T = E[dphi n^T] cov(n)^{-1}, with sample
/// moments on centered data and ridge regularization eps*trace/dim,
/// eps = 1e-8. Phase targets must already be wrapped to (-pi, pi].
inline MmseModel mmse_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& target_da,
                          const Eigen::VectorXd& target_dphi, Scope scope = Scope::single,
                          std::vector<std::string> layout = {}) {
  const Eigen::Index n = x.rows(), f = x.cols();
  if (n != target_da.size() || n != target_dphi.size())
    throw std::invalid_argument("mmse_fit: target length mismatch");
  if (n < 10 * f)
    throw std::invalid_argument("mmse_fit: need >= 10x more samples than features");

  MmseModel m;
  m.scope = scope;
  m.feature_layout = std::move(layout);
  m.mean_n = x.colwise().mean();
  m.mean_da = target_da.mean();
  m.mean_dphi = target_dphi.mean();

  Eigen::MatrixXd xc = x.rowwise() - m.mean_n.transpose();
  Eigen::MatrixXd cov = (xc.transpose() * xc) / static_cast<double>(n);
  const double ridge = 1e-8 * cov.trace() / static_cast<double>(f);
  cov.diagonal().array() += std::max(ridge, 1e-300);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("mmse_fit: covariance not factorizable after regularization");
  m.c = ldlt.solve(xc.transpose() * (target_da.array() - m.mean_da).matrix() /
                   static_cast<double>(n));
  m.d = ldlt.solve(xc.transpose() * (target_dphi.array() - m.mean_dphi).matrix() /
                   static_cast<double>(n));
  if (!m.c.allFinite() || !m.d.allFinite())
    throw std::runtime_error("mmse_fit: singular covariance (non-finite weights)");
  return m;
}

/// b_corr has amplitude |b| + dA_hat and phase arg{b} + dphi_hat.
inline cplx mmse_apply(const MmseModel& m, const Eigen::VectorXd& features, cplx b_rx) {
  if (features.size() != m.c.size())
    throw std::invalid_argument("mmse_apply: feature layout mismatch");
  const Eigen::VectorXd nc = features - m.mean_n;
  const double da = m.mean_da + m.c.dot(nc);
  const double dphi = m.mean_dphi + m.d.dot(nc);
  const double amp = std::abs(b_rx) + da;
  return std::polar(amp, std::arg(b_rx) + dphi);
}

// ---------------------------------------------------------------------------
// feed-forward NN, 1 hidden sigmoid layer, trained by Levenberg-Marquardt

struct NnModel {
  std::vector<std::string> feature_layout;
  Eigen::MatrixXd w1;  // hidden x in
  Eigen::VectorXd b1;  // hidden biases (x0)
  Eigen::MatrixXd w2;  // 2 x hidden
  Eigen::VectorXd b2;  // output biases (z0)
  Eigen::VectorXd in_mean, in_std;  // input standardization
  bool converged = true;
  double final_train_loss = 0.0;

  Eigen::Index n_params() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
};

struct NnTrainOptions {
  int hidden = 100;
  int max_iters = 200;
  int patience = 10;          // accepted steps without validation improvement
  double val_fraction = 0.1;
  double lm_lambda0 = 1e-2;
  double lm_lambda_max = 1e12;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Eigen::MatrixXd nn_forward(const NnModel& m, const Eigen::MatrixXd& xstd) {
  Eigen::MatrixXd a1 = (xstd * m.w1.transpose()).rowwise() + m.b1.transpose();
  Eigen::MatrixXd h = a1.unaryExpr([](double v) { return sigmoid(v); });
  return (h * m.w2.transpose()).rowwise() + m.b2.transpose();
}

// residual vector (2N) and Jacobian d r / d theta, theta = [w1, b1, w2, b2]
inline void nn_residual_jacobian(const NnModel& m, const Eigen::MatrixXd& xstd,
                                 const Eigen::MatrixXd& t, Eigen::VectorXd& r,
                                 Eigen::MatrixXd* jac) {
  const Eigen::Index n = xstd.rows(), fin = xstd.cols(), nh = m.b1.size();
  const Eigen::Index p = m.n_params();
  r.resize(2 * n);
  if (jac) jac->setZero(2 * n, p);
  const Eigen::Index o_w1 = 0, o_b1 = o_w1 + nh * fin, o_w2 = o_b1 + nh, o_b2 = o_w2 + 2 * nh;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd a1 = m.w1 * xstd.row(i).transpose() + m.b1;
    Eigen::VectorXd h = a1.unaryExpr([](double v) { return sigmoid(v); });
    Eigen::VectorXd sp = h.array() * (1.0 - h.array());
    Eigen::Vector2d y = m.w2 * h + m.b2;
    for (int o = 0; o < 2; ++o) {
      const Eigen::Index row = 2 * i + o;
      r(row) = y(o) - t(i, o);
      if (!jac) continue;
      for (Eigen::Index jh = 0; jh < nh; ++jh) {
        const double g = m.w2(o, jh) * sp(jh);
        for (Eigen::Index k = 0; k < fin; ++k)
          (*jac)(row, o_w1 + jh * fin + k) = g * xstd(i, k);
        (*jac)(row, o_b1 + jh) = g;
        (*jac)(row, o_w2 + o * nh + jh) = h(jh);
      }
      (*jac)(row, o_b2 + o) = 1.0;
    }
  }
}

inline void nn_set_params(NnModel& m, const Eigen::VectorXd& th) {
  const Eigen::Index fin = m.w1.cols(), nh = m.b1.size();
  Eigen::Index o = 0;
  for (Eigen::Index jh = 0; jh < nh; ++jh)
    for (Eigen::Index k = 0; k < fin; ++k) m.w1(jh, k) = th(o++);
  for (Eigen::Index jh = 0; jh < nh; ++jh) m.b1(jh) = th(o++);
  for (int out = 0; out < 2; ++out)
    for (Eigen::Index jh = 0; jh < nh; ++jh) m.w2(out, jh) = th(o++);
  m.b2(0) = th(o++);
  m.b2(1) = th(o++);
}

inline Eigen::VectorXd nn_get_params(const NnModel& m) {
  Eigen::VectorXd th(m.n_params());
  const Eigen::Index fin = m.w1.cols(), nh = m.b1.size();
  Eigen::Index o = 0;
  for (Eigen::Index jh = 0; jh < nh; ++jh)
    for (Eigen::Index k = 0; k < fin; ++k) th(o++) = m.w1(jh, k);
  for (Eigen::Index jh = 0; jh < nh; ++jh) th(o++) = m.b1(jh);
  for (int out = 0; out < 2; ++out)
    for (Eigen::Index jh = 0; jh < nh; ++jh) th(o++) = m.w2(out, jh);
  th(o++) = m.b2(0);
  th(o++) = m.b2(1);
  return th;
}

}  // namespace detail

/// Deterministic LM training on sum-of-squares loss with a 10% validation
/// holdout and early stopping. Inputs are standardized internally; targets
/// are the (dA_b, dphi_b) corrections with phases wrapped to (-pi, pi].
/// On lambda overflow the best validation model is returned with
/// converged = false.
inline NnModel nn_train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets,
                        std::uint64_t seed, const NnTrainOptions& opt = {},
                        std::vector<std::string> layout = {}) {
  const Eigen::Index n = x.rows(), fin = x.cols();
  if (targets.rows() != n || targets.cols() != 2)
    throw std::invalid_argument("nn_train: targets must be N x 2");
  if (n < 8) throw std::invalid_argument("nn_train: too few samples");

  NnModel m;
  m.feature_layout = std::move(layout);
  m.in_mean = x.colwise().mean();
  m.in_std = ((x.rowwise() - m.in_mean.transpose()).array().square().colwise().sum() /
              static_cast<double>(n))
                 .sqrt();
  for (Eigen::Index k = 0; k < fin; ++k)
    if (m.in_std(k) < 1e-12) m.in_std(k) = 1.0;
  Eigen::MatrixXd xstd = (x.rowwise() - m.in_mean.transpose()).array().rowwise() /
                         m.in_std.transpose().array();

  // seeded shuffle for the validation split
  RandomStream rs(seed, "nn.init");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rs.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  const Eigen::Index n_val =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(opt.val_fraction * n));
  const Eigen::Index n_tr = n - n_val;
  Eigen::MatrixXd xtr(n_tr, fin), xval(n_val, fin), ttr(n_tr, 2), tval(n_val, 2);
  for (Eigen::Index i = 0; i < n_tr; ++i) {
    xtr.row(i) = xstd.row(order[static_cast<std::size_t>(i)]);
    ttr.row(i) = targets.row(order[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < n_val; ++i) {
    xval.row(i) = xstd.row(order[static_cast<std::size_t>(n_tr + i)]);
    tval.row(i) = targets.row(order[static_cast<std::size_t>(n_tr + i)]);
  }

  const int nh = opt.hidden;
  m.w1.resize(nh, fin);
  m.b1.resize(nh);
  m.w2.resize(2, nh);
  m.b2.resize(2);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(fin + 1));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(nh + 1));
  for (Eigen::Index jh = 0; jh < nh; ++jh) {
    for (Eigen::Index k = 0; k < fin; ++k) m.w1(jh, k) = s1 * (2.0 * rs.uniform01() - 1.0);
    m.b1(jh) = s1 * (2.0 * rs.uniform01() - 1.0);
  }
  for (int o = 0; o < 2; ++o) {
    for (Eigen::Index jh = 0; jh < nh; ++jh) m.w2(o, jh) = s2 * (2.0 * rs.uniform01() - 1.0);
    m.b2(o) = s2 * (2.0 * rs.uniform01() - 1.0);
  }

  auto sse = [](const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); };
  auto val_loss = [&](const NnModel& mm) {
    Eigen::VectorXd r;
    detail::nn_residual_jacobian(mm, xval, tval, r, nullptr);
    return sse(r);
  };

  double lm = opt.lm_lambda0;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  detail::nn_residual_jacobian(m, xtr, ttr, r, &jac);
  double loss = sse(r);
  NnModel best = m;
  double best_val = val_loss(m);
  int since_best = 0;

  for (int it = 0; it < opt.max_iters; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool accepted = false;
    while (lm <= opt.lm_lambda_max) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += lm;
      const Eigen::VectorXd delta = a.ldlt().solve(-jtr);
      NnModel trial = m;
      detail::nn_set_params(trial, detail::nn_get_params(m) + delta);
      Eigen::VectorXd r2;
      detail::nn_residual_jacobian(trial, xtr, ttr, r2, nullptr);
      const double loss2 = sse(r2);
      if (loss2 < loss && std::isfinite(loss2)) {  // accepted LM steps never increase loss
        m = trial;
        loss = loss2;
        lm = std::max(lm * 0.1, 1e-14);
        accepted = true;
        break;
      }
      lm *= 10.0;
    }
    if (!accepted) {
      m = best;
      m.converged = false;  // lambda overflow: keep best validation model
      m.final_train_loss = loss;
      return m;
    }
    const double vl = val_loss(m);
    if (vl < best_val - 1e-15) {
      best_val = vl;
      best = m;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      break;
    }
    detail::nn_residual_jacobian(m, xtr, ttr, r, &jac);
    if (loss < 1e-20) break;
  }
  best.converged = true;
  {  // report the training loss of the returned (best-validation) weights
    Eigen::VectorXd rfin;
    detail::nn_residual_jacobian(best, xtr, ttr, rfin, nullptr);
    best.final_train_loss = sse(rfin);
  }
  return best;
}

inline Eigen::MatrixXd nn_predict(const NnModel& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.w1.cols()) throw std::invalid_argument("nn_predict: layout mismatch");
  Eigen::MatrixXd xstd = (x.rowwise() - m.in_mean.transpose()).array().rowwise() /
                         m.in_std.transpose().array();
  return detail::nn_forward(m, xstd);
}

/// forward pass + amplitude/phase correction, mirroring mmse_apply
inline cplx nn_apply(const NnModel& m, const Eigen::VectorXd& features, cplx b_rx) {
  Eigen::MatrixXd y = nn_predict(m, features.transpose());
  const double amp = std::abs(b_rx) + y(0, 0);
  return std::polar(amp, std::arg(b_rx) + y(0, 1));
}

// ---------------------------------------------------------------------------
// portable text serialization

inline void save_mmse(const MmseModel& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_mmse: cannot open " + path);
  f << "nftsim-eq-model v1\nkind mmse\nscope " << scope_name(m.scope) << "\n";
  f << "layout " << m.feature_layout.size();
  for (const auto& t : m.feature_layout) f << ' ' << t;
  f << "\ndim " << m.c.size() << "\n";
  f.precision(17);
  auto row = [&](const char* name, const Eigen::VectorXd& v) {
    f << name;
    for (Eigen::Index i = 0; i < v.size(); ++i) f << ' ' << v(i);
    f << "\n";
  };
  row("c", m.c);
  row("d", m.d);
  row("mean_n", m.mean_n);
  f << "mean_t " << m.mean_da << ' ' << m.mean_dphi << "\n";
}

inline MmseModel load_mmse(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_mmse: cannot open " + path);
  std::string tok, kind, scope;
  std::getline(f, tok);
  if (tok != "nftsim-eq-model v1") throw std::runtime_error("load_mmse: bad header");
  f >> tok >> kind >> tok >> scope;
  if (kind != "mmse") throw std::runtime_error("load_mmse: not an mmse model");
  MmseModel m;
  m.scope = scope == "single" ? Scope::single : (scope == "multi" ? Scope::multi : Scope::neighbors);
  std::size_t nl = 0;
  f >> tok >> nl;
  m.feature_layout.resize(nl);
  for (auto& t : m.feature_layout) f >> t;
  Eigen::Index dim = 0;
  f >> tok >> dim;
  auto row = [&](Eigen::VectorXd& v) {
    f >> tok;
    v.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) f >> v(i);
  };
  row(m.c);
  row(m.d);
  row(m.mean_n);
  f >> tok >> m.mean_da >> m.mean_dphi;
  if (!f) throw std::runtime_error("load_mmse: truncated file");
  return m;
}

inline void save_nn(const NnModel& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_nn: cannot open " + path);
  f << "nftsim-eq-model v1\nkind nn\n";
  f << "layout " << m.feature_layout.size();
  for (const auto& t : m.feature_layout) f << ' ' << t;
  f << "\ndims " << m.w1.cols() << ' ' << m.b1.size() << "\n";
  f.precision(17);
  auto mat = [&](const char* name, const Eigen::MatrixXd& w) {
    f << name;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index k = 0; k < w.cols(); ++k) f << ' ' << w(i, k);
    f << "\n";
  };
  mat("w1", m.w1);
  mat("b1", m.b1);
  mat("w2", m.w2);
  mat("b2", m.b2);
  mat("in_mean", m.in_mean);
  mat("in_std", m.in_std);
}

inline NnModel load_nn(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_nn: cannot open " + path);
  std::string tok, kind;
  std::getline(f, tok);
  if (tok != "nftsim-eq-model v1") throw std::runtime_error("load_nn: bad header");
  f >> tok >> kind;
  if (kind != "nn") throw std::runtime_error("load_nn: not an nn model");
  NnModel m;
  std::size_t nl = 0;
  f >> tok >> nl;
  m.feature_layout.resize(nl);
  for (auto& t : m.feature_layout) f >> t;
  Eigen::Index fin = 0, nh = 0;
  f >> tok >> fin >> nh;
  auto mat = [&](Eigen::MatrixXd& w, Eigen::Index r, Eigen::Index c) {
    f >> tok;
    w.resize(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index k = 0; k < c; ++k) f >> w(i, k);
  };
  Eigen::MatrixXd tmp;
  mat(m.w1, nh, fin);
  mat(tmp, nh, 1);
  m.b1 = tmp.col(0);
  mat(m.w2, 2, nh);
  mat(tmp, 2, 1);
  m.b2 = tmp.col(0);
  mat(tmp, fin, 1);
  m.in_mean = tmp.col(0);
  mat(tmp, fin, 1);
  m.in_std = tmp.col(0);
  if (!f) throw std::runtime_error("load_nn: truncated file");
  return m;
}

}  // namespace nftsim::eq
