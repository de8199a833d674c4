#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nftsim/core.hpp"
#include "nftsim/eq.hpp"
#include "nftsim/fiber.hpp"
#include "nftsim/io.hpp"
#include "nftsim/norm.hpp"
#include "nftsim/nft.hpp"
#include "nftsim/pulse.hpp"
#include "nftsim/rng.hpp"
#include "nftsim/rx.hpp"
#include "nftsim/txchain.hpp"

namespace nftsim::experiment {

enum class Preset { sim1, sim2, sim3, custom };
enum class EqKind { none, mmse_single, mmse_multi, mmse_neighbors, nn };

inline const char* preset_name(Preset p) {
  switch (p) {
    case Preset::sim1: return "sim1";
    case Preset::sim2: return "sim2";
    case Preset::sim3: return "sim3";
    default: return "custom";
  }
}

inline const char* eq_name(EqKind e) {
  switch (e) {
    case EqKind::none: return "none";
    case EqKind::mmse_single: return "mmse-single";
    case EqKind::mmse_multi: return "mmse-multi";
    case EqKind::mmse_neighbors: return "mmse-neighbors";
    default: return "nn";
  }
}

inline EqKind eq_from_name(const std::string& s) {
  if (s == "none") return EqKind::none;
  if (s == "mmse-single") return EqKind::mmse_single;
  if (s == "mmse-multi") return EqKind::mmse_multi;
  if (s == "mmse-neighbors") return EqKind::mmse_neighbors;
  if (s == "nn") return EqKind::nn;
  throw std::invalid_argument("unknown equalizer '" + s + "'");
}

struct ExperimentConfig {
  Preset preset = Preset::sim2;
  pulse::FramePlan plan;
  fiber::LinkConfig link;
  rx::RxConfig rxcfg;
  txchain::DacModel dac;
  txchain::PicSpec pic;
  double t_fwhm_ps = 67.0;
  std::vector<EqKind> equalizers{EqKind::none};
  std::uint64_t n_bits = 8000;       // total QPSK bits across all channels
  std::uint64_t n_training = 500;    // training windows per channel
  std::uint64_t seed = 1;
  std::vector<double> distances_km;  // evaluation taps, multiples of the span
  bool noise_on = true;
  bool paper_scale = false;
  double runtime_budget = 1e10;      // spans x steps x samples guard
  int nn_hidden = 100;

  int windows_per_channel() const {
    return static_cast<int>(n_bits / (2ull * static_cast<std::uint64_t>(plan.n_channels)));
  }
};

/// Table-I presets. Distances default to one tap every three spans out to
/// 2400 km; override in the config for custom sweeps.
inline ExperimentConfig make_preset(Preset p, std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.preset = p;
  c.seed = seed;
  c.link.fiber = {};  // D = 4.5, alpha = 0.2, gamma = 1.6, 1550 nm, 50 km spans
  c.link.span_amp.nf_db = 5.0;
  c.link.step = {};
  switch (p) {
    case Preset::sim1:
      c.plan = {4, 250.0, 10.0, 1000.0, 0.0};
      c.link.launch_power_dbm = 2.66;
      break;
    case Preset::sim3:
      c.plan = {4, 100.0, 10.0, 500.0, 100.0};
      c.link.launch_power_dbm = 5.67;
      break;
    case Preset::sim2:
    default:
      c.plan = {4, 150.0, 10.0, 600.0, 0.0};
      c.link.launch_power_dbm = 4.88;
      break;
  }
  c.rxcfg.window_ps = c.plan.window_ps;
  c.rxcfg.lo_frequencies_ghz.clear();
  for (int k = 0; k < c.plan.n_channels; ++k)
    c.rxcfg.lo_frequencies_ghz.push_back(c.plan.carrier_offset_ghz(k));
  for (int s = 3; 50.0 * s <= 2400.0; s += 3) c.distances_km.push_back(50.0 * s);
  if (p == Preset::custom) c.preset = Preset::custom;
  return c;
}

inline ExperimentConfig make_paper_scale(Preset p, std::uint64_t seed = 1) {
  ExperimentConfig c = make_preset(p, seed);
  c.n_bits = 320000;
  c.n_training = 10000;
  c.paper_scale = true;
  c.distances_km.clear();
  for (int s = 1; 50.0 * s <= 3000.0; ++s) c.distances_km.push_back(50.0 * s);
  return c;
}

struct ReportRow {
  double distance_km = 0.0;
  int channel = -1;  // -1 = pooled over channels
  std::string equalizer;
  std::size_t n_bits = 0;
  double n_errors = 0.0;
  std::size_t erasures = 0;
  double mean_abs_dlambda = 0.0;
  double mean_abs_daprime = 0.0;
  double ber() const { return n_bits ? n_errors / static_cast<double>(n_bits) : 0.0; }
};

struct RunReport {
  std::vector<ReportRow> rows;
  fiber::CollisionMap collisions;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline long long largest_prime_factor(long long n) {
  long long best = 1;
  for (long long p = 2; p * p <= n; ++p)
    while (n % p == 0) {
      best = std::max(best, p);
      n /= p;
    }
  return std::max(best, n);
}

inline bool near_integer(double x) { return std::abs(x - std::llround(x)) < 1e-9; }

/// Total window count: data + >= 2 guard windows per side, commensurate with
/// both the DAC and the propagation/ADC grids, preferring FFT-friendly burst
/// lengths.
inline int choose_total_windows(int data_windows, double window_ps, double dac_rate_gsa,
                                double prop_rate_gsa) {
  const int min_total = data_windows + 4;
  auto commensurate = [&](int t) {
    return near_integer(t * window_ps * dac_rate_gsa * 1e-3) &&
           near_integer(t * window_ps * prop_rate_gsa * 1e-3);
  };
  int t0 = min_total;
  while (!commensurate(t0)) ++t0;
  int period = 1;
  while (!commensurate(t0 + period)) ++period;
  int best = t0;
  long long best_lpf = (std::numeric_limits<long long>::max)();
  for (int t = t0; t <= t0 + 16 * period; t += period) {
    const long long n80 = std::llround(t * window_ps * prop_rate_gsa * 1e-3);
    const long long lpf = largest_prime_factor(n80);
    if (lpf < best_lpf) {
      best_lpf = lpf;
      best = t;
      if (lpf <= 7) break;
    }
  }
  return best;
}

inline double circular_mean(const std::vector<double>& phases) {
  double s = 0.0, c = 0.0;
  for (double p : phases) {
    s += std::sin(p);
    c += std::cos(p);
  }
  return std::atan2(s, c);
}

}  // namespace detail

/// Per-tap detection output used by the equalizer stage.
struct TapDetection {
  double distance_km = 0.0;
  std::vector<std::vector<rx::RxSymbol>> symbols;  // [channel][data window]
};

/// Everything the equalizer/BER stage needs to know about the transmitted
/// burst.
struct TxRecord {
  std::vector<std::vector<std::uint8_t>> bits;  // [channel][2*data windows]
  std::vector<std::vector<cplx>> symbols;       // [channel][data windows]
  int guard_lead = 0;
  int total_windows = 0;
};

inline void config_validate(const ExperimentConfig& cfg, std::vector<std::string>* warnings) {
  cfg.plan.validate();
  cfg.link.fiber.validate();
  cfg.dac.validate();
  if (cfg.n_bits % (2ull * cfg.plan.n_channels) != 0)
    throw std::invalid_argument("config: n_bits must be a multiple of 2*n_channels");
  if (cfg.n_training * 8ull >= cfg.n_bits)
    throw std::invalid_argument("config: n_training must be < n_bits/8 symbols");
  for (double d : cfg.distances_km) {
    if (d < 0.0) throw std::invalid_argument("config: negative distance");
    const double spans = d / cfg.link.fiber.span_length_km;
    if (std::abs(spans - std::llround(spans)) > 1e-9)
      throw std::invalid_argument("config: distances must be whole spans");
  }
  const double max_d = cfg.distances_km.empty() ? 0.0 :
      *std::max_element(cfg.distances_km.begin(), cfg.distances_km.end());
  const double n_spans = max_d / cfg.link.fiber.span_length_km;
  const double steps = cfg.link.fiber.span_length_km / cfg.link.step.dz_km;
  const double samples = (cfg.windows_per_channel() + 8) * cfg.plan.window_ps * 0.080;
  const double cost = n_spans * steps * samples;
  if (warnings && cost > cfg.runtime_budget) {
    std::ostringstream os;
    os << "estimated cost " << io::fmt_num(cost) << " (spans x steps x samples) exceeds budget "
       << io::fmt_num(cfg.runtime_budget);
    warnings->push_back(os.str());
  }
}

/// canonical config echo: every resolved field in a fixed order
inline std::string config_echo(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
  kv("preset", preset_name(c.preset));
  kv("seed", std::to_string(c.seed));
  kv("n_bits", std::to_string(c.n_bits));
  kv("n_training", std::to_string(c.n_training));
  kv("noise", c.noise_on ? "on" : "off");
  kv("paper_scale", c.paper_scale ? "true" : "false");
  kv("plan.n_channels", std::to_string(c.plan.n_channels));
  kv("plan.delta_t_ps", io::fmt_num(c.plan.delta_t_ps));
  kv("plan.delta_f_ghz", io::fmt_num(c.plan.delta_f_ghz));
  kv("plan.window_ps", io::fmt_num(c.plan.window_ps));
  kv("plan.downtime_ps", io::fmt_num(c.plan.downtime_ps));
  kv("t_fwhm_ps", io::fmt_num(c.t_fwhm_ps));
  kv("fiber.dispersion_d", io::fmt_num(c.link.fiber.dispersion_d));
  kv("fiber.attenuation_db_km", io::fmt_num(c.link.fiber.attenuation_db_km));
  kv("fiber.kerr_gamma", io::fmt_num(c.link.fiber.kerr_gamma));
  kv("fiber.center_wavelength_nm", io::fmt_num(c.link.fiber.center_wavelength_nm));
  kv("fiber.span_length_km", io::fmt_num(c.link.fiber.span_length_km));
  kv("link.launch_power_dbm", io::fmt_num(c.link.launch_power_dbm));
  kv("link.span_nf_db", io::fmt_num(c.link.span_amp.nf_db));
  kv("link.step_dz_km", io::fmt_num(c.link.step.dz_km));
  kv("dac.bits", std::to_string(c.dac.bits));
  kv("dac.bandwidth_ghz", io::fmt_num(c.dac.bandwidth_ghz));
  kv("dac.rate_gsa", io::fmt_num(c.dac.rate_gsa));
  kv("rx.filter_bw_ghz", io::fmt_num(c.rxcfg.optical_filter.bw_3db_ghz));
  kv("rx.adc_rate_gsa", io::fmt_num(c.rxcfg.adc_rate_gsa));
  kv("pic.off_chip_peak_dbm", io::fmt_num(c.pic.off_chip_peak_dbm));
  kv("pic.mmi_loss_db", io::fmt_num(c.pic.mmi_loss_db));
  {
    std::string eqs;
    for (std::size_t i = 0; i < c.equalizers.size(); ++i) {
      if (i) eqs += ',';
      eqs += eq_name(c.equalizers[i]);
    }
    kv("equalizers", eqs);
  }
  {
    std::string ds;
    for (std::size_t i = 0; i < c.distances_km.size(); ++i) {
      if (i) ds += ',';
      ds += io::fmt_num(c.distances_km[i]);
    }
    kv("distances_km", ds);
  }
  return os.str();
}

/// Build the transmitted burst: per-channel soliton trains on the DAC grid,
/// DAC conversion, PIC multiplexing (carriers + Chebyshev mux + MMI), the
/// off-chip attenuation, resampling to the propagation grid and the boost
/// EDFA. Returns the launch field.
inline SampledField build_launch(const ExperimentConfig& cfg, const norm::NormScales& scales,
                                 TxRecord& tx) {
  const int nch = cfg.plan.n_channels;
  const int data_w = cfg.windows_per_channel();
  const double prop_rate = cfg.rxcfg.adc_rate_gsa;  // propagation grid = ADC grid
  tx.total_windows = detail::choose_total_windows(data_w, cfg.plan.window_ps,
                                                  cfg.dac.rate_gsa, prop_rate);
  tx.guard_lead = (tx.total_windows - data_w) / 2;

  RandomStream bitgen(cfg.seed, "tx.bits");
  RandomStream guardgen(cfg.seed, "tx.guard_bits");
  tx.bits.assign(nch, {});
  tx.symbols.assign(nch, {});
  std::vector<std::vector<cplx>> all_symbols(nch);
  for (int ch = 0; ch < nch; ++ch) {
    tx.bits[ch].resize(2 * data_w);
    for (auto& b : tx.bits[ch]) b = static_cast<std::uint8_t>(bitgen.bit());
    tx.symbols[ch] = pulse::qpsk_map(tx.bits[ch]);
    std::vector<std::uint8_t> gbits(2 * (tx.total_windows - data_w));
    for (auto& b : gbits) b = static_cast<std::uint8_t>(guardgen.bit());
    const auto gsyms = pulse::qpsk_map(gbits);
    auto& all = all_symbols[ch];
    all.insert(all.end(), gsyms.begin(), gsyms.begin() + tx.guard_lead);
    all.insert(all.end(), tx.symbols[ch].begin(), tx.symbols[ch].end());
    all.insert(all.end(), gsyms.begin() + tx.guard_lead, gsyms.end());
  }

  std::vector<SampledField> channels;
  channels.reserve(nch);
  for (int ch = 0; ch < nch; ++ch) {
    SampledField base = pulse::assemble_channel(all_symbols[ch], cfg.plan, ch, scales,
                                                cfg.dac.rate_gsa);
    channels.push_back(txchain::dac_convert(base, cfg.dac));
  }
  SampledField mux = txchain::multiplex(channels, cfg.plan, cfg.pic);
  mux = txchain::attenuate_to_peak(mux, cfg.pic.off_chip_peak_dbm);
  mux = resample(mux, prop_rate * 1e-3);

  txchain::EdfaModel boost;
  boost.nf_db = 5.0;
  if (cfg.noise_on) {
    RandomStream ase(cfg.seed, "edfa.tx");
    return txchain::edfa(mux, boost, &ase, cfg.link.launch_power_dbm);
  }
  return txchain::edfa(mux, boost, nullptr, cfg.link.launch_power_dbm);
}

/// Detect every data window of every channel at one link tap.
inline TapDetection detect_tap(const SampledField& field, double distance_km,
                               const ExperimentConfig& cfg, const norm::NormScales& scales,
                               const TxRecord& tx) {
  TapDetection tap;
  tap.distance_km = distance_km;
  const int nch = cfg.plan.n_channels;
  const int data_w = cfg.windows_per_channel();
  tap.symbols.assign(nch, {});

  rx::DetectOptions dopt;
  dopt.amp_ref_w = scales.p0_w * fiber::path_average_enhancement(cfg.link.fiber);
  const cplx tx_lambda{0.0, 0.5};

  for (int ch = 0; ch < nch; ++ch) {
    SampledField base = rx::demux_channel(field, cfg.rxcfg, ch);
    const double drift =
        fiber::channel_drift_ps_per_km(cfg.plan.carrier_offset_ghz(ch), cfg.link.fiber) *
        distance_km;
    tap.symbols[ch].reserve(data_w);
    for (int w = 0; w < data_w; ++w) {
      SampledField win =
          rx::truncate_window(base, w + tx.guard_lead, cfg.plan, ch, drift);
      tap.symbols[ch].push_back(rx::detect_symbol(win, tx_lambda, scales, dopt, ch, w));
    }
  }
  return tap;
}

namespace detail {

struct ChannelTargets {
  Eigen::VectorXd da, dphi;        // per data window; valid where usable
  std::vector<bool> usable;        // !erasure
};

inline ChannelTargets make_targets(const std::vector<rx::RxSymbol>& symbols,
                                   const std::vector<cplx>& tx_symbols) {
  ChannelTargets t;
  const std::size_t n = symbols.size();
  t.da.resize(n);
  t.dphi.resize(n);
  t.usable.assign(n, true);
  for (std::size_t w = 0; w < n; ++w) {
    if (symbols[w].erasure) {
      t.da(w) = 0.0;
      t.dphi(w) = 0.0;
      t.usable[w] = false;
      continue;
    }
    const cplx b = symbols[w].eigen.b;
    t.da(w) = 1.0 - std::abs(b);  // |b_Tx| = 1 at the nominal window center
    t.dphi(w) = wrap_phase(std::arg(tx_symbols[w]) - std::arg(b));
  }
  return t;
}

}  // namespace detail

/// Equalize and count one tap for one equalizer kind. Training uses the first
/// n_training data windows; BER is counted on the rest.
inline void evaluate_tap(const TapDetection& tap, const ExperimentConfig& cfg,
                         const TxRecord& tx, EqKind kind, RunReport& report) {
  const int nch = cfg.plan.n_channels;
  const int n_train = static_cast<int>(cfg.n_training);
  const int data_w = cfg.windows_per_channel();
  if (n_train >= data_w)
    throw std::invalid_argument("evaluate_tap: no evaluation windows left after training");

  double pooled_err = 0.0;
  std::size_t pooled_bits = 0, pooled_erasures = 0;

  for (int ch = 0; ch < nch; ++ch) {
    const auto& syms = tap.symbols[ch];
    const auto targets = detail::make_targets(syms, tx.symbols[ch]);

    eq::Scope scope = eq::Scope::single;
    if (kind == EqKind::mmse_multi) scope = eq::Scope::multi;
    if (kind == EqKind::mmse_neighbors) scope = eq::Scope::neighbors;
    const bool want_b = (kind == EqKind::nn);
    eq::FeatureBuild fb = eq::build_features(tap.symbols, ch, scope, want_b);

    // training rows: usable symbols among the first n_train windows
    std::vector<int> train_rows;
    for (int w = 0; w < n_train; ++w)
      if (targets.usable[w]) train_rows.push_back(w);

    std::optional<eq::MmseModel> mmse;
    std::optional<eq::NnModel> nn;
    double derotation = 0.0;
    if (kind == EqKind::none) {
      std::vector<double> offs;
      for (int w : train_rows)
        offs.push_back(std::arg(syms[w].eigen.b) - std::arg(tx.symbols[ch][w]));
      derotation = detail::circular_mean(offs);
    } else {
      Eigen::MatrixXd x(train_rows.size(), fb.x.cols());
      Eigen::VectorXd ta(train_rows.size()), tp(train_rows.size());
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        x.row(i) = fb.x.row(train_rows[i]);
        ta(i) = targets.da(train_rows[i]);
        tp(i) = targets.dphi(train_rows[i]);
      }
      if (kind == EqKind::nn) {
        Eigen::MatrixXd t2(train_rows.size(), 2);
        t2.col(0) = ta;
        t2.col(1) = tp;
        eq::NnTrainOptions nopt;
        nopt.hidden = cfg.nn_hidden;
        nn = eq::nn_train(x, t2, cfg.seed ^ RandomStream::fnv1a("nn." + std::to_string(ch) +
                                                                "@" + io::fmt_num(tap.distance_km)),
                          nopt, fb.layout);
      } else {
        mmse = eq::mmse_fit(x, ta, tp, scope, fb.layout);
      }
    }

    ReportRow row;
    row.distance_km = tap.distance_km;
    row.channel = ch;
    row.equalizer = eq_name(kind);
    double sum_dl = 0.0, sum_da = 0.0;
    std::size_t n_ok = 0;
    for (int w = n_train; w < data_w; ++w) {
      row.n_bits += 2;
      if (syms[w].erasure) {
        row.erasures += 1;
        row.n_errors += 1.0;  // random decision: 0.5 per bit
        continue;
      }
      const auto& fv = syms[w].feature;
      sum_dl += std::hypot(fv.d_lambda_re, fv.d_lambda_im);
      sum_da += std::hypot(fv.d_aprime_re, fv.d_aprime_im);
      ++n_ok;

      cplx b = syms[w].eigen.b;
      double phase;
      if (kind == EqKind::none) {
        phase = std::arg(b) - derotation;
      } else if (kind == EqKind::nn) {
        phase = std::arg(eq::nn_apply(*nn, fb.x.row(w).transpose(), b));
      } else {
        phase = std::arg(eq::mmse_apply(*mmse, fb.x.row(w).transpose(), b));
      }
      auto [b1, b0] = pulse::qpsk_decide(phase);
      if (b1 != tx.bits[ch][2 * w]) row.n_errors += 1.0;
      if (b0 != tx.bits[ch][2 * w + 1]) row.n_errors += 1.0;
    }
    row.mean_abs_dlambda = n_ok ? sum_dl / static_cast<double>(n_ok) : 0.0;
    row.mean_abs_daprime = n_ok ? sum_da / static_cast<double>(n_ok) : 0.0;
    pooled_err += row.n_errors;
    pooled_bits += row.n_bits;
    pooled_erasures += row.erasures;
    report.rows.push_back(std::move(row));
  }

  ReportRow all;
  all.distance_km = tap.distance_km;
  all.channel = -1;
  all.equalizer = eq_name(kind);
  all.n_bits = pooled_bits;
  all.n_errors = pooled_err;
  all.erasures = pooled_erasures;
  double dl = 0.0, da = 0.0;
  for (auto it = report.rows.end() - nch; it != report.rows.end(); ++it) {
    dl += it->mean_abs_dlambda;
    da += it->mean_abs_daprime;
  }
  all.mean_abs_dlambda = dl / nch;
  all.mean_abs_daprime = da / nch;
  report.rows.push_back(std::move(all));
}

/// Full pipeline: pulse -> txchain -> fiber -> rx -> eq, evaluating every
/// requested equalizer at every requested distance.
inline RunReport run_experiment(const ExperimentConfig& cfg,
                                const std::function<void(const std::string&)>& progress = {}) {
  RunReport report;
  report.seed = cfg.seed;
  config_validate(cfg, &report.warnings);
  report.config_echo = config_echo(cfg);

  const norm::NormScales scales = norm::derive_scales(cfg.link.fiber, cfg.t_fwhm_ps);
  const double max_d = cfg.distances_km.empty() ? 0.0 :
      *std::max_element(cfg.distances_km.begin(), cfg.distances_km.end());
  report.collisions = fiber::collision_map(cfg.plan, cfg.link.fiber, cfg.t_fwhm_ps,
                                           std::max(max_d, cfg.link.fiber.span_length_km));

  TxRecord tx;
  SampledField launch = build_launch(cfg, scales, tx);
  if (progress) progress("launch field built: " + std::to_string(launch.size()) + " samples");

  std::set<long long> wanted;
  for (double d : cfg.distances_km)
    wanted.insert(std::llround(d / cfg.link.fiber.span_length_km));

  std::vector<TapDetection> taps;
  if (wanted.count(0)) taps.push_back(detect_tap(launch, 0.0, cfg, scales, tx));

  const long long n_spans = wanted.empty() ? 0 : *wanted.rbegin();
  if (n_spans > 0) {
    fiber::LinkConfig link = cfg.link;
    link.n_spans = static_cast<int>(n_spans);
    fiber::SsfmStats stats;
    fiber::propagate_link(launch, link, cfg.seed, cfg.noise_on,
                          [&](int span, const SampledField& f) {
                            if (!wanted.count(span)) return;
                            const double d = span * cfg.link.fiber.span_length_km;
                            taps.push_back(detect_tap(f, d, cfg, scales, tx));
                            if (progress)
                              progress("detected tap at " + io::fmt_num(d) + " km");
                          },
                          &stats);
    for (const auto& w : stats.warnings) report.warnings.push_back(w);
  }

  for (const TapDetection& tap : taps)
    for (EqKind kind : cfg.equalizers) evaluate_tap(tap, cfg, tx, kind, report);
  return report;
}

// ---------------------------------------------------------------------------
// rendering

inline void write_report_csv(const RunReport& r, const std::string& path) {
  io::CsvWriter csv(path, {"distance_km", "channel", "equalizer", "n_bits", "n_errors",
                           "ber", "erasures", "mean_abs_dlambda", "mean_abs_daprime",
                           "sd_fec_pass", "hd_fec_pass"});
  for (const ReportRow& row : r.rows) {
    csv.write_row({io::fmt_num(row.distance_km),
                   row.channel < 0 ? std::string("all") : std::to_string(row.channel),
                   row.equalizer, std::to_string(row.n_bits), io::fmt_num(row.n_errors),
                   io::fmt_num(row.ber()), std::to_string(row.erasures),
                   io::fmt_num(row.mean_abs_dlambda), io::fmt_num(row.mean_abs_daprime),
                   row.ber() <= rx::kSdFecLimit ? "1" : "0",
                   row.ber() <= rx::kHdFecLimit ? "1" : "0"});
  }
}

inline void write_collision_csv(const fiber::CollisionMap& m, const std::string& path) {
  io::CsvWriter csv(path, {"kind", "channel_i", "channel_j", "distance_km"});
  for (const auto& p : m.pairs)
    for (double d : p.distances_km)
      csv.write_row({"pair", std::to_string(p.i), std::to_string(p.j), io::fmt_num(d)});
  for (double d : m.complete_km)
    csv.write_row({"complete", "", "", io::fmt_num(d)});
}

/// human-readable per-distance BER table with FEC pass/fail columns
inline std::string render_report(const RunReport& r) {
  std::ostringstream os;
  os << "# run report (seed " << r.seed << ")\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  os << "\n  distance_km  ch  equalizer        ber          erasures  SD-FEC  HD-FEC\n";
  for (const ReportRow& row : r.rows) {
    const std::string dist = io::fmt_num(row.distance_km);
    const std::string ch = row.channel < 0 ? "all" : std::to_string(row.channel);
    const std::string ber = io::fmt_num(row.ber());
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %11s  %3s  %-15s  %-11s  %8zu  %-6s  %-6s\n",
                  dist.c_str(), ch.c_str(), row.equalizer.c_str(), ber.c_str(), row.erasures,
                  row.ber() <= rx::kSdFecLimit ? "pass" : "FAIL",
                  row.ber() <= rx::kHdFecLimit ? "pass" : "FAIL");
    os << buf;
  }
  os << "\n# config\n" << r.config_echo;
  return os.str();
}

}  // namespace nftsim::experiment
