#include <catch2/catch_amalgamated.hpp>

#include "nftsim/analysis.hpp"

using namespace nftsim;
using Catch::Approx;

TEST_CASE("superpose basics") {
  SECTION("one pulse is that pulse") {
    analysis::SuperpositionCase c;
    c.lambdas = {cplx(0.3, 0.5)};
    c.delta_t_fwhm = 1.0;
    c.phases_deg = {30.0};
    const auto f = analysis::superpose(c);
    double peak = 0.0;
    for (const auto& v : f.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == Approx(1.0).margin(1e-6));  // 2 eta = 1
    const auto eigs = analysis::post_eigenvalues(c, {});
    REQUIRE(eigs.size() == 1);
    CHECK(std::abs(eigs[0].lambda - c.lambdas[0]) < 1e-5);
  }
  SECTION("well separated in time: eigenvalues at initial positions (limit 2.1)") {
    auto c = analysis::SuperpositionCase::two_eigen(0.4, 10.0, 90.0);
    const auto eigs = analysis::post_eigenvalues(c, {});
    REQUIRE(eigs.size() == 2);
    CHECK(std::abs(eigs[0].lambda - c.lambdas[0]) < 1e-3);
    CHECK(std::abs(eigs[1].lambda - c.lambdas[1]) < 1e-3);
  }
  SECTION("well separated in frequency: same recovery (limit 2.2)") {
    auto c = analysis::SuperpositionCase::two_eigen(10.0, 0.3, 45.0);
    const auto eigs = analysis::post_eigenvalues(c, {});
    REQUIRE(eigs.size() == 2);
    CHECK(std::abs(eigs[0].lambda - c.lambdas[0]) < 1e-3);
    CHECK(std::abs(eigs[1].lambda - c.lambdas[1]) < 1e-3);
  }
  SECTION("mismatched Im rejected") {
    analysis::SuperpositionCase c;
    c.lambdas = {cplx(0.0, 0.4)};
    c.phases_deg = {0.0};
    CHECK_THROWS_AS(analysis::superpose(c), std::invalid_argument);
  }
}

TEST_CASE("classification rules") {
  SECTION("dk = 0.8 at dT = 0.6 merges for any tested phase") {
    for (double phi : {0.0, 90.0, 180.0, 270.0}) {
      const auto label =
          analysis::classify_outcome(analysis::SuperpositionCase::two_eigen(0.8, 0.6, phi));
      INFO("phi = " << phi);
      CHECK(label.kind == analysis::OutcomeLabel::Kind::merging);
    }
  }
  SECTION("identical pulses at zero spacing: the A = 2 sech breather (co-propagation)") {
    const auto label =
        analysis::classify_outcome(analysis::SuperpositionCase::two_eigen(0.0, 0.0, 0.0));
    CHECK(label.kind == analysis::OutcomeLabel::Kind::copropagation);
    REQUIRE(label.post_eigenvalues.size() == 2);
    CHECK(std::abs(label.post_eigenvalues[0] - cplx(0.0, 0.5)) < 1e-4);
    CHECK(std::abs(label.post_eigenvalues[1] - cplx(0.0, 1.5)) < 1e-4);
  }
  SECTION("four pulses packed very close fuse into one eigenvalue") {
    const auto c = analysis::SuperpositionCase::four_eigen(0.05, {0, 0, 0, 0});
    const auto label = analysis::classify_outcome(c);
    CHECK(label.kind == analysis::OutcomeLabel::Kind::fusion);
    CHECK(label.post_eigenvalues.size() < 4);
  }
  SECTION("labels are periodic in the phase difference") {
    const auto l1 = analysis::classify_outcome(analysis::SuperpositionCase::two_eigen(0.9, 0.6, 30.0));
    const auto l2 =
        analysis::classify_outcome(analysis::SuperpositionCase::two_eigen(0.9, 0.6, 390.0));
    CHECK(l1.kind == l2.kind);
  }
  SECTION("classifier invariant under a global phase") {
    auto c1 = analysis::SuperpositionCase::two_eigen(0.7, 0.6, 90.0);
    auto c2 = c1;
    for (auto& p : c2.phases_deg) p += 120.0;
    const auto l1 = analysis::classify_outcome(c1);
    const auto l2 = analysis::classify_outcome(c2);
    CHECK(l1.kind == l2.kind);
    REQUIRE(l1.post_eigenvalues.size() == l2.post_eigenvalues.size());
    for (std::size_t i = 0; i < l1.post_eigenvalues.size(); ++i)
      CHECK(std::abs(l1.post_eigenvalues[i] - l2.post_eigenvalues[i]) < 1e-4);
  }
}

TEST_CASE("energy conservation across superposition (Parseval)") {
  const auto c = analysis::SuperpositionCase::four_eigen(0.5, {0, 90, 180, -90});
  const auto f = analysis::superpose(c);
  analysis::ClassifierOptions opt;
  nft::NftSpectrum spec;
  for (const auto& d : analysis::post_eigenvalues(c, opt, &f)) spec.discrete.push_back(d);
  spec.continuous = nft::continuous_spectrum(f, nft::default_xi_grid(f, 1024));
  const auto e = nft::energy_decomposition(f, spec);
  CHECK(std::abs(e.total - e.discrete - e.continuous) / e.total < 1e-3);
}

TEST_CASE("fusion boundary couples to the continuum energy") {
  // approaching the fusion boundary from above, the discrete energy drops
  const auto near_case = analysis::SuperpositionCase::four_eigen(0.16, {0, 0, 0, 0});
  const auto far = analysis::SuperpositionCase::four_eigen(1.6, {0, 0, 0, 0});
  const auto l_near = analysis::classify_outcome(near_case);
  const auto l_far = analysis::classify_outcome(far);
  CHECK(l_near.continuum_energy_fraction > l_far.continuum_energy_fraction);
}

TEST_CASE("sweeps produce one row per grid point") {
  analysis::ClassifierOptions opt;
  opt.grid.samples_per_t0 = 32.0;  // keep the unit suite quick
  const auto pts = analysis::sweep_two({0.6, 1.2}, {0.6}, {0.0, 180.0}, opt);
  CHECK(pts.size() == 4);
  const auto rows = analysis::sweep_four({1.8, 2.0}, {{0, 0, 0, 0}}, opt);
  CHECK(rows.size() == 2);
  for (const auto& r : rows) CHECK(r.post_eigenvalues.size() == 4);
  CHECK(analysis::qpsk_phase_combinations().size() == 256);
}
