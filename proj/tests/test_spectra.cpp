#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "cspin/error.hpp"
#include "cspin/spectra.hpp"
#include "test_util.hpp"

using namespace cspin;

namespace {
constexpr double kPi = std::numbers::pi;

Matrix gram(const ChannelSpectrum& s) { return s.left_coefficients().transpose() * s.right_vectors(); }
}  // namespace

TEST_CASE("ordering, gauge and normalization") {
  const ResetChannel ch({6, 1.3, 0.4});
  const auto sp = decompose(build_superoperator(ch));
  CHECK(sp.size() == 49);
  CHECK(std::abs(sp.eigenvalue(0) - 1.0) < 1e-9);
  for (Index j = 1; j < sp.size(); ++j) {
    CHECK(std::abs(sp.eigenvalue(j)) <= std::abs(sp.eigenvalue(j - 1)) + 1e-11);
    CHECK(std::abs(sp.eigenvalue(j)) <= 1.0 + 1e-9);
    const Matrix r = sp.right(j);
    CHECK(r.norm() == doctest::Approx(1.0));
    Index k = 0;
    sp.right_vectors().col(j).cwiseAbs().maxCoeff(&k);
    CHECK(std::abs(sp.right_vectors()(k, j).imag()) < 1e-14);
    CHECK(sp.right_vectors()(k, j).real() > 0.0);
  }
  CHECK(std::abs(sp.right(0).trace() - 1.0) < 1e-12);
  CHECK(max_abs(sp.left(0) - Matrix::Identity(7, 7)) < 1e-12);
  CHECK(max_abs(gram(sp) - Matrix::Identity(49, 49)) < 1e-8);
}

TEST_CASE("conjugation symmetry and pair ordering") {
  const auto sp = decompose(build_superoperator(ResetChannel({5, 2.2, 0.6})));
  for (Index j = 0; j < sp.size(); ++j) {
    if (std::abs(sp.eigenvalue(j).imag()) <= 1e-12) continue;
    const auto p = sp.conjugate_partner(j);
    REQUIRE(p.has_value());
    CHECK(std::abs(sp.eigenvalue(*p) - std::conj(sp.eigenvalue(j))) < 1e-9);
    if (sp.frequency(j) > 0) CHECK(*p > j);
  }
}

TEST_CASE("spectral reconstruction") {
  std::mt19937_64 rng(31);
  for (int n : {4, 8}) {
    const ResetChannel ch({n, 2.0 * kPi / 3.0, 0.3});
    const auto sp = decompose(build_superoperator(ch));
    const Matrix rho0 = testutil::random_density(n + 1, rng);
    for (long steps : {1L, 5L, 20L}) {
      CHECK(max_abs(evolve_spectral(sp, rho0, steps) - ch.step(rho0, steps)) < 1e-7);
    }
  }
}

TEST_CASE("unitary channel spectrum") {
  const auto sp = decompose(build_superoperator(ResetChannel({4, 0.9, 0.0})), {.vectors = false});
  for (const Complex& l : sp.eigenvalues()) CHECK(std::abs(std::abs(l) - 1.0) < 1e-10);
  CHECK_THROWS_AS(leading_rate_and_gap(sp), Error);
}

TEST_CASE("stationary state") {
  const ResetChannel dark({7, 0.0, 0.3});
  Matrix bottom = Matrix::Zero(8, 8);
  bottom(7, 7) = 1.0;
  // Without the drive the map has Jordan blocks: the strict path refuses it,
  // the lenient one still yields the stationary mode.
  CHECK_THROWS_AS(decompose(build_superoperator(dark)), Error);
  const auto sp = decompose(build_superoperator(dark), {.strict = false});
  CHECK_FALSE(sp.defective_modes().empty());
  CHECK_FALSE(sp.is_defective(0));
  CHECK_THROWS_AS(sp.left(sp.defective_modes().front()), Error);
  CHECK(trace_distance(stationary_state(sp), bottom) < 1e-8);
  CHECK(trace_distance(stationary_state_direct(dark), bottom) < 1e-8);

  const ResetChannel ch({10, 0.5, 0.3});
  const Matrix rho = stationary_state(decompose(build_superoperator(ch)));
  CHECK(max_abs(ch.step(rho) - rho) < 1e-8);
  CHECK(max_abs(rho - stationary_state_direct(ch)) < 1e-9);

  const auto unitary_sp = decompose(build_superoperator(ResetChannel({3, 0.4, 0.0})));
  CHECK_THROWS_AS(stationary_state(unitary_sp), Error);
}

TEST_CASE("stroboscopic rates and branch reduction") {
  CHECK(reduce_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(reduce_angle(-kPi) == doctest::Approx(kPi));
  CHECK(reduce_angle(0.25) == doctest::Approx(0.25));
  const auto sp = decompose(build_superoperator(ResetChannel({6, 2.0, 0.3})));
  const auto r = stroboscopic_rates(sp, 2, 3);
  for (Index j = 0; j < sp.size(); ++j) {
    CHECK(r.Gamma[j] >= -1e-9);
    const double direct = std::arg(std::pow(sp.eigenvalue(j), 3));
    CHECK(std::abs(reduce_angle(r.delta[j] - direct)) < 1e-10);
  }
  CHECK_THROWS_AS(stroboscopic_rates(decompose(build_superoperator(ResetChannel({3, 2.0, 0.3}), 2)), 1, 3),
                  Error);
}

TEST_CASE("matrix-free eigenpairs agree with the dense path") {
  const ResetChannel ch({8, 1.7, 0.35});
  const auto dense = decompose(build_superoperator(ch));
  const auto it = leading_eigs_matrix_free(ch, 1, 6);
  REQUIRE(it.size() == 6);
  for (Index j = 0; j < 6; ++j) CHECK(std::abs(it.eigenvalue(j) - dense.eigenvalue(j)) < 1e-8);
  CHECK(max_abs(gram(it) - Matrix::Identity(6, 6)) < 1e-8);
  for (Index j = 0; j < 6; ++j) {
    // Gauge-fixed eigenmatrices agree up to the pair ordering.
    CHECK(max_abs(it.right(j) - dense.right(j)) < 1e-6);
  }
  CHECK(std::abs(leading_eigs_matrix_free(ch, 1, 1).eigenvalue(0) - 1.0) < 1e-10);
  CHECK(std::abs(leading_eigs_matrix_free(ch, 3, 1).eigenvalue(0) - 1.0) < 1e-10);
}

TEST_CASE("matrix-free path without lefts") {
  const auto it = leading_eigs_matrix_free(ResetChannel({5, 1.0, 0.3}), 1, 3, {.lefts = false});
  CHECK(it.has_vectors());
  CHECK_THROWS_AS(it.left(0), Error);
}

TEST_CASE("(2,3) resonance at N = 30") {
  const ResetChannel ch({30, 2.0 * kPi / 3.0, 0.2});
  const auto sp = decompose(build_superoperator(ch));
  const auto lr = leading_rate_and_gap(sp);
  CHECK(lr.index_1 == 1);
  CHECK(std::abs(lr.nu_1 - 2.0 * kPi / 3.0) < 1e-3);
  CHECK(lr.ratio > 100.0);
  CHECK(lr.gamma_1 == doctest::Approx(5.77e-6).epsilon(0.02));
  CHECK(lr.gamma_star == doctest::Approx(1.03e-2).epsilon(0.02));
  CHECK(purity(stationary_state(sp)) == doctest::Approx(0.2949).epsilon(1e-3));

  const auto it = leading_eigs_matrix_free(ch, 1, 8);
  CHECK(std::abs(it.frequency(1) - 2.0 * kPi / 3.0) < 1e-3);
  CHECK(std::abs(it.eigenvalue(1) - sp.eigenvalue(1)) < 1e-8);
  CHECK(std::abs(it.eigenvalue(2) - sp.eigenvalue(2)) < 1e-8);
}

TEST_CASE("normal regime has no time-scale separation") {
  const auto lr = leading_rate_and_gap(decompose(build_superoperator(ResetChannel({30, 1.5, 0.2}))));
  CHECK(lr.ratio >= 1.0);
  CHECK(lr.ratio < 10.0);
  CHECK(lr.gamma_1 == doctest::Approx(2.09e-3).epsilon(0.02));
}
