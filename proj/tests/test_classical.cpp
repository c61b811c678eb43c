#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "cspin/classical.hpp"
#include "cspin/error.hpp"
#include "test_util.hpp"

using namespace cspin;

namespace {

// Classical fourth-order Runge-Kutta on dp/dt = W p.
Probabilities rk4(const ClassicalProcess& proc, const Probabilities& p0, double t, int steps) {
  Eigen::Vector3d p(p0[0], p0[1], p0[2]);
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    const Eigen::Vector3d k1 = proc.W * p;
    const Eigen::Vector3d k2 = proc.W * (p + 0.5 * h * k1);
    const Eigen::Vector3d k3 = proc.W * (p + 0.5 * h * k2);
    const Eigen::Vector3d k4 = proc.W * (p + h * k3);
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {p(0), p(1), p(2)};
}

Probabilities random_simplex(std::mt19937_64& rng) {
  std::exponential_distribution<double> e;
  Probabilities p{e(rng), e(rng), e(rng)};
  const double s = p[0] + p[1] + p[2];
  for (auto& x : p) x /= s;
  return p;
}

}  // namespace

TEST_CASE("rate matrix structure") {
  const ClassicalProcess p = build_process(0.3, 0.1);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(p.W.col(j).sum()) < 1e-16);
  CHECK(p.valid);
  CHECK(p.W(1, 0) == doctest::Approx(0.1 + 0.1 / std::sqrt(3.0)));
  CHECK(p.W(2, 0) == doctest::Approx(0.1 - 0.1 / std::sqrt(3.0)));
  CHECK_FALSE(build_process(0.1, 0.1).valid);
  CHECK(build_process(std::sqrt(3.0) * 0.2, 0.2).valid);
  CHECK_THROWS_AS(build_process(-1.0, 0.0), Error);
  CHECK_THROWS_AS(build_process(1.0, std::nan("")), Error);
}

TEST_CASE("closed form against an ODE integrator") {
  std::mt19937_64 rng(5);
  for (auto [G, d] : {std::pair{0.3, 0.1}, std::pair{1.2, -0.4}, std::pair{0.05, 0.02}, std::pair{0.7, 0.0}}) {
    const ClassicalProcess proc = build_process(G, d);
    const Probabilities p0 = random_simplex(rng);
    for (double t : {0.0, 0.5, 3.0, 20.0}) {
      const Probabilities a = evolve_closed_form(proc, p0, t);
      const Probabilities b = rk4(proc, p0, t, 4000);
      for (int j = 0; j < 3; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-8);
    }
  }
}

TEST_CASE("closed form against the matrix exponential") {
  const ClassicalProcess proc = build_process(0.9, 0.35);
  const Probabilities p0{0.6, 0.3, 0.1};
  for (double t : {0.1, 1.0, 7.5}) {
    const Matrix w = proc.W.cast<Complex>() * t;
    const Matrix e = testutil::expm_taylor(w);
    const Probabilities a = evolve_closed_form(proc, p0, t);
    for (int j = 0; j < 3; ++j) {
      const double ref = (e.row(j) * Eigen::Vector3cd(p0[0], p0[1], p0[2]))(0).real();
      CHECK(std::abs(a[j] - ref) < 1e-12);
    }
  }
}

TEST_CASE("stationary current equals the bond current definition") {
  for (auto [G, d] : {std::pair{0.3, 0.1}, std::pair{1.0, -0.5}, std::pair{2.0, 1e-6}}) {
    const ClassicalProcess proc = build_process(G, d);
    const Probabilities uniform{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    for (double j : bond_currents(proc, uniform)) {
      CHECK(std::abs(j - stationary_current(proc)) <= 1e-15 * std::max(1.0, std::abs(d)));
    }
    // Long-time limit is uniform.
    const Probabilities p = evolve_closed_form(proc, {1.0, 0.0, 0.0}, 200.0 / G);
    for (double x : p) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("valid processes keep probabilities on the simplex") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double G = 0.01 + u(rng);
    const double d = (2.0 * u(rng) - 1.0) * G / std::sqrt(3.0);
    const ClassicalProcess proc = build_process(G, d);
    REQUIRE(proc.valid);
    const Probabilities p0 = random_simplex(rng);
    const Probabilities p = evolve_closed_form(proc, p0, 50.0 * u(rng));
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-13));
    for (double x : p) CHECK(x >= -1e-14);
  }
}

TEST_CASE("comparison with the exact period-tripled dynamics") {
  const ResetChannel ch({30, 2.0 * std::numbers::pi / 3.0, 0.25});
  const ChannelSpectrum sp = leading_eigs_matrix_free(ch, 1, 10);
  const MetastableManifold mf = analyze_period3(ch, sp);
  const Matrix up = projector(basis_state(ch.sector(), 0));
  const ComparisonReport rep = compare_to_exact(ch, sp, mf, up, 3000, 10, 100);
  CHECK(rep.valid);
  CHECK(rep.rows.size() == 31);
  CHECK(rep.rows[1].t_over_tau == 300);
  CHECK(rep.rows.front().jz_exact == doctest::Approx(0.5));
  CHECK(rep.max_dev_classical_jz < 0.03);
  CHECK(rep.max_dev_classical_jy < 0.03);
  CHECK(rep.max_dev_mm_jz < 0.03);
  for (const auto& r : rep.rows) CHECK(r.p[0] + r.p[1] + r.p[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(compare_to_exact(ch, sp, mf, up, -1), Error);
}
