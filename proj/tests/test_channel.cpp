#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "cspin/channel.hpp"
#include "cspin/error.hpp"
#include "test_util.hpp"

using namespace cspin;

namespace {
const Complex kI(0.0, 1.0);

Matrix sigma_z_joint(Index d) {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  return kron(Matrix::Identity(d, d), z);
}
}  // namespace

TEST_CASE("Hamiltonian structure") {
  const Matrix h = hamiltonian({6, 0.7, 0.3});
  CHECK(h.rows() == 14);
  CHECK(max_abs(h - h.adjoint()) < 1e-14);

  // Excitation number is conserved without the drive.
  const Matrix h0 = hamiltonian({6, 0.0, 0.3});
  const auto o = collective_ops(SpinSector(6));
  const Matrix n = kron(o.jz, Matrix::Identity(2, 2)) + 0.5 * sigma_z_joint(7);
  CHECK(max_abs(h0 * n - n * h0) < 1e-12);

  Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian({1, 0.0, 1.0}));
  const auto e = es.eigenvalues();
  CHECK(e(0) == doctest::Approx(-1.0));
  CHECK(std::abs(e(1)) < 1e-14);
  CHECK(std::abs(e(2)) < 1e-14);
  CHECK(e(3) == doctest::Approx(1.0));
}

TEST_CASE("unitary against an independent exponential") {
  std::mt19937_64 rng(21);
  const Matrix h = testutil::random_hermitian(8, rng);
  CHECK(max_abs(unitary(h, 0.0) - Matrix::Identity(8, 8)) < 1e-14);
  const Matrix u = unitary(h, 0.9);
  CHECK(max_abs(u * u.adjoint() - Matrix::Identity(8, 8)) < 1e-12);
  CHECK(max_abs(u - testutil::expm_taylor(-kI * 0.9 * h)) < 1e-10);
  CHECK_THROWS_AS(unitary(testutil::random_matrix(4, rng)), Error);
}

TEST_CASE("decoupled and dark-state limits") {
  std::mt19937_64 rng(22);
  const ResetChannel free({5, 0.8, 0.0});
  const Matrix rho = testutil::random_density(6, rng);
  const auto o = collective_ops(SpinSector(5));
  const Matrix r = testutil::expm_taylor(-kI * 0.8 * o.jx);
  CHECK(max_abs(free.apply(rho) - r * rho * r.adjoint()) < 1e-12);
  CHECK(std::abs(central_spin_observable(free, rho) + 1.0) < 1e-15);
  Matrix top = Matrix::Zero(6, 6);
  top(0, 0) = 1.0;
  CHECK(central_spin_observable(free, top) == -1.0);
  CHECK(central_spin_observable(ResetChannel({5, 0.0, 0.0}), top) == -1.0);

  const ResetChannel dark({5, 0.0, 0.4});
  Matrix bottom = Matrix::Zero(6, 6);
  bottom(5, 5) = 1.0;
  CHECK(max_abs(dark.apply(bottom) - bottom) < 1e-14);
}

TEST_CASE("Kraus path equals the literal map") {
  std::mt19937_64 rng(23);
  for (int n : {1, 3, 8}) {
    const ResetChannel ch({n, 1.1, 0.35});
    const Matrix rho = testutil::random_density(n + 1, rng);
    CHECK(max_abs(ch.step(rho) - ch.apply(rho)) < 1e-13);
    CHECK(max_abs(ch.step(rho, 3) - ch.apply(ch.apply(ch.apply(rho)))) < 1e-12);
    // Pre-reset magnetization from the joint state.
    Matrix reset = Matrix::Zero(2, 2);
    reset(1, 1) = 1.0;
    const Matrix joint = ch.joint_unitary() * kron(rho, reset) * ch.joint_unitary().adjoint();
    CHECK(std::abs(ch.central_spin_z(rho) - (sigma_z_joint(n + 1) * joint).trace().real()) < 1e-13);
    // Adjoint duality Tr[X E(rho)] = Tr[E*(X) rho].
    const Matrix x = testutil::random_hermitian(n + 1, rng);
    CHECK(std::abs((x * ch.step(rho)).trace() - (ch.step_adjoint(x) * rho).trace()) < 1e-12);
  }
  CHECK_THROWS_AS(ResetChannel({3, 1.0, 0.2}).apply(Matrix::Identity(3, 3)), Error);
}

TEST_CASE("trace and Hermiticity preservation") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t;
    const ResetChannel ch({n, u(rng), u(rng)});
    const Matrix x = testutil::random_hermitian(n + 1, rng);
    const Matrix y = ch.apply(x);
    CHECK(std::abs(y.trace() - x.trace()) < 1e-12);
    CHECK(max_abs(y - y.adjoint()) < 1e-12);
  }
}

TEST_CASE("superoperator consistency") {
  std::mt19937_64 rng(25);
  for (int n : {2, 4, 8}) {
    const ResetChannel ch({n, 2.0, 0.25});
    const Superoperator s1 = build_superoperator(ch, 1);
    CHECK(s1.matrix.rows() == (n + 1) * (n + 1));
    const Matrix rho = testutil::random_matrix(n + 1, rng);
    CHECK(max_abs(unvec(s1.matrix * vec(rho), n + 1) - ch.apply(rho)) < 1e-10);
    const Superoperator s3 = build_superoperator(ch, 3);
    CHECK(max_abs(s3.matrix - s1.matrix * s1.matrix * s1.matrix) < 1e-9);
    const Matrix out = unvec(s1.matrix * vec(Matrix::Identity(n + 1, n + 1) / double(n + 1)), n + 1);
    CHECK(std::abs(out.trace() - 1.0) < 1e-12);
    CHECK(hermitian_eigenvalues(out).minCoeff() > -1e-12);
  }
  CHECK_THROWS_AS(build_superoperator(ResetChannel({2, 1.0, 0.1}), 0), Error);
  CHECK_THROWS_AS(build_superoperator(ResetChannel({120, 1.0, 0.1}), 1), Error);
}

TEST_CASE("Choi matrix") {
  const Matrix c = choi_matrix(ResetChannel({4, 0.5, 0.3}));
  CHECK(max_abs(c - c.adjoint()) < 1e-12);
  const RealVector ev = hermitian_eigenvalues(c);
  CHECK(ev.minCoeff() >= -1e-10);
  CHECK((ev.array() > 1e-10).count() <= 2);

  const RealVector unitary_ev = hermitian_eigenvalues(choi_matrix(ResetChannel({4, 0.5, 0.0})));
  CHECK(unitary_ev(unitary_ev.size() - 1) == doctest::Approx(5.0));
  CHECK((unitary_ev.head(unitary_ev.size() - 1).array().abs() < 1e-10).all());

  // Tracing out the output factor gives the identity on the input.
  const Index d = 5;
  Matrix partial = Matrix::Zero(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b)
      for (Index i = 0; i < d; ++i) partial(a, b) += c(a * d + i, b * d + i);
  CHECK(max_abs(partial - Matrix::Identity(d, d)) < 1e-12);
}
