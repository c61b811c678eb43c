#include "cspin/channel.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "cspin/error.hpp"

namespace cspin {

namespace {

constexpr Index kUp = 0;
constexpr Index kDown = 1;

void require_dense_feasible(Index dim, const char* what) {
  if (dim > kDenseDimLimit) {
    throw Error(ErrorKind::ResourceLimit,
                std::string(what) + ": dim " + std::to_string(dim) + " exceeds the dense limit " +
                    std::to_string(kDenseDimLimit) + "; use the matrix-free spectral routines");
  }
}

}  // namespace

void ChannelParams::validate() const {
  if (n_spins < 1) throw Error(ErrorKind::InvalidArgument, "n_spins must be >= 1");
  if (!std::isfinite(omega_tau) || !std::isfinite(g_tau)) {
    throw Error(ErrorKind::InvalidArgument, "omega_tau and g_tau must be finite");
  }
}

Matrix hamiltonian(const ChannelParams& params) {
  params.validate();
  const SpinSector sector(params.n_spins);
  const CollectiveOps ops = collective_ops(sector);
  Matrix sigma_minus = Matrix::Zero(2, 2);
  sigma_minus(kDown, kUp) = 1.0;
  const Matrix sigma_plus = sigma_minus.adjoint();
  const Matrix id2 = Matrix::Identity(2, 2);
  Matrix h = params.omega_tau * kron(ops.jx, id2) +
             params.g_tau * (kron(ops.jplus, sigma_minus) + kron(ops.jminus, sigma_plus));
  return h;
}

Matrix unitary(const Matrix& h, double tau) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::DimensionMismatch, "unitary: H must be square");
  if (hermiticity_defect(h) > 1e-12 * std::max(1.0, max_abs(h))) {
    throw Error(ErrorKind::InvalidArgument, "unitary: H is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  Vector phases(h.rows());
  for (Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, -es.eigenvalues()(k) * tau);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

ResetChannel::ResetChannel(const ChannelParams& params)
    : params_(params), sector_(params.n_spins), u_(unitary(hamiltonian(params))) {
  const Index d = sector_.dim();
  for (Index s : {kUp, kDown}) {
    Matrix block(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) block(i, j) = u_(2 * i + s, 2 * j + kDown);
    }
    blocks_[static_cast<std::size_t>(s)] = std::move(block);
  }
}

void ResetChannel::require_dim(const Matrix& rho) const {
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "operator is " + std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()) +
                    ", channel acts on dim " + std::to_string(dim()));
  }
}

Matrix ResetChannel::apply(const Matrix& rho) const {
  require_dim(rho);
  const Index d = dim();
  Matrix reset = Matrix::Zero(2, 2);
  reset(kDown, kDown) = 1.0;
  const Matrix joint = u_ * kron(rho, reset) * u_.adjoint();
  Matrix out = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) out(i, j) = joint(2 * i, 2 * j) + joint(2 * i + 1, 2 * j + 1);
  }
  return out;
}

Matrix ResetChannel::step(const Matrix& rho) const {
  require_dim(rho);
  Matrix out = blocks_[0] * rho * blocks_[0].adjoint();
  out.noalias() += blocks_[1] * rho * blocks_[1].adjoint();
  return out;
}

Matrix ResetChannel::step(const Matrix& rho, long count) const {
  Matrix out = rho;
  for (long n = 0; n < count; ++n) out = step(out);
  return out;
}

Matrix ResetChannel::step_adjoint(const Matrix& x) const {
  require_dim(x);
  Matrix out = blocks_[0].adjoint() * x * blocks_[0];
  out.noalias() += blocks_[1].adjoint() * x * blocks_[1];
  return out;
}

double ResetChannel::central_spin_z(const Matrix& rho) const {
  require_dim(rho);
  // The two outcome weights sum to Tr[rho]; this form is exactly -Tr[rho] when K_up = 0.
  const double up = trace_product(blocks_[0] * rho, blocks_[0].adjoint()).real();
  return 2.0 * up - rho.trace().real();
}

Matrix apply_map(const ResetChannel& channel, const Matrix& rho) { return channel.apply(rho); }

double central_spin_observable(const ResetChannel& channel, const Matrix& rho) {
  return channel.central_spin_z(rho);
}

Superoperator build_superoperator(const ResetChannel& channel, int power) {
  if (power < 1) throw Error(ErrorKind::InvalidArgument, "superoperator power must be >= 1");
  require_dense_feasible(channel.dim(), "build_superoperator");
  // vec(K rho K^dagger) = (conj(K) (x) K) vec(rho) under column stacking.
  const auto& k = channel.blocks();
  Matrix one = kron(k[0].conjugate(), k[0]);
  one += kron(k[1].conjugate(), k[1]);

  Superoperator s{Matrix(), channel.dim(), power};
  if (power == 1) {
    s.matrix = std::move(one);
    return s;
  }
  Matrix result;
  Matrix base = std::move(one);
  bool have = false;
  for (int e = power; e > 0; e >>= 1) {
    if (e & 1) {
      result = have ? Matrix(result * base) : base;
      have = true;
    }
    if (e > 1) base = base * base;
  }
  s.matrix = std::move(result);
  return s;
}

Matrix choi_matrix(const ResetChannel& channel) {
  require_dense_feasible(channel.dim(), "choi_matrix");
  const Index d = channel.dim();
  const Matrix s = build_superoperator(channel, 1).matrix;
  Matrix c(d * d, d * d);
  for (Index a = 0; a < d; ++a) {
    for (Index b = 0; b < d; ++b) {
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) c(a * d + i, b * d + j) = s(i + j * d, a + b * d);
      }
    }
  }
  return c;
}

}  // namespace cspin
