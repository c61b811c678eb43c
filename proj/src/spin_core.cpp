#include "cspin/spin_core.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "cspin/error.hpp"

namespace cspin {

namespace {

constexpr double kPi = std::numbers::pi;

void require_square(const Matrix& op, const char* what) {
  if (op.rows() != op.cols() || op.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": operator must be square and non-empty");
  }
}

std::vector<double> uniform_axis(int count, double hi) {
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "husimi grid needs at least two points per axis");
  std::vector<double> axis(count);
  for (int i = 0; i < count; ++i) axis[i] = hi * static_cast<double>(i) / (count - 1);
  return axis;
}

// Trapezoid weights for a uniform axis with endpoints included.
std::vector<double> trapezoid_weights(const std::vector<double>& axis) {
  const std::size_t n = axis.size();
  const double h = axis[1] - axis[0];
  std::vector<double> w(n, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

}  // namespace

SpinSector::SpinSector(int n_spins) : n_spins_(n_spins) {
  if (n_spins < 1) throw Error(ErrorKind::InvalidArgument, "spin sector needs N >= 1");
}

SpinSector SpinSector::from_dim(Index dim) {
  if (dim < 2) throw Error(ErrorKind::DimensionMismatch, "operator dimension must be at least 2");
  return SpinSector(static_cast<int>(dim - 1));
}

CollectiveOps collective_ops(const SpinSector& sector) {
  const Index d = sector.dim();
  const double j = sector.j();
  CollectiveOps ops;
  ops.jz = Matrix::Zero(d, d);
  ops.jplus = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    ops.jz(k, k) = sector.m(k);
  }
  // J+ |J, m> = sqrt(J(J+1) - m(m+1)) |J, m+1>; m+1 sits one index above.
  for (Index k = 1; k < d; ++k) {
    const double m = sector.m(k);
    ops.jplus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  ops.jminus = ops.jplus.adjoint();
  ops.jx = 0.5 * (ops.jplus + ops.jminus);
  ops.jy = Complex(0.0, -0.5) * (ops.jplus - ops.jminus);
  return ops;
}

Vector basis_state(const SpinSector& sector, Index k) {
  if (k < 0 || k >= sector.dim()) throw Error(ErrorKind::InvalidArgument, "basis index out of range");
  Vector v = Vector::Zero(sector.dim());
  v(k) = 1.0;
  return v;
}

Matrix projector(const Vector& psi) { return psi * psi.adjoint(); }

Vector coherent_state(const SpinSector& sector, double theta, double phi) {
  if (!(theta >= 0.0 && theta <= kPi)) throw Error(ErrorKind::InvalidArgument, "theta must lie in [0, pi]");
  if (!(phi >= 0.0 && phi <= 2.0 * kPi)) throw Error(ErrorKind::InvalidArgument, "phi must lie in [0, 2pi]");
  const int two_j = sector.n_spins();
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double log_fact_2j = std::lgamma(two_j + 1.0);
  Vector out(sector.dim());
  for (Index k = 0; k < sector.dim(); ++k) {
    // k = J - m spin flips from the top state.
    const int flips = static_cast<int>(k);
    const double binom =
        std::exp(0.5 * (log_fact_2j - std::lgamma(flips + 1.0) - std::lgamma(two_j - flips + 1.0)));
    const double amp = binom * std::pow(c, two_j - flips) * std::pow(s, flips);
    out(k) = amp * std::polar(1.0, -sector.m(k) * phi);
  }
  return out;
}

double HusimiGrid::integral() const {
  const auto wt = trapezoid_weights(thetas);
  const auto wp = trapezoid_weights(phis);
  double sum = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double row_w = wt[i] * std::sin(thetas[i]);
    for (std::size_t j = 0; j < phis.size(); ++j) {
      sum += row_w * wp[j] * values(static_cast<Index>(i), static_cast<Index>(j));
    }
  }
  return sum;
}

double HusimiGrid::max_value() const { return values.maxCoeff(); }

HusimiGrid husimi_q(const Matrix& op, const HusimiGridSpec& spec) {
  require_square(op, "husimi_q");
  const SpinSector sector = SpinSector::from_dim(op.rows());
  const Index d = sector.dim();

  HusimiGrid grid;
  grid.thetas = uniform_axis(spec.n_theta, kPi);
  grid.phis = uniform_axis(spec.n_phi, 2.0 * kPi);
  grid.norm_const = static_cast<double>(d) / (4.0 * kPi);
  grid.values.resize(spec.n_theta, spec.n_phi);

  const Index n_phi = spec.n_phi;
  Matrix phases(n_phi, d);
  for (Index p = 0; p < n_phi; ++p) {
    for (Index k = 0; k < d; ++k) phases(p, k) = std::polar(1.0, -sector.m(k) * grid.phis[p]);
  }
  for (Index t = 0; t < spec.n_theta; ++t) {
    // Rows of `states` are coherent states along one theta ring.
    const Vector top = coherent_state(sector, grid.thetas[t], 0.0);
    Matrix states = phases * top.real().cast<Complex>().asDiagonal();
    const Matrix applied = states.conjugate() * op;  // row p: <theta,phi_p| O
    const Eigen::VectorXcd q = applied.cwiseProduct(states).rowwise().sum();
    grid.values.row(t) = grid.norm_const * q.real().transpose();
  }
  return grid;
}

int count_lobes(const HusimiGrid& grid, double fraction) {
  const Index nt = grid.values.rows();
  const Index np = grid.values.cols();
  const double threshold = fraction * grid.max_value();
  // phi = 2 pi duplicates phi = 0, so the last column folds onto the first.
  const Index cols = np - 1;
  std::vector<Index> parent(static_cast<std::size_t>(nt * cols));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  auto above = [&](Index i, Index j) { return grid.values(i, j) > threshold; };
  auto id = [&](Index i, Index j) { return i * cols + (j % cols); };

  for (Index i = 0; i < nt; ++i) {
    const bool pole = (i == 0 || i == nt - 1);
    for (Index j = 0; j < cols; ++j) {
      if (!above(i, j)) continue;
      if (pole && above(i, 0)) unite(id(i, j), id(i, 0));
      if (above(i, (j + 1) % cols)) unite(id(i, j), id(i, j + 1));
      if (i + 1 < nt && above(i + 1, j)) unite(id(i, j), id(i + 1, j));
    }
  }
  int lobes = 0;
  for (Index i = 0; i < nt; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (above(i, j) && find(id(i, j)) == id(i, j)) ++lobes;
    }
  }
  return lobes;
}

AitoffPoint aitoff_project(double theta, double phi) {
  const double lat = 0.5 * kPi - theta;
  const double lon = phi - kPi;
  const double alpha = std::acos(std::clamp(std::cos(lat) * std::cos(0.5 * lon), -1.0, 1.0));
  if (alpha == 0.0) return {0.0, 0.0};
  const double sinc_inv = alpha / std::sin(alpha);
  return {2.0 * std::cos(lat) * std::sin(0.5 * lon) * sinc_inv, std::sin(lat) * sinc_inv};
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "trace_distance: operand shapes differ");
  }
  return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

Matrix positivity_repair(const Matrix& op, double tol, bool density_matrix) {
  require_square(op, "positivity_repair");
  const Matrix h = hermitize(op);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const RealVector& ev = es.eigenvalues();
  if (ev(0) < -tol) {
    throw Error(ErrorKind::NotPositive,
                "positivity_repair: eigenvalue " + std::to_string(ev(0)) + " below -tol");
  }
  Matrix out = h;
  if (ev(0) < 0.0) {
    const RealVector clipped = ev.cwiseMax(0.0);
    out = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    out = hermitize(out);
  }
  if (density_matrix) {
    const double tr = out.trace().real();
    if (!(tr > 0.0)) throw Error(ErrorKind::NotPositive, "positivity_repair: trace is not positive");
    out /= tr;
  }
  return out;
}

double purity(const Matrix& rho) { return trace_product(rho, rho).real(); }

DensityCheck check_density_matrix(const Matrix& rho, double trace_tol, double herm_tol, double eig_tol) {
  DensityCheck c;
  c.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  c.hermiticity_error = hermiticity_defect(rho);
  c.min_eigenvalue = hermitian_eigenvalues(rho)(0);
  c.ok = c.trace_error <= trace_tol && c.hermiticity_error <= herm_tol && c.min_eigenvalue >= -eig_tol;
  return c;
}

}  // namespace cspin
