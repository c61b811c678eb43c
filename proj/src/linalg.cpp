#include "cspin/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cspin/error.hpp"

namespace cspin {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::NotPositive: return "not_positive";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::MatchingFailed: return "matching_failed";
    case ErrorKind::NotConverged: return "not_converged";
    case ErrorKind::ResourceLimit: return "resource_limit";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvec(const Vector& v, Index dim) {
  if (v.size() != dim * dim) {
    throw Error(ErrorKind::DimensionMismatch, "unvec: vector length is not dim^2");
  }
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

Matrix dagger(const Matrix& a) { return a.adjoint(); }

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Matrix& a) { return max_abs(a - a.adjoint()); }

Complex trace_product(const Matrix& a, const Matrix& b) {
  // Tr[a b] = sum_ij a_ij b_ji
  return (a.transpose().cwiseProduct(b)).sum();
}

double expectation(const Matrix& observable, const Matrix& rho) {
  return trace_product(observable, rho).real();
}

RealVector hermitian_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double positive_part_weight(const Matrix& a) {
  const RealVector ev = hermitian_eigenvalues(a);
  double sum = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 0.0) sum += ev(i);
  }
  return sum;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix pseudo_inverse(const Matrix& a, double rel_cutoff) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double cut = s.size() > 0 ? rel_cutoff * s(0) : 0.0;
  RealVector inv = RealVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace cspin
