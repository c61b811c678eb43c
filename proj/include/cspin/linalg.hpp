#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cspin {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Operators, states and eigenmatrices are all plain dense complex matrices.
using Operator = Matrix;

/// Column-stacking vectorization: vec(A)[i + j*dim] = A(i, j).
Vector vec(const Matrix& a);
Matrix unvec(const Vector& v, Index dim);

Matrix hermitize(const Matrix& a);
Matrix dagger(const Matrix& a);

/// Largest elementwise modulus.
double max_abs(const Matrix& a);
double hermiticity_defect(const Matrix& a);

Complex trace_product(const Matrix& a, const Matrix& b);  // Tr[a b]
double expectation(const Matrix& observable, const Matrix& rho);

/// Eigenvalues of the Hermitian part, ascending.
RealVector hermitian_eigenvalues(const Matrix& a);

/// Sum of positive eigenvalues of a Hermitian matrix.
double positive_part_weight(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

/// Moore-Penrose pseudo-inverse with a relative singular value cutoff.
Matrix pseudo_inverse(const Matrix& a, double rel_cutoff);

}  // namespace cspin
