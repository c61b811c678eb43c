#pragma once

#include <vector>

#include "cspin/linalg.hpp"

namespace cspin {

/// Symmetric (spin J = N/2) sector of N spin-1/2 particles.
/// Basis |J, m> ordered with m descending from J to -J.
class SpinSector {
 public:
  explicit SpinSector(int n_spins);

  int n_spins() const noexcept { return n_spins_; }
  double j() const noexcept { return 0.5 * n_spins_; }
  Index dim() const noexcept { return n_spins_ + 1; }
  /// m value of basis index k.
  double m(Index k) const noexcept { return j() - static_cast<double>(k); }

  static SpinSector from_dim(Index dim);

 private:
  int n_spins_;
};

struct CollectiveOps {
  Matrix jx, jy, jz, jplus, jminus;
};

CollectiveOps collective_ops(const SpinSector& sector);

/// |J, m> basis vector with m = J - k.
Vector basis_state(const SpinSector& sector, Index k);
Matrix projector(const Vector& psi);

/// |theta, phi> = exp(-i phi Jz) exp(-i theta Jy) |J, J>, evaluated in closed form.
Vector coherent_state(const SpinSector& sector, double theta, double phi);

struct HusimiGridSpec {
  int n_theta = 101;
  int n_phi = 201;
};

/// Q(theta, phi) = (2J+1)/(4 pi) <theta, phi| O |theta, phi> on a uniform grid
/// with endpoints included. values(i, j) belongs to (thetas[i], phis[j]).
struct HusimiGrid {
  std::vector<double> thetas;
  std::vector<double> phis;
  RealMatrix values;
  double norm_const = 0.0;

  /// Trapezoidal estimate of the integral of Q sin(theta) over the sphere;
  /// approximates Tr[O].
  double integral() const;
  double max_value() const;
};

HusimiGrid husimi_q(const Matrix& op, const HusimiGridSpec& spec = {});

/// Number of connected regions where Q exceeds `fraction` of its maximum.
/// Neighbourhood wraps in phi and each pole row is a single point.
int count_lobes(const HusimiGrid& grid, double fraction = 0.5);

struct AitoffPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Aitoff map of latitude pi/2 - theta and longitude phi - pi.
AitoffPoint aitoff_project(double theta, double phi);

/// Half the sum of |eigenvalues| of (a - b); both arguments Hermitian.
double trace_distance(const Matrix& a, const Matrix& b);

/// Hermitize, clip eigenvalues in (-tol, 0) to zero, optionally renormalize
/// the trace to one. Throws NotPositive if any eigenvalue lies below -tol.
Matrix positivity_repair(const Matrix& op, double tol, bool density_matrix = true);

double purity(const Matrix& rho);

struct DensityCheck {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool ok = false;
};

DensityCheck check_density_matrix(const Matrix& rho, double trace_tol = 1e-10,
                                  double herm_tol = 1e-10, double eig_tol = 1e-8);

}  // namespace cspin
