#pragma once

#include <optional>
#include <vector>

#include "cspin/channel.hpp"
#include "cspin/linalg.hpp"

namespace cspin {

/// Eigen-decomposition of E^power, sorted by |lambda| descending with the
/// nu > 0 member of each conjugate pair first.
///
/// Right eigenmatrices are stored as columns vec(R_j) (unit Frobenius norm,
/// largest-magnitude entry real positive). Left eigenmatrices are stored as
/// coefficient columns w_j with Tr[L_j rho] = w_j^T vec(rho), biorthonormal
/// to the rights. Mode 0 is special: R_0 has unit trace and L_0 = Identity.
class ChannelSpectrum {
 public:
  ChannelSpectrum() = default;
  ChannelSpectrum(Index dim, int power, std::vector<Complex> eigenvalues, Matrix rights,
                  Matrix left_coeffs, std::vector<Index> defective = {});

  Index dim() const noexcept { return dim_; }
  int power() const noexcept { return power_; }
  Index size() const noexcept { return static_cast<Index>(eigenvalues_.size()); }
  bool has_vectors() const noexcept { return rights_.cols() > 0; }

  const std::vector<Complex>& eigenvalues() const noexcept { return eigenvalues_; }
  Complex eigenvalue(Index j) const { return eigenvalues_.at(static_cast<std::size_t>(j)); }

  /// gamma_j tau = -ln|lambda_j|, nu_j tau = arg(lambda_j).
  double rate(Index j) const;
  double frequency(Index j) const;
  std::vector<double> rates() const;
  std::vector<double> frequencies() const;

  Matrix right(Index j) const;
  Matrix left(Index j) const;
  /// Tr[L_j rho].
  Complex coefficient(Index j, const Matrix& rho) const;

  /// Index of the conjugate partner of mode j, or nullopt for real modes.
  std::optional<Index> conjugate_partner(Index j, double tol = 1e-9) const;

  const Matrix& right_vectors() const noexcept { return rights_; }
  const Matrix& left_coefficients() const noexcept { return lefts_; }

  /// Modes whose cluster could not be biorthonormalized (non-strict decompose only).
  const std::vector<Index>& defective_modes() const noexcept { return defective_; }
  bool is_defective(Index j) const;

 private:
  void require_left(Index j) const;

  Index dim_ = 0;
  int power_ = 1;
  std::vector<Complex> eigenvalues_;
  Matrix rights_;
  Matrix lefts_;
  std::vector<Index> defective_;
};

struct DecomposeOptions {
  bool vectors = true;
  /// Relative eigenvalue gap below which modes are biorthonormalized jointly.
  double cluster_tol = 1e-8;
  double pinv_cutoff = 1e-12;
  /// Throw on a non-diagonalizable cluster; otherwise mark its modes defective
  /// and leave their left eigenmatrices unavailable.
  bool strict = true;
};

ChannelSpectrum decompose(const Superoperator& superop, const DecomposeOptions& options = {});

/// R_0 / Tr[R_0], hermitized and positivity-repaired.
Matrix stationary_state(const ChannelSpectrum& spectrum);

/// Stationary state from the null space of (S - 1) with the trace constraint;
/// no eigendecomposition. Used by sweeps that only need rho_ss.
Matrix stationary_state_direct(const ResetChannel& channel);

struct LeadingRates {
  double gamma_1 = 0.0;
  double nu_1 = 0.0;
  double gamma_star = 0.0;
  double ratio = 0.0;
  Index index_1 = -1;
  Index index_star = -1;
};

LeadingRates leading_rate_and_gap(const ChannelSpectrum& spectrum);

/// Gap between a metastable manifold made of the first `manifold_size` modes
/// (including the stationary one) and the next mode.
struct ManifoldGap {
  double gamma_inside = 0.0;  // largest rate inside the manifold
  double gamma_star = 0.0;    // rate of mode `manifold_size`
  double ratio = 0.0;
};

ManifoldGap manifold_gap(const ChannelSpectrum& spectrum, Index manifold_size);

/// Decay rate of the slowest oscillating mode (smallest rate with nu != 0).
struct OscillatoryMode {
  Index index = -1;
  double gamma = 0.0;
  double nu = 0.0;
};

std::optional<OscillatoryMode> dominant_oscillatory_mode(const ChannelSpectrum& spectrum,
                                                         double imag_tol = 1e-10);

/// Rates of the period-q stroboscopic map Lambda = E^q:
/// Gamma_j = q gamma_j, delta_j = q nu_j - 2 pi p reduced to (-pi, pi].
struct StroboscopicRates {
  int p = 0;
  int q = 1;
  std::vector<double> Gamma;
  std::vector<double> delta;
};

StroboscopicRates stroboscopic_rates(const ChannelSpectrum& spectrum, int p, int q);

/// Reduce an angle to (-pi, pi].
double reduce_angle(double x);

/// sum_j lambda_j^n Tr[L_j rho0] R_j over the first `modes` modes (all when < 0).
Matrix evolve_spectral(const ChannelSpectrum& spectrum, const Matrix& rho0, long n, Index modes = -1);

struct ArnoldiOptions {
  int krylov_dim = 0;  // 0: automatic
  int max_restarts = 20000;
  double tol = 1e-13;
  bool lefts = true;
  double match_tol = 1e-8;
};

/// k largest-|lambda| eigenpairs of E^q from implicitly restarted Arnoldi
/// applied to vec -> vec(E^q(unvec)); lefts from the adjoint map.
ChannelSpectrum leading_eigs_matrix_free(const ResetChannel& channel, int q, int k,
                                         const ArnoldiOptions& options = {});

}  // namespace cspin
