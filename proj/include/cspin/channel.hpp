#pragma once

#include <array>

#include "cspin/linalg.hpp"
#include "cspin/spin_core.hpp"

namespace cspin {

/// Model parameters. Only the products omega*tau and g*tau enter; tau = 1.
struct ChannelParams {
  int n_spins = 1;
  double omega_tau = 0.0;
  double g_tau = 0.0;

  void validate() const;
  bool operator==(const ChannelParams&) const = default;
};

/// Dense superoperator / Choi construction is refused above this dimension.
inline constexpr Index kDenseDimLimit = 120;

/// H = omega Jx + g (J+ sigma- + J- sigma+) on system (x) central spin.
/// System index slow, central index fast, central basis (|up>, |down>).
Matrix hamiltonian(const ChannelParams& params);

/// exp(-i H tau) through the Hermitian eigendecomposition of H.
Matrix unitary(const Matrix& h, double tau = 1.0);

/// One period of joint evolution followed by a reset of the central spin to |down>.
class ResetChannel {
 public:
  explicit ResetChannel(const ChannelParams& params);

  const ChannelParams& params() const noexcept { return params_; }
  const SpinSector& sector() const noexcept { return sector_; }
  Index dim() const noexcept { return sector_.dim(); }
  const Matrix& joint_unitary() const noexcept { return u_; }

  /// Tr_c[U (rho (x) |down><down|) U^dagger], built literally on the joint space.
  Matrix apply(const Matrix& rho) const;

  /// Same map through the two blocks K_s = <s|U|down>; used on hot paths.
  Matrix step(const Matrix& rho) const;
  Matrix step(const Matrix& rho, long count) const;

  /// Heisenberg-picture dual: X -> sum_s K_s^dagger X K_s.
  Matrix step_adjoint(const Matrix& x) const;

  /// <sigma_z> of the central spin just before the next reset.
  double central_spin_z(const Matrix& rho) const;

  const std::array<Matrix, 2>& blocks() const noexcept { return blocks_; }

 private:
  void require_dim(const Matrix& rho) const;

  ChannelParams params_;
  SpinSector sector_;
  Matrix u_;
  std::array<Matrix, 2> blocks_;  // {<up|U|down>, <down|U|down>}
};

Matrix apply_map(const ResetChannel& channel, const Matrix& rho);
double central_spin_observable(const ResetChannel& channel, const Matrix& rho);

/// Matrix of E^q acting on column-stacked vec(rho).
struct Superoperator {
  Matrix matrix;
  Index dim = 0;
  int power = 1;
};

Superoperator build_superoperator(const ResetChannel& channel, int power = 1);

/// C = sum_ab E_ab (x) E(E_ab), dim^2 x dim^2.
Matrix choi_matrix(const ResetChannel& channel);

}  // namespace cspin
