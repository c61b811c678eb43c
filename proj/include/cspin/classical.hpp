#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cspin/channel.hpp"
#include "cspin/metastable.hpp"
#include "cspin/spectra.hpp"

namespace cspin {

using Probabilities = std::array<double, 3>;

/// Three-lobe master equation dp/dt = W p. Time is counted in periods of the
/// stroboscopic map (3 tau), matching Gamma = 3 gamma and delta = 3 nu - 2 pi p.
struct ClassicalProcess {
  double Gamma = 0.0;
  double delta = 0.0;
  Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
  bool valid = true;  // Gamma >= sqrt(3) |delta|: all off-diagonal rates nonnegative
};

ClassicalProcess build_process(double Gamma, double delta);

/// Closed-form solution at time t.
Probabilities evolve_closed_form(const ClassicalProcess& process, const Probabilities& p0, double t);

/// 2 delta / (3 sqrt 3); positive for the 1 -> 2 -> 3 orientation.
double stationary_current(const ClassicalProcess& process);

/// J_ij = p_i W_ji - p_j W_ij for the bonds (1,2), (2,3), (3,1).
std::array<double, 3> bond_currents(const ClassicalProcess& process, const Probabilities& p);

struct ComparisonRow {
  long t_over_tau = 0;
  Probabilities p{};
  double jz_exact = 0.0, jz_mm = 0.0, jz_classical = 0.0;  // all divided by N
  double jy_exact = 0.0, jy_mm = 0.0, jy_classical = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  long burn_in = 10;  // stroboscopic steps excluded from the deviations
  double max_dev_classical_jz = 0.0;
  double max_dev_classical_jy = 0.0;
  double max_dev_mm_jz = 0.0;
  double max_dev_mm_jy = 0.0;
  bool valid = true;
  std::string warning;
};

/// Exact stroboscopic evolution against the manifold projection and the
/// classical prediction sum_j p_j(n) Tr[O mu_j], for n = 0..horizon
/// stroboscopic steps; rows are recorded every `stride` steps.
ComparisonReport compare_to_exact(const ResetChannel& channel, const ChannelSpectrum& spectrum,
                                  const MetastableManifold& manifold, const Matrix& rho0, long horizon,
                                  long burn_in = 10, long stride = 1);

}  // namespace cspin
