#pragma once

#include <array>
#include <vector>

#include "cspin/channel.hpp"
#include "cspin/spectra.hpp"

namespace cspin {

/// Hermitian combinations of long-lived conjugate pairs. For each selected
/// mode (nu > 0 member) two partners are produced:
///   R_A = (R + R^dag)/2, R_B = (R - R^dag)/2i, L_A = L + L^dag, L_B = i(L - L^dag),
/// so r holds {R_A, R_B} for one pair and {R_A, R_B, R_C, R_D} for two.
struct HermitianPartners {
  std::vector<Index> modes;
  std::vector<Matrix> r;
  std::vector<Matrix> l;
  std::vector<double> c;  // sum of positive eigenvalues of each r
};

HermitianPartners hermitian_partners(const ChannelSpectrum& spectrum, const std::vector<Index>& modes);

struct ManifoldDiagnostics {
  double d_ss = 0.0;        // T(rho_ss, mean of the mus)
  double d_cyc = 0.0;       // max cyclic trace distance
  double lambda_n = 0.0;    // most negative projector eigenvalue
  double delta_r = 0.0;     // c_A/c_B - 2/sqrt(3), q = 3 only
  double min_mu_eig = 0.0;  // most negative mu eigenvalue
  std::vector<double> cyclic;
  std::vector<double> mu_min_eigs;
  std::vector<double> projector_min_eigs;
};

struct MetastableManifold {
  int q = 3;
  int cycle_step = 1;  // E mu_j ~ mu_{j + cycle_step}
  std::vector<Index> modes;  // spectral modes spanning the manifold, stationary first
  std::vector<Matrix> mus;
  std::vector<Matrix> projectors;
  std::vector<double> c;
  double ratio_r = 0.0;
  std::vector<double> Gamma;  // q gamma_j per selected pair
  std::vector<double> delta;  // q nu_j - 2 pi p, reduced
  double Gamma_star = 0.0;    // first rate outside the manifold, times q
  bool relabeled = false;
  Matrix rho_ss;
  ManifoldDiagnostics diagnostics;
};

/// Period-3 lobes from the spectral splits of R_A and R_B. `mode` is the nu > 0
/// member of the slow pair; when `channel` is given, the orientation of the
/// cycle is checked and mu_2, mu_3 are swapped if E mu_1 lands on mu_3.
MetastableManifold extract_ems3(const ChannelSpectrum& spectrum, Index mode, const ResetChannel* channel = nullptr);

/// Same, locating the slow pair as the first oscillating mode.
MetastableManifold analyze_period3(const ResetChannel& channel, const ChannelSpectrum& spectrum);

/// T(E mu_1, mu_2), T(E mu_2, mu_3), T(E mu_3, mu_1).
std::vector<double> cyclic_check3(const ResetChannel& channel, const MetastableManifold& manifold);

/// Period-5 lobes from the exact inverse relations. `modes` are the nu > 0
/// members of the nu ~ 4pi/5 and nu ~ 2pi/5 pairs (in that order); when
/// empty they are located by frequency.
MetastableManifold extract_ems5(const ChannelSpectrum& spectrum, std::vector<Index> modes = {},
                                const ResetChannel* channel = nullptr);

/// T(E mu_j, mu_{j+2}) for j = 1..5.
std::vector<double> cyclic_check5(const ResetChannel& channel, const MetastableManifold& manifold);

/// Generic cyclic distances T(E mu_j, mu_{j + step}).
std::vector<double> cyclic_distances(const ResetChannel& channel, const std::vector<Matrix>& mus, int step);

/// p_j = Tr[P_j rho0]. Throws if a component falls below -tolerance.
std::vector<double> mm_project(const MetastableManifold& manifold, const Matrix& rho0, double tolerance = 0.05);

/// Cyclically shifted mixture sum_k p_k mu_{k + step*n} for n = 0..n_periods-1,
/// evaluated on the given observables: result[n][o].
std::vector<std::vector<double>> plateau_dynamics(const MetastableManifold& manifold, const std::vector<double>& p0,
                                                  long n_periods, const std::vector<Matrix>& observables);

/// State predicted for period n.
Matrix plateau_state(const MetastableManifold& manifold, const std::vector<double>& p0, long n);

/// Truncated spectral sum over the manifold modes only.
Matrix mm_approx_evolution(const ChannelSpectrum& spectrum, const MetastableManifold& manifold, const Matrix& rho0,
                           long n);

struct PlateauWindow {
  long begin = 0;
  long end = 0;
};

/// Periods (in units of tau) between the decay of the fast modes and the
/// onset of the slow drift: [k_fast / gamma_*, k_slow / max(gamma_1, |delta_1|/q)].
PlateauWindow plateau_window(const MetastableManifold& manifold, double k_fast = 5.0, double k_slow = 0.02);

/// Exact evolution against the manifold projection and the cyclically shifted
/// initial mixture, per period of E with observables Jz/N and Jy/N.
struct DynamicsRow {
  long n = 0;
  double jz_exact = 0.0, jz_mm = 0.0, jz_mixture = 0.0;
  double jy_exact = 0.0, jy_mm = 0.0, jy_mixture = 0.0;
};

struct DynamicsReport {
  std::vector<DynamicsRow> rows;
  std::vector<double> p0;
  long mm_from = 0;                     // deviations of the projection counted for n >= mm_from
  long mixture_from = 0, mixture_to = 0;  // window for the mixture deviations
  double max_dev_mm_jz = 0.0, max_dev_mm_jy = 0.0;
  double max_dev_mixture_jz = 0.0, max_dev_mixture_jy = 0.0;
};

/// Rows are kept for n % stride == 0 and for every n inside [keep_from, keep_to].
DynamicsReport compare_manifold_dynamics(const ResetChannel& channel, const ChannelSpectrum& spectrum,
                                         const MetastableManifold& manifold, const Matrix& rho0, long n_max,
                                         long mm_from, long mixture_from, long mixture_to, long stride = 1,
                                         long keep_from = 0, long keep_to = -1, double tolerance = 0.05);

}  // namespace cspin
