#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cspin/channel.hpp"
#include "cspin/linalg.hpp"

namespace cspin {

struct SweepGrid {
  std::vector<double> g_tau;
  std::vector<double> omega_tau;
  int n_spins = 30;
  int p = 2;
  int q = 3;

  /// Throws unless both axes are non-empty and strictly ascending.
  void validate() const;
  std::size_t size() const { return g_tau.size() * omega_tau.size(); }
};

/// `count` points from `lo` to `hi` inclusive.
std::vector<double> linspace(double lo, double hi, int count);

struct SweepOptions {
  int threads = 0;       // 0: CSPIN_THREADS, then hardware concurrency
  bool dense = false;    // full eigendecomposition instead of the leading modes
  int leading_modes = 10;
};

/// Worker count after applying the defaults.
int resolve_threads(int requested);

/// One grid point. Fields a routine does not compute stay NaN; a failed point
/// keeps NaN everywhere and carries the error text.
struct PointRecord {
  std::size_t i_g = 0;
  std::size_t i_omega = 0;
  int n_spins = 0;
  double g_tau = 0.0;
  double omega_tau = 0.0;
  double purity;
  double gamma_1;
  double nu_1;
  double gamma_star;
  double ratio;
  double Gamma_1;
  double delta_1;
  double gamma_pq;
  bool valid = false;
  std::string error;

  PointRecord();
};

struct SweepResult {
  SweepGrid grid;
  std::vector<PointRecord> records;  // row-major in (i_g, i_omega)
  double seconds = 0.0;
  int threads = 1;

  const PointRecord& at(std::size_t i_g, std::size_t i_omega) const;
};

/// Runs body(i) for i in [0, count) on `threads` workers. Each index is
/// processed exactly once; results must be written by index.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

SweepResult purity_map(const SweepGrid& grid, const SweepOptions& options = {});

/// Gamma_*/Gamma_1 and Gamma_1/|delta_1| of the period-q map; valid marks
/// Gamma_1/|delta_1| >= sqrt(3).
SweepResult gap_maps(const SweepGrid& grid, const SweepOptions& options = {});

/// gamma_1, nu_1 and gamma_*/gamma_1 along omega at fixed g.
SweepResult frequency_cut(int n_spins, double g_tau, const std::vector<double>& omega_tau,
                          const SweepOptions& options = {});

/// Decay rate of the slowest oscillating mode for each (N, g) at omega = pi p / q.
/// Records are ordered with N outer and g inner; grid.omega_tau holds the single omega.
SweepResult size_scan(const std::vector<int>& n_spins, int p, int q, const std::vector<double>& g_tau,
                      const SweepOptions& options = {});

struct TrajectoryRow {
  long n = 0;
  double jz_over_n = 0.0;
  double jy_over_n = 0.0;
  double sigma_z = 0.0;
};

/// Stroboscopic <Jz>/N, <Jy>/N at the start of each period and the central
/// spin magnetization just before the following reset, for n = 0..steps.
std::vector<TrajectoryRow> trajectory(const ChannelParams& params, const Matrix& rho0, long steps, long stride = 1);

/// <Jz>/N for n = 0..steps at each omega: result(i_omega, n).
RealMatrix relaxation_fan(int n_spins, double g_tau, const std::vector<double>& omega_tau, const Matrix& rho0,
                          long steps, const SweepOptions& options = {});

}  // namespace cspin
