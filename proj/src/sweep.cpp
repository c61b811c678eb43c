#include "cspin/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

#include "cspin/error.hpp"
#include "cspin/spectra.hpp"
#include "cspin/spin_core.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace cspin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void single_threaded_blas() {
  if (openblas_set_num_threads) openblas_set_num_threads(1);
}

void require_ascending(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw Error(ErrorKind::InvalidArgument, std::string(name) + " axis is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw Error(ErrorKind::InvalidArgument, std::string(name) + " axis must be strictly ascending");
  }
}

bool use_dense(const ResetChannel& ch, const SweepOptions& o) {
  return o.dense || ch.dim() * ch.dim() <= o.leading_modes + 6;
}

ChannelSpectrum leading_spectrum(const ResetChannel& ch, const SweepOptions& o) {
  if (use_dense(ch, o)) return decompose(build_superoperator(ch), {.vectors = true, .strict = false});
  ArnoldiOptions ao;
  ao.lefts = false;
  return leading_eigs_matrix_free(ch, 1, o.leading_modes, ao);
}

template <typename F>
SweepResult run_points(SweepGrid grid, std::vector<PointRecord> records, const SweepOptions& options, F&& fill) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult result;
  result.threads = resolve_threads(options.threads);
  parallel_for(records.size(), result.threads, [&](std::size_t i) {
    PointRecord& r = records[i];
    try {
      fill(r);
    } catch (const std::exception& e) {
      r.purity = r.gamma_1 = r.nu_1 = r.gamma_star = r.ratio = r.Gamma_1 = r.delta_1 = r.gamma_pq = kNaN;
      r.valid = false;
      r.error = e.what();
    }
  });
  result.grid = std::move(grid);
  result.records = std::move(records);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<PointRecord> grid_records(const SweepGrid& grid) {
  std::vector<PointRecord> out;
  out.reserve(grid.size());
  for (std::size_t ig = 0; ig < grid.g_tau.size(); ++ig) {
    for (std::size_t iw = 0; iw < grid.omega_tau.size(); ++iw) {
      PointRecord r;
      r.i_g = ig;
      r.i_omega = iw;
      r.n_spins = grid.n_spins;
      r.g_tau = grid.g_tau[ig];
      r.omega_tau = grid.omega_tau[iw];
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

PointRecord::PointRecord()
    : purity(kNaN),
      gamma_1(kNaN),
      nu_1(kNaN),
      gamma_star(kNaN),
      ratio(kNaN),
      Gamma_1(kNaN),
      delta_1(kNaN),
      gamma_pq(kNaN) {}

void SweepGrid::validate() const {
  require_ascending(g_tau, "g_tau");
  require_ascending(omega_tau, "omega_tau");
  if (n_spins < 1) throw Error(ErrorKind::InvalidArgument, "n_spins must be >= 1");
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "linspace: count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
  v.back() = hi;
  return v;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CSPIN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const PointRecord& SweepResult::at(std::size_t i_g, std::size_t i_omega) const {
  return records.at(i_g * grid.omega_tau.size() + i_omega);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  single_threaded_blas();
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SweepResult purity_map(const SweepGrid& grid, const SweepOptions& options) {
  grid.validate();
  return run_points(grid, grid_records(grid), options, [&](PointRecord& r) {
    const ResetChannel ch({r.n_spins, r.omega_tau, r.g_tau});
    SweepOptions local = options;
    const Matrix rho = use_dense(ch, local) ? stationary_state_direct(ch) : stationary_state(leading_spectrum(ch, local));
    r.purity = purity(rho);
    r.valid = true;
  });
}

SweepResult gap_maps(const SweepGrid& grid, const SweepOptions& options) {
  grid.validate();
  return run_points(grid, grid_records(grid), options, [&](PointRecord& r) {
    const ResetChannel ch({r.n_spins, r.omega_tau, r.g_tau});
    const ChannelSpectrum sp = leading_spectrum(ch, options);
    const LeadingRates lr = leading_rate_and_gap(sp);
    r.gamma_1 = lr.gamma_1;
    r.nu_1 = lr.nu_1;
    r.gamma_star = lr.gamma_star;
    r.ratio = lr.ratio;
    r.Gamma_1 = grid.q * lr.gamma_1;
    r.delta_1 = reduce_angle(grid.q * lr.nu_1 - 2.0 * std::numbers::pi * grid.p);
    r.valid = r.Gamma_1 >= std::sqrt(3.0) * std::abs(r.delta_1);
  });
}

SweepResult frequency_cut(int n_spins, double g_tau, const std::vector<double>& omega_tau,
                          const SweepOptions& options) {
  SweepGrid grid;
  grid.n_spins = n_spins;
  grid.g_tau = {g_tau};
  grid.omega_tau = omega_tau;
  grid.validate();
  return run_points(grid, grid_records(grid), options, [&](PointRecord& r) {
    const ResetChannel ch({r.n_spins, r.omega_tau, r.g_tau});
    const LeadingRates lr = leading_rate_and_gap(leading_spectrum(ch, options));
    r.gamma_1 = lr.gamma_1;
    r.nu_1 = lr.nu_1;
    r.gamma_star = lr.gamma_star;
    r.ratio = lr.ratio;
    r.valid = true;
  });
}

SweepResult size_scan(const std::vector<int>& n_spins, int p, int q, const std::vector<double>& g_tau,
                      const SweepOptions& options) {
  if (n_spins.empty()) throw Error(ErrorKind::InvalidArgument, "size_scan: empty N list");
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "size_scan: q must be >= 1");
  SweepGrid grid;
  grid.n_spins = n_spins.front();
  grid.p = p;
  grid.q = q;
  grid.g_tau = g_tau;
  grid.omega_tau = {std::numbers::pi * p / q};
  require_ascending(g_tau, "g_tau");
  std::vector<PointRecord> records;
  for (std::size_t in = 0; in < n_spins.size(); ++in) {
    for (std::size_t ig = 0; ig < g_tau.size(); ++ig) {
      PointRecord r;
      r.i_g = ig;
      r.i_omega = in;
      r.n_spins = n_spins[in];
      r.g_tau = g_tau[ig];
      r.omega_tau = grid.omega_tau.front();
      records.push_back(std::move(r));
    }
  }
  return run_points(grid, std::move(records), options, [&](PointRecord& r) {
    const ResetChannel ch({r.n_spins, r.omega_tau, r.g_tau});
    SweepOptions local = options;
    if (r.n_spins > 70) local.dense = false;
    const ChannelSpectrum sp = leading_spectrum(ch, local);
    const auto mode = dominant_oscillatory_mode(sp);
    if (!mode) throw Error(ErrorKind::MatchingFailed, "no oscillating mode among the leading eigenvalues");
    r.gamma_pq = mode->gamma;
    r.nu_1 = mode->nu;
    r.valid = true;
  });
}

std::vector<TrajectoryRow> trajectory(const ChannelParams& params, const Matrix& rho0, long steps, long stride) {
  if (steps < 0 || stride < 1) throw Error(ErrorKind::InvalidArgument, "trajectory: bad steps or stride");
  const ResetChannel ch(params);
  const CollectiveOps ops = collective_ops(ch.sector());
  const double n = params.n_spins;
  std::vector<TrajectoryRow> rows;
  Matrix rho = rho0;
  for (long k = 0; k <= steps; ++k) {
    if (k % stride == 0 || k == steps) {
      rows.push_back({k, expectation(ops.jz, rho) / n, expectation(ops.jy, rho) / n, ch.central_spin_z(rho)});
    }
    if (k < steps) rho = ch.step(rho);
  }
  return rows;
}

RealMatrix relaxation_fan(int n_spins, double g_tau, const std::vector<double>& omega_tau, const Matrix& rho0,
                          long steps, const SweepOptions& options) {
  if (steps < 0) throw Error(ErrorKind::InvalidArgument, "relaxation_fan: negative step count");
  RealMatrix out(static_cast<Index>(omega_tau.size()), steps + 1);
  parallel_for(omega_tau.size(), resolve_threads(options.threads), [&](std::size_t i) {
    const ResetChannel ch({n_spins, omega_tau[i], g_tau});
    const Matrix jz = collective_ops(ch.sector()).jz;
    Matrix rho = rho0;
    for (long k = 0; k <= steps; ++k) {
      out(static_cast<Index>(i), k) = expectation(jz, rho) / n_spins;
      if (k < steps) rho = ch.step(rho);
    }
  });
  return out;
}

}  // namespace cspin
