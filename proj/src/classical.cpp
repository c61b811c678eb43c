#include "cspin/classical.hpp"

#include <algorithm>
#include <cmath>

#include "cspin/error.hpp"
#include "cspin/spin_core.hpp"

namespace cspin {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

ClassicalProcess build_process(double Gamma, double delta) {
  if (!(Gamma >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidArgument, "build_process: need Gamma >= 0 and finite delta");
  }
  ClassicalProcess p;
  p.Gamma = Gamma;
  p.delta = delta;
  const double diag = -2.0 * Gamma / 3.0;
  const double fwd = Gamma / 3.0 + delta / kSqrt3;  // j -> j+1
  const double bwd = Gamma / 3.0 - delta / kSqrt3;  // j -> j-1
  p.W << diag, bwd, fwd,
         fwd, diag, bwd,
         bwd, fwd, diag;
  p.valid = Gamma >= kSqrt3 * std::abs(delta);
  return p;
}

Probabilities evolve_closed_form(const ClassicalProcess& process, const Probabilities& p0, double t) {
  const double c = std::cos(process.delta * t);
  const double s = std::sin(process.delta * t);
  const double e = std::exp(-process.Gamma * t);
  const double same = (1.0 + 2.0 * c * e) / 3.0;
  const double from_prev = (1.0 - (c - kSqrt3 * s) * e) / 3.0;
  const double from_next = (1.0 - (c + kSqrt3 * s) * e) / 3.0;
  Probabilities p{};
  for (int j = 0; j < 3; ++j) {
    p[j] = same * p0[j] + from_prev * p0[(j + 2) % 3] + from_next * p0[(j + 1) % 3];
  }
  return p;
}

double stationary_current(const ClassicalProcess& process) { return 2.0 * process.delta / (3.0 * kSqrt3); }

std::array<double, 3> bond_currents(const ClassicalProcess& process, const Probabilities& p) {
  const auto& w = process.W;
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const int i = k, j = (k + 1) % 3;
    out[k] = p[i] * w(j, i) - p[j] * w(i, j);
  }
  return out;
}

ComparisonReport compare_to_exact(const ResetChannel& channel, const ChannelSpectrum& spectrum,
                                  const MetastableManifold& manifold, const Matrix& rho0, long horizon, long burn_in,
                                  long stride) {
  if (manifold.q != 3) throw Error(ErrorKind::InvalidArgument, "compare_to_exact needs a period-3 manifold");
  if (horizon < 0 || stride < 1) throw Error(ErrorKind::InvalidArgument, "compare_to_exact: bad horizon or stride");
  const double n_spins = channel.params().n_spins;
  const CollectiveOps ops = collective_ops(channel.sector());

  ComparisonReport report;
  report.burn_in = burn_in;
  const ClassicalProcess process = build_process(std::max(0.0, manifold.Gamma[0]), manifold.delta[0]);
  report.valid = process.valid;
  if (!process.valid) report.warning = "Gamma_1 < sqrt(3)|delta_1|: classical rates are not all nonnegative";

  std::array<double, 3> mu_jz{}, mu_jy{};
  for (int j = 0; j < 3; ++j) {
    mu_jz[j] = expectation(ops.jz, manifold.mus[j]);
    mu_jy[j] = expectation(ops.jy, manifold.mus[j]);
  }
  const std::vector<double> p0v = mm_project(manifold, rho0, 1.0);
  const Probabilities p0{p0v[0], p0v[1], p0v[2]};

  Matrix rho = rho0;
  for (long n = 0; n <= horizon; ++n) {
    if (n > 0) rho = channel.step(rho, 3);
    const bool record = n % stride == 0 || n == horizon;
    const bool scored = n >= burn_in;
    if (!record && !scored) continue;

    ComparisonRow row;
    row.t_over_tau = 3 * n;
    row.p = evolve_closed_form(process, p0, static_cast<double>(n));
    row.jz_exact = expectation(ops.jz, rho) / n_spins;
    row.jy_exact = expectation(ops.jy, rho) / n_spins;
    const Matrix mm = mm_approx_evolution(spectrum, manifold, rho0, 3 * n);
    row.jz_mm = expectation(ops.jz, mm) / n_spins;
    row.jy_mm = expectation(ops.jy, mm) / n_spins;
    for (int j = 0; j < 3; ++j) {
      row.jz_classical += row.p[j] * mu_jz[j] / n_spins;
      row.jy_classical += row.p[j] * mu_jy[j] / n_spins;
    }
    if (scored) {
      report.max_dev_classical_jz = std::max(report.max_dev_classical_jz, std::abs(row.jz_classical - row.jz_exact));
      report.max_dev_classical_jy = std::max(report.max_dev_classical_jy, std::abs(row.jy_classical - row.jy_exact));
      report.max_dev_mm_jz = std::max(report.max_dev_mm_jz, std::abs(row.jz_mm - row.jz_exact));
      report.max_dev_mm_jy = std::max(report.max_dev_mm_jy, std::abs(row.jy_mm - row.jy_exact));
    }
    if (record) report.rows.push_back(row);
  }
  return report;
}

}  // namespace cspin
