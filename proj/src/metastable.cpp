#include "cspin/metastable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cspin/error.hpp"
#include "cspin/spin_core.hpp"

namespace cspin {

namespace {

constexpr double kPi = std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Index partner_of(const ChannelSpectrum& spectrum, Index j) {
  const auto p = spectrum.conjugate_partner(j);
  if (!p) {
    std::ostringstream msg;
    msg << "mode " << j << " (lambda = " << spectrum.eigenvalue(j) << ") has no conjugate partner";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  return *p;
}

// Positive (sign > 0) or negative spectral part of a Hermitian matrix, |weights|.
Matrix spectral_part(const Matrix& h, int sign) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  const RealVector& e = es.eigenvalues();
  RealVector w(e.size());
  for (Index i = 0; i < e.size(); ++i) w(i) = (sign > 0 ? e(i) > 0.0 : e(i) < 0.0) ? std::abs(e(i)) : 0.0;
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

double min_eig(const Matrix& h) { return hermitian_eigenvalues(h).minCoeff(); }

// Manifold modes: stationary, then each selected mode followed by its partner.
std::vector<Index> manifold_modes(const ChannelSpectrum& spectrum, const std::vector<Index>& selected) {
  std::vector<Index> out{0};
  for (Index j : selected) {
    out.push_back(j);
    out.push_back(partner_of(spectrum, j));
  }
  return out;
}

double first_rate_outside(const ChannelSpectrum& spectrum, const std::vector<Index>& modes) {
  const std::set<Index> inside(modes.begin(), modes.end());
  for (Index k = 1; k < spectrum.size(); ++k) {
    if (!inside.count(k)) return spectrum.rate(k);
  }
  return kNaN;
}

void fill_quality(MetastableManifold& m, const ResetChannel* channel) {
  auto& d = m.diagnostics;
  Matrix mean = Matrix::Zero(m.rho_ss.rows(), m.rho_ss.cols());
  for (const auto& mu : m.mus) mean += mu;
  mean /= static_cast<double>(m.mus.size());
  d.d_ss = trace_distance(m.rho_ss, hermitize(mean));
  d.mu_min_eigs.clear();
  d.projector_min_eigs.clear();
  for (const auto& mu : m.mus) d.mu_min_eigs.push_back(min_eig(mu));
  for (const auto& p : m.projectors) d.projector_min_eigs.push_back(min_eig(p));
  d.min_mu_eig = *std::min_element(d.mu_min_eigs.begin(), d.mu_min_eigs.end());
  d.lambda_n = *std::min_element(d.projector_min_eigs.begin(), d.projector_min_eigs.end());
  if (channel) {
    d.cyclic = cyclic_distances(*channel, m.mus, m.cycle_step);
    d.d_cyc = *std::max_element(d.cyclic.begin(), d.cyclic.end());
  } else {
    d.cyclic.clear();
    d.d_cyc = kNaN;
  }
}

}  // namespace

HermitianPartners hermitian_partners(const ChannelSpectrum& spectrum, const std::vector<Index>& modes) {
  if (!spectrum.has_vectors()) throw Error(ErrorKind::InvalidArgument, "hermitian_partners needs eigenvectors");
  HermitianPartners hp;
  hp.modes = modes;
  const Complex i(0.0, 1.0);
  for (Index j : modes) {
    partner_of(spectrum, j);
    if (spectrum.frequency(j) <= 0.0) {
      throw Error(ErrorKind::InvalidArgument, "hermitian_partners: select the nu > 0 member of each pair");
    }
    const Matrix r = spectrum.right(j);
    Matrix l = spectrum.left(j);
    l /= trace_product(l, r);
    hp.r.push_back(hermitize(r));
    hp.r.push_back(hermitize((r - r.adjoint()) / (2.0 * i)));
    hp.l.push_back(hermitize(l + l.adjoint()));
    hp.l.push_back(hermitize(i * (l - l.adjoint())));
  }
  for (const auto& x : hp.r) hp.c.push_back(positive_part_weight(x));
  return hp;
}

MetastableManifold extract_ems3(const ChannelSpectrum& spectrum, Index mode, const ResetChannel* channel) {
  const HermitianPartners hp = hermitian_partners(spectrum, {mode});
  const double ca = hp.c[0], cb = hp.c[1];
  if (ca <= 0.0 || cb <= 0.0) throw Error(ErrorKind::Degenerate, "extract_ems3: vanishing partner weight");
  const Index d = spectrum.dim();
  const Matrix id = Matrix::Identity(d, d);

  MetastableManifold m;
  m.q = 3;
  m.cycle_step = 1;
  m.modes = manifold_modes(spectrum, {mode});
  m.c = hp.c;
  m.ratio_r = ca / cb;
  m.rho_ss = stationary_state(spectrum);
  m.mus = {spectral_part(hp.r[0], +1) / ca, spectral_part(hp.r[1], -1) / cb, spectral_part(hp.r[1], +1) / cb};
  m.projectors = {id / 3.0 + ca * hp.l[0], id / 3.0 - ca * hp.l[0] / 2.0 - cb * hp.l[1],
                  id / 3.0 - ca * hp.l[0] / 2.0 + cb * hp.l[1]};
  m.Gamma = {3.0 * spectrum.rate(mode)};
  m.delta = {reduce_angle(3.0 * spectrum.frequency(mode))};
  m.Gamma_star = 3.0 * first_rate_outside(spectrum, m.modes);

  if (channel) {
    const Matrix next = channel->step(m.mus[0]);
    if (trace_distance(next, m.mus[2]) < trace_distance(next, m.mus[1])) {
      std::swap(m.mus[1], m.mus[2]);
      std::swap(m.projectors[1], m.projectors[2]);
      m.delta[0] = -m.delta[0];
      m.relabeled = true;
    }
  }
  fill_quality(m, channel);
  m.diagnostics.delta_r = m.ratio_r - 2.0 / std::sqrt(3.0);
  return m;
}

MetastableManifold analyze_period3(const ResetChannel& channel, const ChannelSpectrum& spectrum) {
  const LeadingRates lr = leading_rate_and_gap(spectrum);
  Index mode = lr.index_1;
  if (std::abs(spectrum.eigenvalue(mode).imag()) <= 1e-12) {
    throw Error(ErrorKind::MatchingFailed, "analyze_period3: the slowest mode is real, no period-3 pair");
  }
  if (spectrum.frequency(mode) < 0.0) mode = partner_of(spectrum, mode);
  return extract_ems3(spectrum, mode, &channel);
}

std::vector<double> cyclic_distances(const ResetChannel& channel, const std::vector<Matrix>& mus, int step) {
  const std::size_t q = mus.size();
  std::vector<double> out(q);
  for (std::size_t j = 0; j < q; ++j) {
    out[j] = trace_distance(hermitize(channel.step(mus[j])), mus[(j + static_cast<std::size_t>(step)) % q]);
  }
  return out;
}

std::vector<double> cyclic_check3(const ResetChannel& channel, const MetastableManifold& manifold) {
  if (manifold.q != 3) throw Error(ErrorKind::InvalidArgument, "cyclic_check3 needs a period-3 manifold");
  return cyclic_distances(channel, manifold.mus, 1);
}

MetastableManifold extract_ems5(const ChannelSpectrum& spectrum, std::vector<Index> modes, const ResetChannel* channel) {
  if (modes.empty()) {
    const double targets[2] = {4.0 * kPi / 5.0, 2.0 * kPi / 5.0};
    const Index search = std::min<Index>(spectrum.size(), 12);
    for (double target : targets) {
      for (Index j = 1; j < search; ++j) {
        if (spectrum.rate(j) > 1e-11 && std::abs(spectrum.frequency(j) - target) < 0.02) {
          modes.push_back(j);
          break;
        }
      }
    }
    if (modes.size() != 2) {
      std::ostringstream msg;
      msg << "extract_ems5: expected slow pairs near nu = 4pi/5 and 2pi/5; found frequencies [";
      for (Index j = 1; j < search; ++j) msg << (j > 1 ? ", " : "") << spectrum.frequency(j);
      msg << "]";
      throw Error(ErrorKind::MatchingFailed, msg.str());
    }
  }
  if (modes.size() != 2) throw Error(ErrorKind::InvalidArgument, "extract_ems5 needs exactly two modes");

  const HermitianPartners hp = hermitian_partners(spectrum, modes);
  for (double c : hp.c) {
    if (c <= 0.0) throw Error(ErrorKind::Degenerate, "extract_ems5: vanishing partner weight");
  }
  const Matrix a = hp.r[0] / hp.c[0], b = hp.r[1] / hp.c[1], c = hp.r[2] / hp.c[2], dd = hp.r[3] / hp.c[3];
  const Matrix la = hp.l[0] * hp.c[0], lb = hp.l[1] * hp.c[1], lc = hp.l[2] * hp.c[2], ld = hp.l[3] * hp.c[3];
  const Index d = spectrum.dim();
  const Matrix id = Matrix::Identity(d, d);

  MetastableManifold m;
  m.q = 5;
  m.cycle_step = 2;
  m.modes = manifold_modes(spectrum, modes);
  m.c = hp.c;
  m.ratio_r = hp.c[0] / hp.c[1];
  m.rho_ss = stationary_state(spectrum);
  const Matrix& s = m.rho_ss;
  m.mus = {
      hermitize(s + 2.0 / 3.0 * (a + c)),
      hermitize(s + (104.0 * a - 315.0 * b - 286.0 * c + 210.0 * dd) / 546.0),
      hermitize(s + (-286.0 * a - 210.0 * b + 104.0 * c - 315.0 * dd) / 546.0),
      hermitize(s + (-286.0 * a + 210.0 * b + 104.0 * c + 315.0 * dd) / 546.0),
      hermitize(s + (104.0 * a + 315.0 * b - 286.0 * c - 210.0 * dd) / 546.0),
  };
  m.projectors = {
      (id + 3.0 * la + 3.0 * lc) / 5.0,
      (id + la - 3.0 * lb + 2.0 * ld) / 5.0 - lc / 2.0,
      (id - 2.0 * lb + lc - 3.0 * ld) / 5.0 - la / 2.0,
      (id + 2.0 * lb + lc + 3.0 * ld) / 5.0 - la / 2.0,
      (id + la + 3.0 * lb - 2.0 * ld) / 5.0 - lc / 2.0,
  };
  for (Index j : modes) {
    m.Gamma.push_back(5.0 * spectrum.rate(j));
    m.delta.push_back(reduce_angle(5.0 * spectrum.frequency(j)));
  }
  m.Gamma_star = 5.0 * first_rate_outside(spectrum, m.modes);
  fill_quality(m, channel);
  m.diagnostics.delta_r = kNaN;
  return m;
}

std::vector<double> cyclic_check5(const ResetChannel& channel, const MetastableManifold& manifold) {
  if (manifold.q != 5) throw Error(ErrorKind::InvalidArgument, "cyclic_check5 needs a period-5 manifold");
  return cyclic_distances(channel, manifold.mus, 2);
}

std::vector<double> mm_project(const MetastableManifold& manifold, const Matrix& rho0, double tolerance) {
  std::vector<double> p;
  for (std::size_t j = 0; j < manifold.projectors.size(); ++j) {
    p.push_back(trace_product(manifold.projectors[j], rho0).real());
    if (p.back() < -tolerance) {
      std::ostringstream msg;
      msg << "mm_project: weight p_" << j + 1 << " = " << p.back() << " below -" << tolerance
          << "; state is outside the metastable regime";
      throw Error(ErrorKind::NotPositive, msg.str());
    }
  }
  return p;
}

Matrix plateau_state(const MetastableManifold& manifold, const std::vector<double>& p0, long n) {
  const long q = manifold.q;
  if (static_cast<long>(p0.size()) != q) throw Error(ErrorKind::DimensionMismatch, "plateau_state: need q weights");
  const long shift = ((manifold.cycle_step * n) % q + q) % q;
  Matrix out = Matrix::Zero(manifold.rho_ss.rows(), manifold.rho_ss.cols());
  for (long k = 0; k < q; ++k) out += p0[k] * manifold.mus[(k + shift) % q];
  return out;
}

std::vector<std::vector<double>> plateau_dynamics(const MetastableManifold& manifold, const std::vector<double>& p0,
                                                  long n_periods, const std::vector<Matrix>& observables) {
  // The prediction is periodic in n, so only q distinct states occur.
  std::vector<std::vector<double>> cycle;
  for (long n = 0; n < manifold.q; ++n) {
    const Matrix rho = plateau_state(manifold, p0, n);
    std::vector<double> row;
    for (const auto& o : observables) row.push_back(expectation(o, rho));
    cycle.push_back(std::move(row));
  }
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, n_periods)));
  for (long n = 0; n < n_periods; ++n) out.push_back(cycle[n % manifold.q]);
  return out;
}

Matrix mm_approx_evolution(const ChannelSpectrum& spectrum, const MetastableManifold& manifold, const Matrix& rho0,
                           long n) {
  Vector acc = Vector::Zero(spectrum.dim() * spectrum.dim());
  for (Index j : manifold.modes) {
    const Complex coeff = spectrum.coefficient(j, rho0) * std::pow(spectrum.eigenvalue(j), static_cast<double>(n));
    acc += coeff * spectrum.right_vectors().col(j);
  }
  return unvec(acc, spectrum.dim());
}

PlateauWindow plateau_window(const MetastableManifold& manifold, double k_fast, double k_slow) {
  const double q = manifold.q;
  double slow = 0.0;
  for (std::size_t j = 0; j < manifold.Gamma.size(); ++j) {
    slow = std::max({slow, manifold.Gamma[j] / q, std::abs(manifold.delta[j]) / q});
  }
  PlateauWindow w;
  w.begin = static_cast<long>(std::ceil(k_fast * q / manifold.Gamma_star));
  w.end = slow > 0.0 ? static_cast<long>(std::floor(k_slow / slow)) : std::numeric_limits<long>::max();
  if (w.end < w.begin) w.end = w.begin;
  return w;
}

DynamicsReport compare_manifold_dynamics(const ResetChannel& channel, const ChannelSpectrum& spectrum,
                                         const MetastableManifold& manifold, const Matrix& rho0, long n_max,
                                         long mm_from, long mixture_from, long mixture_to, long stride,
                                         long keep_from, long keep_to, double tolerance) {
  if (n_max < 0 || stride < 1) throw Error(ErrorKind::InvalidArgument, "compare_manifold_dynamics: bad horizon or stride");
  const double n_spins = channel.params().n_spins;
  const CollectiveOps ops = collective_ops(channel.sector());
  DynamicsReport rep;
  rep.p0 = mm_project(manifold, rho0, tolerance);
  rep.mm_from = mm_from;
  rep.mixture_from = mixture_from;
  rep.mixture_to = mixture_to;

  // The mixture only takes q distinct values.
  std::vector<std::array<double, 2>> mixture;
  for (long k = 0; k < manifold.q; ++k) {
    const Matrix rho = plateau_state(manifold, rep.p0, k);
    mixture.push_back({expectation(ops.jz, rho) / n_spins, expectation(ops.jy, rho) / n_spins});
  }

  Matrix rho = rho0;
  for (long n = 0; n <= n_max; ++n) {
    if (n > 0) rho = channel.step(rho);
    const bool keep = n % stride == 0 || (n >= keep_from && n <= keep_to);
    const bool score_mm = n >= mm_from;
    const bool score_mix = n >= mixture_from && n <= mixture_to;
    if (!keep && !score_mm && !score_mix) continue;

    DynamicsRow row;
    row.n = n;
    row.jz_exact = expectation(ops.jz, rho) / n_spins;
    row.jy_exact = expectation(ops.jy, rho) / n_spins;
    const Matrix mm = mm_approx_evolution(spectrum, manifold, rho0, n);
    row.jz_mm = expectation(ops.jz, mm) / n_spins;
    row.jy_mm = expectation(ops.jy, mm) / n_spins;
    row.jz_mixture = mixture[n % manifold.q][0];
    row.jy_mixture = mixture[n % manifold.q][1];
    if (score_mm) {
      rep.max_dev_mm_jz = std::max(rep.max_dev_mm_jz, std::abs(row.jz_mm - row.jz_exact));
      rep.max_dev_mm_jy = std::max(rep.max_dev_mm_jy, std::abs(row.jy_mm - row.jy_exact));
    }
    if (score_mix) {
      rep.max_dev_mixture_jz = std::max(rep.max_dev_mixture_jz, std::abs(row.jz_mixture - row.jz_exact));
      rep.max_dev_mixture_jy = std::max(rep.max_dev_mixture_jy, std::abs(row.jy_mixture - row.jy_exact));
    }
    if (keep) rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace cspin
