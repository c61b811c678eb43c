#include "cspin/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "cspin/error.hpp"
#include "cspin/spin_core.hpp"
#include "spectra_internal.hpp"

namespace cspin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kZeroRate = 1e-11;

// Chains of eigenvalues whose moduli agree to this relative precision are
// ordered by frequency instead.
constexpr double kModulusTie = 1e-11;

}  // namespace

namespace detail {

std::vector<Index> sorted_order(const std::vector<Complex>& w) {
  std::vector<Index> order(w.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(w[a]) > std::abs(w[b]); });
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() &&
           std::abs(w[order[end - 1]]) - std::abs(w[order[end]]) <=
               kModulusTie * std::max(1e-300, std::abs(w[order[end - 1]]))) {
      ++end;
    }
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](Index a, Index b) { return std::arg(w[a]) > std::arg(w[b]); });
    start = end;
  }
  return order;
}

}  // namespace detail

namespace {

// Groups of (sorted) indices whose eigenvalues lie within `tol` of each other,
// closed transitively.
std::vector<std::vector<Index>> eigenvalue_clusters(const std::vector<Complex>& w, double tol) {
  const Index n = static_cast<Index>(w.size());
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // w is sorted by modulus, so candidates of a cluster are contiguous in |w|.
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (std::abs(w[a]) - std::abs(w[b]) > tol) break;
      if (std::abs(w[a] - w[b]) < tol) {
        const Index ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<Index>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.push_back(std::move(g));
  }
  return out;
}

void fix_gauge(Eigen::Ref<Vector> r) {
  const double norm = r.norm();
  if (norm == 0.0) throw Error(ErrorKind::MatchingFailed, "zero right eigenvector");
  Index arg = 0;
  r.cwiseAbs().maxCoeff(&arg);
  const Complex z = r(arg);
  r *= std::conj(z) / (std::abs(z) * norm);
}

}  // namespace

namespace detail {

ChannelSpectrum assemble_spectrum(Index dim, int power, const std::vector<Complex>& raw_values,
                                  Matrix rights, Matrix lefts, const DecomposeOptions& options) {
  const std::vector<Index> order = sorted_order(raw_values);
  std::vector<Index> defective;
  std::vector<Complex> w(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) w[i] = raw_values[order[i]];

  if (rights.cols() == 0) {
    return ChannelSpectrum(dim, power, std::move(w), Matrix(), Matrix());
  }
  rights = rights(Eigen::all, order).eval();
  for (Index j = 0; j < rights.cols(); ++j) fix_gauge(rights.col(j));

  // Stationary mode: unit trace rather than unit norm.
  const bool stationary = std::abs(w[0] - Complex(1.0, 0.0)) < 1e-9;
  if (stationary) {
    const Complex tr = unvec(rights.col(0), dim).trace();
    if (std::abs(tr) > 1e-300) rights.col(0) /= tr;
  }
  if (lefts.cols() == 0) {
    return ChannelSpectrum(dim, power, std::move(w), std::move(rights), Matrix());
  }
  lefts = lefts(Eigen::all, order).eval();

  const auto clusters = eigenvalue_clusters(w, options.cluster_tol);
  for (const auto& c : clusters) {
    if (c.size() == 1) {
      const Index j = c.front();
      const Complex s = lefts.col(j).transpose() * rights.col(j);
      if (std::abs(s) < std::numeric_limits<double>::min()) {
        throw Error(ErrorKind::MatchingFailed,
                    "left/right eigenvectors are orthogonal for mode " + std::to_string(j));
      }
      lefts.col(j) /= s;
      continue;
    }
    const Matrix wc = lefts(Eigen::all, c);
    const Matrix vc = rights(Eigen::all, c);
    const Matrix gram = wc.transpose() * vc;
    const Matrix fixed = (pseudo_inverse(gram, options.pinv_cutoff) * wc.transpose()).transpose();
    const Matrix check = fixed.transpose() * vc;
    const double defect = max_abs(check - Matrix::Identity(check.rows(), check.cols()));
    if (defect > 1e-6) {
      if (options.strict) {
        std::ostringstream msg;
        msg << "biorthonormalization failed in a cluster of " << c.size() << " modes near lambda = "
            << w[c.front()] << " (defect " << defect << "); non-diagonalizable map?";
        throw Error(ErrorKind::Degenerate, msg.str());
      }
      for (Index j : c) {
        lefts.col(j).setConstant(Complex(std::nan(""), std::nan("")));
        defective.push_back(j);
      }
      continue;
    }
    lefts(Eigen::all, c) = fixed;
  }

  const bool isolated = w.size() == 1 || std::abs(w[1] - w[0]) >= options.cluster_tol;
  if (stationary && isolated) {
    lefts.col(0) = vec(Matrix::Identity(dim, dim));
  }
  std::sort(defective.begin(), defective.end());
  return ChannelSpectrum(dim, power, std::move(w), std::move(rights), std::move(lefts), std::move(defective));
}

}  // namespace detail

ChannelSpectrum::ChannelSpectrum(Index dim, int power, std::vector<Complex> eigenvalues, Matrix rights,
                                 Matrix left_coeffs, std::vector<Index> defective)
    : dim_(dim),
      power_(power),
      eigenvalues_(std::move(eigenvalues)),
      rights_(std::move(rights)),
      lefts_(std::move(left_coeffs)),
      defective_(std::move(defective)) {}

bool ChannelSpectrum::is_defective(Index j) const {
  return std::binary_search(defective_.begin(), defective_.end(), j);
}

void ChannelSpectrum::require_left(Index j) const {
  if (lefts_.cols() == 0) throw Error(ErrorKind::InvalidArgument, "spectrum was computed without left eigenvectors");
  if (is_defective(j)) {
    throw Error(ErrorKind::Degenerate, "mode " + std::to_string(j) + " lies in a non-diagonalizable cluster");
  }
}

double ChannelSpectrum::rate(Index j) const { return -std::log(std::abs(eigenvalue(j))); }

double ChannelSpectrum::frequency(Index j) const { return std::arg(eigenvalue(j)); }

std::vector<double> ChannelSpectrum::rates() const {
  std::vector<double> out(eigenvalues_.size());
  for (Index j = 0; j < size(); ++j) out[j] = rate(j);
  return out;
}

std::vector<double> ChannelSpectrum::frequencies() const {
  std::vector<double> out(eigenvalues_.size());
  for (Index j = 0; j < size(); ++j) out[j] = frequency(j);
  return out;
}

Matrix ChannelSpectrum::right(Index j) const {
  if (!has_vectors()) throw Error(ErrorKind::InvalidArgument, "spectrum was computed without vectors");
  return unvec(rights_.col(j), dim_);
}

Matrix ChannelSpectrum::left(Index j) const {
  require_left(j);
  // Tr[L rho] = w^T vec(rho) means vec(L^T) = w.
  return unvec(lefts_.col(j), dim_).transpose();
}

Complex ChannelSpectrum::coefficient(Index j, const Matrix& rho) const {
  require_left(j);
  return lefts_.col(j).transpose() * vec(rho);
}

std::optional<Index> ChannelSpectrum::conjugate_partner(Index j, double tol) const {
  const Complex target = std::conj(eigenvalue(j));
  if (std::abs(eigenvalue(j).imag()) <= 1e-12) return std::nullopt;
  std::optional<Index> best;
  double best_dist = tol;
  for (Index k = 0; k < size(); ++k) {
    if (k == j) continue;
    const double dist = std::abs(eigenvalue(k) - target);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

ChannelSpectrum decompose(const Superoperator& superop, const DecomposeOptions& options) {
  const Matrix& s = superop.matrix;
  if (s.rows() != s.cols() || s.rows() != superop.dim * superop.dim) {
    throw Error(ErrorKind::DimensionMismatch, "decompose: superoperator must be dim^2 x dim^2");
  }
  const lapack_int n = static_cast<lapack_int>(s.rows());
  Matrix a = s;
  std::vector<Complex> w(static_cast<std::size_t>(n));
  Matrix vl, vr;
  const char job = options.vectors ? 'V' : 'N';
  if (options.vectors) {
    vl.resize(n, n);
    vr.resize(n, n);
  }
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, job, job, n, a.data(), n, w.data(),
                    options.vectors ? vl.data() : nullptr, n, options.vectors ? vr.data() : nullptr, n);
  if (info != 0) {
    throw Error(ErrorKind::NotConverged, "zgeev failed with info = " + std::to_string(info));
  }
  a.resize(0, 0);
  if (!options.vectors) {
    return detail::assemble_spectrum(superop.dim, superop.power, w, Matrix(), Matrix(), options);
  }
  // u^H S = lambda u^H, so the coefficient column is conj(u).
  vl = vl.conjugate().eval();
  return detail::assemble_spectrum(superop.dim, superop.power, w, std::move(vr), std::move(vl), options);
}

Matrix stationary_state(const ChannelSpectrum& spectrum) {
  if (spectrum.size() == 0 || std::abs(spectrum.eigenvalue(0) - Complex(1.0, 0.0)) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "stationary_state: leading eigenvalue is not 1");
  }
  std::vector<Index> cluster;
  for (Index j = 0; j < spectrum.size(); ++j) {
    if (std::abs(spectrum.eigenvalue(j) - Complex(1.0, 0.0)) <= 1e-9) cluster.push_back(j);
  }
  if (cluster.size() > 1) {
    std::ostringstream msg;
    msg << "stationary_state: degenerate lambda = 1 subspace, modes {";
    for (std::size_t i = 0; i < cluster.size(); ++i) msg << (i ? ", " : "") << cluster[i];
    msg << "}";
    throw Error(ErrorKind::Degenerate, msg.str());
  }
  Matrix r0 = spectrum.right(0);
  r0 /= r0.trace();
  return positivity_repair(r0, 1e-8, true);
}

Matrix stationary_state_direct(const ResetChannel& channel) {
  const Superoperator s = build_superoperator(channel, 1);
  const Index d = s.dim;
  Matrix a = s.matrix - Matrix::Identity(d * d, d * d);
  // Trace-preservation makes the diagonal-element rows linearly dependent;
  // row 0 (element (0,0)) is replaced by the normalization Tr rho = 1.
  a.row(0).setZero();
  for (Index i = 0; i < d; ++i) a(0, i + i * d) = 1.0;
  Vector b = Vector::Zero(d * d);
  b(0) = 1.0;
  const Vector x = a.partialPivLu().solve(b);
  return positivity_repair(unvec(x, d), 1e-8, true);
}

LeadingRates leading_rate_and_gap(const ChannelSpectrum& spectrum) {
  if (spectrum.size() < 4) throw Error(ErrorKind::InvalidArgument, "leading_rate_and_gap needs >= 4 modes");
  LeadingRates out;
  for (Index j = 1; j < spectrum.size(); ++j) {
    if (spectrum.rate(j) > kZeroRate) {
      out.index_1 = j;
      break;
    }
  }
  if (out.index_1 < 0) throw Error(ErrorKind::Degenerate, "all decay rates vanish (unitary channel)");
  out.gamma_1 = spectrum.rate(out.index_1);
  out.nu_1 = spectrum.frequency(out.index_1);
  const auto partner = spectrum.conjugate_partner(out.index_1);
  const double threshold = 1e-10 * std::max(1.0, out.gamma_1);
  for (Index k = out.index_1 + 1; k < spectrum.size(); ++k) {
    if (partner && k == *partner) continue;
    if (std::abs(spectrum.rate(k) - out.gamma_1) > threshold) {
      out.index_star = k;
      break;
    }
  }
  if (out.index_star < 0) {
    out.gamma_star = std::numeric_limits<double>::quiet_NaN();
    out.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.gamma_star = spectrum.rate(out.index_star);
    out.ratio = out.gamma_star / out.gamma_1;
  }
  return out;
}

ManifoldGap manifold_gap(const ChannelSpectrum& spectrum, Index manifold_size) {
  if (manifold_size < 2 || manifold_size >= spectrum.size()) {
    throw Error(ErrorKind::InvalidArgument, "manifold_gap: manifold size out of range");
  }
  ManifoldGap g;
  for (Index j = 1; j < manifold_size; ++j) g.gamma_inside = std::max(g.gamma_inside, spectrum.rate(j));
  g.gamma_star = spectrum.rate(manifold_size);
  g.ratio = g.gamma_star / g.gamma_inside;
  return g;
}

std::optional<OscillatoryMode> dominant_oscillatory_mode(const ChannelSpectrum& spectrum, double imag_tol) {
  for (Index j = 1; j < spectrum.size(); ++j) {
    const Complex l = spectrum.eigenvalue(j);
    if (std::abs(l.imag()) > imag_tol) {
      return OscillatoryMode{j, spectrum.rate(j), std::abs(spectrum.frequency(j))};
    }
  }
  return std::nullopt;
}

double reduce_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

StroboscopicRates stroboscopic_rates(const ChannelSpectrum& spectrum, int p, int q) {
  if (q < 1 || q % spectrum.power() != 0) {
    throw Error(ErrorKind::InvalidArgument, "stroboscopic_rates: q must be a multiple of the spectrum power");
  }
  const double factor = static_cast<double>(q / spectrum.power());
  StroboscopicRates out;
  out.p = p;
  out.q = q;
  out.Gamma.resize(static_cast<std::size_t>(spectrum.size()));
  out.delta.resize(static_cast<std::size_t>(spectrum.size()));
  for (Index j = 0; j < spectrum.size(); ++j) {
    out.Gamma[j] = factor * spectrum.rate(j);
    out.delta[j] = reduce_angle(factor * spectrum.frequency(j) - kTwoPi * p);
  }
  return out;
}

Matrix evolve_spectral(const ChannelSpectrum& spectrum, const Matrix& rho0, long n, Index modes) {
  const Index count = modes < 0 ? spectrum.size() : std::min(modes, spectrum.size());
  Vector acc = Vector::Zero(spectrum.dim() * spectrum.dim());
  for (Index j = 0; j < count; ++j) {
    const Complex c = spectrum.coefficient(j, rho0);
    acc += (c * std::pow(spectrum.eigenvalue(j), static_cast<double>(n))) * spectrum.right_vectors().col(j);
  }
  return unvec(acc, spectrum.dim());
}

}  // namespace cspin
