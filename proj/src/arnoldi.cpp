#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>

#include <arpack/arpack.hpp>

#include "cspin/error.hpp"
#include "cspin/spectra.hpp"
#include "spectra_internal.hpp"

namespace cspin {

namespace {

using Op = std::function<void(const Complex*, Complex*)>;

struct RitzResult {
  std::vector<Complex> values;
  Matrix vectors;
};

// k eigenpairs of largest modulus of a linear operator on C^n (znaupd/zneupd).
RitzResult arpack_largest(a_int n, int k, const Op& op, const ArnoldiOptions& options) {
  // znaupd keeps state in SAVE variables between reverse-communication calls.
  static std::mutex arpack_mutex;
  const std::lock_guard<std::mutex> lock(arpack_mutex);
  const a_int nev = k;
  a_int ncv = options.krylov_dim > 0 ? options.krylov_dim : std::max<a_int>(2 * nev + 20, 40);
  ncv = std::min<a_int>(ncv, n);
  if (nev < 1 || nev > n - 2 || ncv < nev + 2) {
    throw Error(ErrorKind::InvalidArgument, "matrix-free eigensolver: need 1 <= k <= n-2 and ncv >= k+2 (n = " +
                                                std::to_string(n) + ", k = " + std::to_string(k) + ")");
  }

  // Fixed start vector so repeated runs are bitwise identical.
  std::vector<Complex> resid(static_cast<std::size_t>(n));
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& r : resid) r = Complex(dist(rng), dist(rng));

  std::vector<Complex> v(static_cast<std::size_t>(n * ncv));
  std::vector<Complex> workd(static_cast<std::size_t>(3 * n));
  const a_int lworkl = 3 * ncv * ncv + 5 * ncv;
  std::vector<Complex> workl(static_cast<std::size_t>(lworkl));
  std::vector<double> rwork(static_cast<std::size_t>(ncv));
  a_int iparam[11] = {};
  a_int ipntr[14] = {};
  iparam[0] = 1;
  iparam[2] = options.max_restarts;
  iparam[6] = 1;
  a_int ido = 0;
  a_int info = 1;

  while (true) {
    arpack::naupd(ido, arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, options.tol,
                  resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl,
                  rwork.data(), info);
    if (ido == -1 || ido == 1) {
      op(workd.data() + ipntr[0] - 1, workd.data() + ipntr[1] - 1);
      continue;
    }
    break;
  }
  if (info == 1) {
    std::ostringstream msg;
    msg << "Arnoldi iteration hit the restart limit (" << options.max_restarts << "); "
        << iparam[4] << " of " << nev << " Ritz values converged";
    throw Error(ErrorKind::NotConverged, msg.str());
  }
  if (info < 0) throw Error(ErrorKind::NotConverged, "znaupd failed with info = " + std::to_string(info));

  std::vector<a_int> select(static_cast<std::size_t>(ncv));
  std::vector<Complex> d(static_cast<std::size_t>(nev + 1));
  Matrix z(n, nev);
  std::vector<Complex> workev(static_cast<std::size_t>(2 * ncv));
  arpack::neupd(1, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, Complex(0.0, 0.0),
                workev.data(), arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, options.tol,
                resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl,
                rwork.data(), info);
  if (info != 0) throw Error(ErrorKind::NotConverged, "zneupd failed with info = " + std::to_string(info));
  if (iparam[4] < nev) {
    throw Error(ErrorKind::NotConverged, std::to_string(iparam[4]) + " of " + std::to_string(nev) +
                                             " Ritz values converged");
  }

  RitzResult out;
  out.values.assign(d.begin(), d.begin() + nev);
  out.vectors = std::move(z);

  // Residual report.
  double worst = 0.0;
  Vector y(n);
  for (a_int j = 0; j < nev; ++j) {
    op(out.vectors.col(j).data(), y.data());
    const double res = (y - out.values[j] * out.vectors.col(j)).norm() / out.vectors.col(j).norm();
    worst = std::max(worst, res);
  }
  if (worst > 1e-6) {
    std::ostringstream msg;
    msg << "Ritz residual " << worst << " exceeds 1e-6";
    throw Error(ErrorKind::NotConverged, msg.str());
  }
  return out;
}

}  // namespace

ChannelSpectrum leading_eigs_matrix_free(const ResetChannel& channel, int q, int k, const ArnoldiOptions& options) {
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
  const Index d = channel.dim();
  const a_int n = static_cast<a_int>(d * d);
  if (k < 1 || k > n - 2) {
    throw Error(ErrorKind::InvalidArgument, "matrix-free eigensolver: need 1 <= k <= dim^2 - 2");
  }
  // A few extra Ritz pairs keep a conjugate pair or cluster at the cut from
  // being split differently in the two problems.
  const int k_right = std::min<int>(k + 2, static_cast<int>(n) - 2);
  const int k_left = std::min<int>(k + 4, static_cast<int>(n) - 2);

  const Op forward = [&](const Complex* x, Complex* y) {
    Matrix rho = Eigen::Map<const Matrix>(x, d, d);
    for (int s = 0; s < q; ++s) rho = channel.step(rho);
    Eigen::Map<Matrix>(y, d, d) = rho;
  };
  const RitzResult right = arpack_largest(n, k_right, forward, options);
  std::vector<Index> keep = detail::sorted_order(right.values);
  keep.resize(static_cast<std::size_t>(k));
  std::vector<Complex> values(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) values[j] = right.values[keep[j]];
  Matrix rights = right.vectors(Eigen::all, keep);

  DecomposeOptions assemble_opts;
  if (!options.lefts) {
    return detail::assemble_spectrum(d, q, values, std::move(rights), Matrix(), assemble_opts);
  }

  const Op adjoint = [&](const Complex* x, Complex* y) {
    Matrix a = Eigen::Map<const Matrix>(x, d, d);
    for (int s = 0; s < q; ++s) a = channel.step_adjoint(a);
    Eigen::Map<Matrix>(y, d, d) = a;
  };
  const RitzResult left = arpack_largest(n, k_left, adjoint, options);

  // Adjoint eigenvalues are conj(lambda); coefficient columns are conj of vec(X).
  Matrix lefts(n, k);
  std::vector<bool> used(left.values.size(), false);
  for (int j = 0; j < k; ++j) {
    int best = -1;
    double best_dist = options.match_tol;
    for (int i = 0; i < k_left; ++i) {
      if (used[i]) continue;
      const double dd = std::abs(std::conj(left.values[i]) - values[j]);
      if (dd < best_dist) {
        best = i;
        best_dist = dd;
      }
    }
    if (best < 0) {
      std::ostringstream msg;
      msg << "no adjoint eigenvalue within " << options.match_tol << " of lambda = " << values[j];
      throw Error(ErrorKind::MatchingFailed, msg.str());
    }
    used[best] = true;
    lefts.col(j) = left.vectors.col(best).conjugate();
  }
  return detail::assemble_spectrum(d, q, values, std::move(rights), std::move(lefts), assemble_opts);
}

}  // namespace cspin
