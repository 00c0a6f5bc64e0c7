// krylov.cpp
#include "qclt/krylov.hpp"

#include "qclt/rng.hpp"

#include <cmath>

namespace qclt {

KrylovResult expm_apply(const ApplyFn& apply, const Vector& v, double tau,
                        double tolerance, int max_dim) {
  const long dim = v.size();
  const double vnorm = v.norm();
  if (!(vnorm > 0.0)) throw std::invalid_argument("expm_apply: zero vector");
  max_dim = static_cast<int>(std::min<long>(max_dim, dim));

  Matrix basis(dim, max_dim);
  basis.col(0) = v / vnorm;
  RealVector alpha(max_dim), beta(max_dim);  // beta[j] couples j and j+1

  Vector w(dim);
  for (int j = 0; j < max_dim; ++j) {
    w.setZero();
    apply(basis.col(j), w);
    alpha[j] = std::real(basis.col(j).dot(w));
    w -= alpha[j] * basis.col(j);
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    // full reorthogonalization (cheap at these subspace sizes)
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
    const double b = w.norm();
    beta[j] = b;

    const int k = j + 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(alpha.head(k), beta.head(k - 1 > 0 ? k - 1 : 0));
    if (es.info() != Eigen::Success)
      throw NumericError("expm_apply: tridiagonal eigensolve failed");
    const Matrix Q = es.eigenvectors().cast<Complex>();
    const RealVector& lam = es.eigenvalues();
    Vector phase(k);
    for (int i = 0; i < k; ++i) phase[i] = std::exp(Complex(0, -tau * lam[i]));
    // y = Q exp(-i tau Lambda) Q^T e1, scaled back to ||v||
    const Vector e1_coef = Q.row(0).transpose();
    const Vector y = Q * phase.cwiseProduct(e1_coef) * vnorm;

    const double residual = b * std::abs(y[k - 1]) / vnorm;
    const bool breakdown = b <= 1e-14 * std::max(1.0, std::abs(alpha[j]));
    if (residual <= tolerance || breakdown || k == dim) {
      KrylovResult out;
      out.vector = basis.leftCols(k) * y;
      out.dim = k;
      out.residual = breakdown ? 0.0 : residual;
      return out;
    }
    if (j + 1 < max_dim) basis.col(j + 1) = w / b;
  }
  throw NumericError("expm_apply: Krylov subspace limit reached without convergence");
}

namespace {

double power_norm(const ApplyFn& apply, long dim, double rel_tol, int max_iter,
                  std::uint64_t seed) {
  NormalSampler normal(seed);
  Vector v(dim);
  for (long i = 0; i < dim; ++i) v[i] = Complex(normal(), normal());
  v.normalize();
  double lambda = 0.0;
  int stable = 0;
  Vector w(dim);
  for (int it = 0; it < max_iter; ++it) {
    w.setZero();
    apply(v, w);
    const double next = w.norm();
    if (next == 0.0) return 0.0;  // operator annihilates the vector family
    if (std::abs(next - lambda) <= rel_tol * std::max(1.0, next)) {
      if (++stable >= 3) return next;
    } else {
      stable = 0;
    }
    lambda = next;
    v = w / next;
  }
  throw NumericError("power iteration did not converge");
}

}  // namespace

double power_iteration_norm(const ApplyFn& apply, long dim, double rel_tol,
                            int max_iter) {
  return power_norm(apply, dim, rel_tol, max_iter, 0x71636c74706f77ULL);
}

SpectralBounds estimate_spectral_bounds(const ApplyFn& apply, long dim,
                                        double margin) {
  // Rough magnitude first; the two shifted runs then see single-signed
  // spectra whose dominant eigenvalue is the wanted edge.
  const double m0 =
      power_norm(apply, dim, 1e-4, 5000, 0x71636c74703041ULL) * 1.001 + 1e-30;
  auto shifted_up = [&](const Vector& in, Vector& out) {
    apply(in, out);
    out += m0 * in;
  };
  auto shifted_down = [&](const Vector& in, Vector& out) {
    Vector tmp = Vector::Zero(in.size());
    apply(in, tmp);
    out += m0 * in - tmp;
  };
  const double hi = power_norm(shifted_up, dim, 1e-7, 20000, 0x71636c74703042ULL) - m0;
  const double lo = m0 - power_norm(shifted_down, dim, 1e-7, 20000, 0x71636c74703043ULL);
  const double center = (hi + lo) / 2.0;
  const double half = (hi - lo) / 2.0;
  if (!(half > 1e-12 * std::max(1.0, std::abs(center))))
    throw NumericError("spectral bound estimation failed: spectrum has no spread");
  SpectralBounds out;
  out.lo = center - half * (1.0 + margin);
  out.hi = center + half * (1.0 + margin);
  return out;
}

}  // namespace qclt
