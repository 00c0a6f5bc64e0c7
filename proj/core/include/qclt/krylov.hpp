// krylov.hpp — Lanczos approximation of exp(-i tau H)|v> for Hermitian H
#pragma once

#include "qclt/common.hpp"

#include <functional>

namespace qclt {

// Accumulates H*in into out; callers pass out zero-initialized.
using ApplyFn = std::function<void(const Vector& in, Vector& out)>;

struct KrylovResult {
  Vector vector;   // approx exp(-i tau H) v
  int dim = 0;     // subspace dimension used
  double residual = 0.0;
};

// Lanczos with full reorthogonalization.  Builds the Krylov basis of (H, v),
// evaluates exp(-i tau T_k) on the tridiagonal projection and monitors the
// standard residual estimate beta_{k+1} |[exp(-i tau T_k)]_{k,1}|.  Throws
// NumericError when the residual tolerance is not met by max_dim.
KrylovResult expm_apply(const ApplyFn& apply, const Vector& v, double tau,
                        double tolerance = tol::krylov_residual,
                        int max_dim = default_krylov_max_dim);

// Largest-magnitude eigenvalue estimate by power iteration (matrix-free),
// within rel_tol or max_iter sweeps; throws NumericError on stagnation.
double power_iteration_norm(const ApplyFn& apply, long dim,
                            double rel_tol = 1e-10, int max_iter = 5000);

// Spectral interval [lo, hi] of H from power iterations on H and on a
// spectrum shift, widened by the safety margin (fraction of the halfwidth).
struct SpectralBounds {
  double lo = 0.0;
  double hi = 0.0;
};
SpectralBounds estimate_spectral_bounds(const ApplyFn& apply, long dim,
                                        double margin = 0.01);

}  // namespace qclt
