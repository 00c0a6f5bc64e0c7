// spectrum.hpp — the spectral measure a product state induces on the energy
// spectrum, and its characteristic function
#pragma once

#include "qclt/common.hpp"
#include "qclt/model.hpp"
#include "qclt/state.hpp"

#include <string>

namespace qclt {

enum class MeasureKind { exact, kpm };

// Probability measure w_phi = |<a|phi>|^2 on the spectrum, either atom by
// atom (exact diagonalization) or as a kernel-smoothed density on a grid.
struct SpectralMeasure {
  MeasureKind kind = MeasureKind::exact;

  // exact: atoms, ascending in value
  RealVector values;
  RealVector weights;

  // kpm: density on a strictly increasing energy grid
  RealVector grid;
  RealVector density;
  int moment_count = 0;
  std::string kernel = "jackson";

  // accumulated affine map original energy -> current coordinate:
  // z = (E - shift) / scale
  double shift = 0.0;
  double scale = 1.0;
  bool standardized = false;

  double total_weight() const;  // atom sum / grid-trapezoid integral
  double mean() const;
  double variance() const;
};

// Full eigensolve; degenerate eigenvalues keep separate atoms.  Requires the
// dense path and errors otherwise, pointing at the KPM alternative.
SpectralMeasure spectral_measure_exact(const HamiltonianOperator& op,
                                       const ProductState& state);

// Chebyshev-moment density estimate with Jackson damping.  Spectral bounds
// come from power iteration with a 1% safety margin.  An empty grid selects
// Chebyshev nodes (4096 points) on the estimated spectral interval.
// M must be >= 16; moments use the two-vector recurrence with the doubling
// identities, costing M/2 operator applications.
SpectralMeasure spectral_density_kpm(const HamiltonianOperator& op,
                                     const ProductState& state, int M,
                                     const RealVector& grid = RealVector());

// Affine rescale by (mean_energy, sigma) so the measure describes Z_n.
// Composes with previous maps; standardizing an already standardized measure
// with its own (0,1) moments is the identity.
SpectralMeasure standardize(const SpectralMeasure& measure,
                            const StateStatistics& stats);

// Right-continuous CDF: atoms weigh in at their exact position (ties
// atomically); the kpm path integrates the density up to z.
double cdf(const SpectralMeasure& measure, double z);

struct CharFnSample {
  double r = 0.0;
  Complex value;
};

// <a| exp(-i r Z_n) |a>, by eigendecomposition (dense path) or by a Lanczos
// matrix-exponential action, phase-corrected by exp(+i r E-bar / sigma).
CharFnSample char_fn(const HamiltonianOperator& op, const ProductState& state,
                     const StateStatistics& stats, double r);
CharFnSample char_fn_exact(const HamiltonianOperator& op, const ProductState& state,
                           const StateStatistics& stats, double r);
CharFnSample char_fn_krylov(const HamiltonianOperator& op, const ProductState& state,
                            const StateStatistics& stats, double r,
                            int max_dim = default_krylov_max_dim);

// Evaluate on a standardized measure (cheap once the measure exists).
Complex char_fn_from_measure(const SpectralMeasure& standardized_measure, double r);

}  // namespace qclt
