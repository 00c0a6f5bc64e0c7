// state.hpp — product states and energy moment statistics
#pragma once

#include "qclt/common.hpp"
#include "qclt/model.hpp"

#include <cstdint>
#include <vector>

namespace qclt {

// |a> = (x)_mu |a_mu>, each local vector unit-normalized.
struct ProductState {
  std::vector<Vector> locals;

  int n() const { return static_cast<int>(locals.size()); }
  // Full tensor-product vector (small systems).
  Vector full_vector() const { return kron_vector(locals); }
  // <a|b> = prod of local overlaps.
  Complex overlap(const ProductState& other) const;
};

// Normalizes each local vector; rejects zero vectors.
ProductState product_state(std::vector<Vector> locals);

// Haar-uniform local vectors (complex Gaussian components, normalized),
// reproducible from the seed.
ProductState random_product_state(const ModelSpec& spec, std::uint64_t seed);

// Convenience basis states matching the model file "builder" names.
ProductState all_up_state(const ModelSpec& spec);    // first basis vector per site
ProductState all_plus_state(const ModelSpec& spec);  // uniform superposition per site

struct StateStatistics {
  int n = 0;                       // number of sites
  double mean_energy = 0.0;        // E-bar_a
  double variance = 0.0;           // sigma_a^2, clamped to 0 within 1e-10
  std::vector<double> per_bond_variance;  // boundary-weighted terms, sums to variance
  double cprime = 0.0;             // max local norm bound C'
  double c_estimate = 0.0;         // sigma_a^2 / n, the empirical C
  double sigma() const;            // sqrt(variance); throws when degenerate
  bool degenerate() const { return variance <= 0.0; }
};

// Computes E-bar and sigma^2 on two independent routes — full-space apply and
// O(n) local contractions over one/two/three-site windows — and cross-checks
// them to 1e-8 relative.  per_bond_variance assigns each site's X^2 term to
// its adjacent bond(s): half to each for interior sites, fully to the single
// bond at an open end (single entry <X^2> when the chain has no bonds).
StateStatistics energy_stats(const ModelSpec& spec, const ProductState& state);

struct VarianceCondition {
  bool ok = false;
  double margin = 0.0;  // variance - n*C
};

// sigma_a^2 >= n*C check; C must be positive.
VarianceCondition check_variance_condition(const StateStatistics& stats, double C);

}  // namespace qclt
