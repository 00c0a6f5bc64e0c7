// dynamics.hpp — fidelity decay and product-state transition probabilities
#pragma once

#include "qclt/common.hpp"
#include "qclt/model.hpp"
#include "qclt/state.hpp"

namespace qclt {

struct FidelityTrace {
  RealVector times;
  RealVector fidelity;        // |<a|e^{-iHt}|a>|^2
  RealVector gaussian_model;  // e^{-sigma^2 t^2}, the large-n limit law
  double sigma2 = 0.0;
};

// Survival probability of the product state under the chain's evolution,
// via the dense eigendecomposition when available and Krylov evolution
// otherwise.  The attached Gaussian is a limit law: agreement at finite n is
// approximate and tightens as n grows.
FidelityTrace fidelity_trace(const HamiltonianOperator& op,
                             const ProductState& state, const RealVector& times);

struct TransitionBound {
  double value = 0.0;
  // sigma < 0.1 * (mean energy - ground energy), per state
  bool regime_ok_a = false;
  bool regime_ok_b = false;
  bool regime_ok() const { return regime_ok_a && regime_ok_b; }
};

// (2 sigma_a sigma_b / (sigma_a^2 + sigma_b^2))
//   * exp(-(Ebar_a - Ebar_b)^2 / (2 (sigma_a^2 + sigma_b^2))).
// The derivation assumes both states are narrow relative to their energy
// above the ground state; the formula is evaluated regardless and the regime
// flags report whether that assumption holds (energies re-referenced to
// ground_energy).
TransitionBound transition_bound(const StateStatistics& stats_a,
                                 const StateStatistics& stats_b,
                                 double ground_energy = 0.0);

struct TransitionTrace {
  RealVector times;
  RealVector probability;  // |<b|e^{-iHt}|a>|^2
};

// Transition probability between orthogonal product states (overlap must
// vanish within 1e-10).
TransitionTrace transition_trace(const HamiltonianOperator& op,
                                 const ProductState& state_a,
                                 const ProductState& state_b,
                                 const RealVector& times);

}  // namespace qclt
