// dynamics.cpp
#include "qclt/dynamics.hpp"

#include "qclt/eig.hpp"
#include "qclt/krylov.hpp"

#include <cmath>

namespace qclt {

FidelityTrace fidelity_trace(const HamiltonianOperator& op,
                             const ProductState& state, const RealVector& times) {
  const StateStatistics stats = energy_stats(op.spec(), state);
  FidelityTrace trace;
  trace.times = times;
  trace.sigma2 = stats.variance;
  trace.fidelity.resize(times.size());
  trace.gaussian_model.resize(times.size());
  for (long i = 0; i < times.size(); ++i)
    trace.gaussian_model[i] = std::exp(-stats.variance * times[i] * times[i]);

  const Vector a = state.full_vector();
  if (op.has_dense()) {
    const EigenSystem& sys = op.eigensystem();
    const RealVector weights = (sys.vectors.adjoint() * a).cwiseAbs2();
    for (long i = 0; i < times.size(); ++i) {
      Complex amp(0, 0);
      for (long e = 0; e < sys.values.size(); ++e)
        amp += weights[e] * std::exp(Complex(0, -sys.values[e] * times[i]));
      trace.fidelity[i] = std::norm(amp);
    }
  } else {
    auto apply = [&op](const Vector& in, Vector& out) { op.apply_add(in, out); };
    for (long i = 0; i < times.size(); ++i) {
      const KrylovResult evolved = expm_apply(apply, a, times[i]);
      trace.fidelity[i] = std::norm(a.dot(evolved.vector));
    }
  }
  return trace;
}

TransitionBound transition_bound(const StateStatistics& stats_a,
                                 const StateStatistics& stats_b,
                                 double ground_energy) {
  const double sa = stats_a.sigma();  // throws on degenerate variance
  const double sb = stats_b.sigma();
  const double total = stats_a.variance + stats_b.variance;
  const double gap = stats_a.mean_energy - stats_b.mean_energy;
  TransitionBound out;
  out.value = (2.0 * sa * sb / total) * std::exp(-gap * gap / (2.0 * total));
  out.regime_ok_a = sa < 0.1 * (stats_a.mean_energy - ground_energy);
  out.regime_ok_b = sb < 0.1 * (stats_b.mean_energy - ground_energy);
  return out;
}

TransitionTrace transition_trace(const HamiltonianOperator& op,
                                 const ProductState& state_a,
                                 const ProductState& state_b,
                                 const RealVector& times) {
  const Complex overlap = state_a.overlap(state_b);
  if (std::abs(overlap) > tol::orthogonality)
    throw HypothesisError("transition_trace: input states are not orthogonal (|<a|b>| = " +
                          std::to_string(std::abs(overlap)) + ")");

  TransitionTrace trace;
  trace.times = times;
  trace.probability.resize(times.size());
  const Vector a = state_a.full_vector();
  const Vector b = state_b.full_vector();
  if (op.has_dense()) {
    const EigenSystem& sys = op.eigensystem();
    const Vector alpha = sys.vectors.adjoint() * a;
    const Vector beta = sys.vectors.adjoint() * b;
    for (long i = 0; i < times.size(); ++i) {
      Complex amp(0, 0);
      for (long e = 0; e < sys.values.size(); ++e)
        amp += std::conj(beta[e]) * alpha[e] *
               std::exp(Complex(0, -sys.values[e] * times[i]));
      trace.probability[i] = std::norm(amp);
    }
  } else {
    auto apply = [&op](const Vector& in, Vector& out) { op.apply_add(in, out); };
    for (long i = 0; i < times.size(); ++i) {
      const KrylovResult evolved = expm_apply(apply, a, times[i]);
      trace.probability[i] = std::norm(b.dot(evolved.vector));
    }
  }
  return trace;
}

}  // namespace qclt
