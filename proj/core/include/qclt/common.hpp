// common.hpp — shared scalar types, tolerances and error taxonomy
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace qclt {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Central numeric tolerances.  Tests and the CLI read them from here so the
// numbers live in exactly one place.
namespace tol {
inline constexpr double hermiticity = 1e-12;      // max |M - M^dagger| entrywise
inline constexpr double dense_vs_apply = 1e-12;   // relative, dense vs matrix-free
inline constexpr double locality = 1e-12;         // far-pair commutator norm
inline constexpr double factorization = 1e-10;    // block moment factorization
inline constexpr double charfn_factorization = 1e-8;
inline constexpr double stats_cross_check = 1e-8; // global vs local moment route
inline constexpr double weight_sum = 1e-10;       // exact measure normalization
inline constexpr double kpm_integral = 1e-6;      // density grid integral
inline constexpr double measure_moments_exact = 1e-8;
inline constexpr double measure_moments_kpm = 1e-3;
inline constexpr double variance_clamp = 1e-10;   // sigma^2 treated as 0 below this
inline constexpr double krylov_residual = 1e-10;
inline constexpr double dual_path_charfn = 1e-8;  // exact vs Krylov
inline constexpr double orthogonality = 1e-10;    // transition-pair overlap
inline constexpr double bound_slack = 1e-12;      // arithmetic noise allowed when
                                                  // comparing a measurement to an
                                                  // analytic bound (e.g. both 0)
}  // namespace tol

// Dimension above which the assembled Hamiltonian is no longer materialized
// as a dense matrix (2^12; configurable per call).
inline constexpr long default_dense_threshold = 4096;

// Krylov subspace cap for matrix exponential actions.
inline constexpr int default_krylov_max_dim = 128;

// ---- error taxonomy ------------------------------------------------------
// invalid_argument        -> malformed input / usage (CLI exit 1)
// HypothesisError         -> a physical precondition of the theory fails (exit 2)
// NumericError            -> a solver failed to converge / internal check (exit 3)

struct QcltError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HypothesisError : QcltError {
  using QcltError::QcltError;
};

// Z_n is undefined when sigma_a^2 = 0.
struct DegenerateVarianceError : HypothesisError {
  DegenerateVarianceError() : HypothesisError("degenerate variance: sigma^2 = 0") {}
  explicit DegenerateVarianceError(const std::string& what) : HypothesisError(what) {}
};

struct NumericError : QcltError {
  using QcltError::QcltError;
};

}  // namespace qclt
