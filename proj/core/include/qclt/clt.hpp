// clt.hpp — block decomposition, factorization checks, Lyapunov condition,
// Gaussian comparison and the convergence sweep
#pragma once

#include "qclt/common.hpp"
#include "qclt/model.hpp"
#include "qclt/spectrum.hpp"
#include "qclt/state.hpp"

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace qclt {

// floor(n^{3/4}), clamped to [2, n].
int default_k(int n);

// Alternating partition of an open chain into big blocks of length k-1 and
// singleton separator sites at k-1, 2k-1, ... (0-based), plus a remainder
// block of length q = n - k*floor(n/k) holding the trailing sites.  The sum
// of centered terms over a big block is xi_j; the separators keep distinct
// xi supports disjoint, so the xi commute and their product-state
// expectations factorize.  An empty remainder (q = 0) is skipped.
class BlockDecomposition {
 public:
  BlockDecomposition(ModelSpec spec, ProductState state, int k);

  int n() const { return spec_.n; }
  int k() const { return k_; }
  int q() const { return q_; }
  const std::vector<std::vector<int>>& big_blocks() const { return big_; }
  const std::vector<int>& small_blocks() const { return small_; }
  const ModelSpec& spec() const { return spec_; }
  const ProductState& state() const { return state_; }
  const StateStatistics& stats() const { return stats_; }

  // <a| xi_j^p |a>, p in 1..4, energy units, contracted on the block's local
  // tensor factors only (cost grows with block length, not with n).
  double block_moment(int j, int p) const;

  // <a| exp(-i r xi_j / sigma) |a> on the block's local factors.
  Complex block_char_value(int j, double r) const;

  // Accumulates xi_j * in into out on the full space.
  void apply_block_add(int j, const Vector& in, Vector& out) const;

  // Z' (big blocks) and Z'' (separators): (sum of centered terms)/sigma on
  // the full space.  Dense forms require total_dim within the dense
  // threshold.
  Matrix zprime_dense() const;
  Matrix zsecond_dense() const;
  // Exact spectral measure of Z' with respect to the product state.
  const SpectralMeasure& zprime_measure() const;

  // Centered-term building blocks <a|H_mu|a> used by the checks.
  const std::vector<LocalTerm>& terms() const { return terms_; }
  const std::vector<double>& term_means() const { return centers_; }

 private:
  struct BlockLocal;  // per-block window data, built lazily

  const BlockLocal& block_local(int j) const;

  ModelSpec spec_;
  ProductState state_;
  int k_ = 0;
  int q_ = 0;
  std::vector<std::vector<int>> big_;
  std::vector<int> small_;
  StateStatistics stats_;
  std::vector<LocalTerm> terms_;
  std::vector<SiteWindow> windows_;  // full-space window per term
  std::vector<double> centers_;
  mutable std::mutex cache_mutex_;
  mutable std::vector<std::shared_ptr<const BlockLocal>> block_cache_;
  mutable std::shared_ptr<const SpectralMeasure> zprime_cache_;
};

BlockDecomposition block_decompose(const ModelSpec& spec,
                                   const ProductState& state, int k);

// |r| * sqrt( (1/n) * floor(n/k)^2 * (2*Cp)^2 / C ): the error committed by
// dropping the separator sum Z'' from Z.
double truncation_error_bound(int n, int k, double C, double Cp, double r);

struct FactorizationReport {
  // max over big-block pairs i != j of
  // |<a|xi_i^p xi_j^q|a> - <a|xi_i^p|a><a|xi_j^q|a>|
  double max_residual = 0.0;
  // max over pairs of ||[xi_i, xi_j] |a>||
  double max_commutator_action = 0.0;
};

// Full-space cross moments against block-local factored products; requires
// the dense-feasible regime (total_dim within the dense threshold).
FactorizationReport check_factorization(const BlockDecomposition& blocks,
                                        int p, int q);

// max over the r grid of |<a|e^{-i r Z'}|a> - prod_j <a|e^{-i r xi_j/sigma}|a>|.
double char_fn_factorization_check(const BlockDecomposition& blocks,
                                   const RealVector& r_grid);

struct LyapunovResult {
  double sum = 0.0;    // sigma^{-4} sum_j <a|xi_j^4|a>
  double bound = 0.0;  // (floor(n/k)+1)((k-1)^2 + 630(k-1))(2C')^4 / (n^2 C^2)
};

// Fourth-moment Lyapunov sum at order m = 2 (the only implemented order).
// Block fourth moments are evaluated by enumerating only the index quadruples
// whose supports form one connected cluster, plus the pair-of-pairs closed
// form for two disjoint covariance pairs — O(k^2) instead of (k-1)^4 terms.
LyapunovResult lyapunov_sum(const BlockDecomposition& blocks, int m = 2);

// Standard normal CDF via erf.
double standard_normal_cdf(double z);

// r in [-4, 4], step 0.1 — the grid used by sweeps for char-fn deviation.
RealVector default_charfn_grid();

struct GaussianReport {
  int n = 0;
  double ks_distance = 0.0;             // sup_z |F_n(z) - Phi(z)|
  std::array<double, 4> moments{};      // standardized m1..m4
  std::array<double, 4> moment_devs{};  // |m1|, |m2-1|, |m3|, |m4-3|
  double charfn_dev = 0.0;              // sup_r |phi(r) - e^{-r^2/2}|
  std::optional<double> l1_density_dev;  // smoothed density vs Gaussian (kpm)
};

// Distance of a standardized measure from the standard normal.  For exact
// measures the KS statistic is evaluated at every jump point from both sides;
// for smoothed densities it is taken over the grid.  Rejects measures whose
// mean/variance are not (0, 1) within tolerance (1e-6 exact, 5e-2 kpm).
GaussianReport gaussian_comparison(const SpectralMeasure& measure,
                                   const std::vector<CharFnSample>& charfn,
                                   int n = 0);

struct SweepRow {
  int n = 0, k = 0, q = 0;
  double sigma2 = 0.0, cprime = 0.0, ks = 0.0;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  double charfn_dev = 0.0;
  double lyapunov_sum = 0.0, lyapunov_bound = 0.0;
  double trunc_bound_r1 = 0.0;
  std::string method;  // "exact" or "kpm" (recorded in metadata, not the CSV)
};

using ModelFactory = std::function<ModelSpec(int)>;
using StateFactory = std::function<ProductState(const ModelSpec&)>;

// One row per n: blocking, Lyapunov sum/bound, truncation bound at r=1 and
// the Gaussian comparison of the standardized measure.  Rows over the dense
// threshold fall back to the KPM density and Krylov characteristic function.
// Rows are independent; at most max_threads are computed concurrently.
std::vector<SweepRow> convergence_sweep(const ModelFactory& model_for,
                                        const StateFactory& state_for,
                                        const std::vector<int>& n_list,
                                        long dense_threshold = default_dense_threshold,
                                        int kpm_moments = 2048,
                                        int max_threads = 1);

}  // namespace qclt
