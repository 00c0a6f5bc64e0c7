// model.hpp — nearest-neighbour chain Hamiltonians: spec, assembly, checks
#pragma once

#include "qclt/common.hpp"
#include "qclt/window.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace qclt {

enum class Boundary { open, periodic };

// H = sum_mu (H_mu + I_{mu,mu+1}) with H_mu on site mu and I on bond
// (mu, mu+1).  Open chains carry n-1 bond terms, periodic chains n with the
// last acting on sites (n-1, 0).
struct ModelSpec {
  int n = 0;
  std::vector<int> local_dims;
  std::vector<Matrix> site_terms;  // n entries, local_dims[mu] square
  std::vector<Matrix> bond_terms;  // n-1 (open) or n (periodic) entries
  Boundary boundary = Boundary::open;

  int bond_count() const { return static_cast<int>(bond_terms.size()); }
  long total_dim() const { return checked_total_dim(local_dims); }
  // Throws invalid_argument when shapes, counts or Hermiticity (1e-12) fail.
  void validate() const;
};

// One term of the sum: site operator mu plus its right bond, with the global
// sites it touches.  The window matrix basis is |site mu> (x) |site mu+1>.
struct LocalTerm {
  std::vector<int> sites;  // {mu} or {mu, (mu+1) mod n}
  Matrix op;               // acting on the listed sites in order
};

// The padded term H_mu + I_{mu,mu+1} for every mu, as window operators.
std::vector<LocalTerm> local_terms(const ModelSpec& spec);

struct EigenSystem;

class HamiltonianOperator {
 public:
  HamiltonianOperator(ModelSpec spec, long dense_threshold = default_dense_threshold);

  const ModelSpec& spec() const { return spec_; }
  long total_dim() const { return total_dim_; }
  bool has_dense() const { return dense_.has_value(); }
  const Matrix& dense() const;

  // y = H x, matrix-free (window applies term by term).
  Vector apply(const Vector& x) const;
  void apply_add(const Vector& x, Vector& y, Complex scale = Complex(1, 0)) const;

  // Dense eigendecomposition, computed on first use and cached; requires the
  // dense path.  Thread-safe.
  const EigenSystem& eigensystem() const;

 private:
  struct EigCache;

  ModelSpec spec_;
  long total_dim_ = 0;
  std::vector<LocalTerm> terms_;
  std::vector<SiteWindow> windows_;
  std::optional<Matrix> dense_;
  std::shared_ptr<EigCache> eig_cache_;
};

ModelSpec build_ising(int n, double B, double J, Boundary boundary);

// Truncated-Fock harmonic chain: site term omega (N + 1/2) — the projected
// single-oscillator Hamiltonian p^2/2m + (m/2) omega^2 q^2 — and bond term
// -m omega^2 q (x) q from expanding (m/2) omega^2 (q_{i+1} - q_i)^2; the
// expansion's q^2 pieces are absorbed into the site terms.  Results depend on
// d_trunc: the oscillator is unbounded and the truncation is an approximation
// whose convergence should be swept by the caller.
ModelSpec build_harmonic(int n, double mass, double omega, int d_trunc,
                         Boundary boundary);

HamiltonianOperator assemble(const ModelSpec& spec,
                             long dense_threshold = default_dense_threshold);

// Operator norm (largest |eigenvalue|) of H_mu + I_{mu,mu+1} on its two-site
// support; max over mu is the coupling-strength constant C'.
double local_norm_bound(const ModelSpec& spec, int mu);
double max_local_norm_bound(const ModelSpec& spec);

struct LocalityReport {
  double max_far_commutator = 0.0;   // over pairs at chain distance > 1
  double max_near_commutator = 0.0;  // over adjacent/equal pairs, for contrast
  int far_pairs_checked = 0;
  bool ok(double tolerance = tol::locality) const {
    return max_far_commutator < tolerance;
  }
};

// Frobenius commutator norms ||[term_mu, term_nu]|| over all pairs; distance
// is measured on the ring for periodic chains.
LocalityReport check_locality(const ModelSpec& spec);

}  // namespace qclt
