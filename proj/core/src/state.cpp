// state.cpp
#include "qclt/state.hpp"

#include "qclt/rng.hpp"

#include <algorithm>
#include <cmath>

namespace qclt {

Complex ProductState::overlap(const ProductState& other) const {
  if (other.n() != n()) throw std::invalid_argument("overlap: site count mismatch");
  Complex result(1, 0);
  for (int mu = 0; mu < n(); ++mu) {
    if (locals[mu].size() != other.locals[mu].size())
      throw std::invalid_argument("overlap: local dimension mismatch");
    result *= locals[mu].dot(other.locals[mu]);
  }
  return result;
}

ProductState product_state(std::vector<Vector> locals) {
  if (locals.empty()) throw std::invalid_argument("product_state: no local vectors");
  for (auto& x : locals) {
    const double norm = x.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("product_state: zero local vector");
    x /= norm;
  }
  return ProductState{std::move(locals)};
}

ProductState random_product_state(const ModelSpec& spec, std::uint64_t seed) {
  NormalSampler normal(seed);
  std::vector<Vector> locals;
  locals.reserve(spec.n);
  for (int mu = 0; mu < spec.n; ++mu) {
    Vector x(spec.local_dims[mu]);
    for (int i = 0; i < spec.local_dims[mu]; ++i) {
      const double re = normal();
      const double im = normal();
      x[i] = Complex(re, im);
    }
    locals.push_back(std::move(x));
  }
  return product_state(std::move(locals));
}

ProductState all_up_state(const ModelSpec& spec) {
  std::vector<Vector> locals;
  for (int mu = 0; mu < spec.n; ++mu) {
    Vector x = Vector::Zero(spec.local_dims[mu]);
    x[0] = 1.0;
    locals.push_back(std::move(x));
  }
  return ProductState{std::move(locals)};
}

ProductState all_plus_state(const ModelSpec& spec) {
  std::vector<Vector> locals;
  for (int mu = 0; mu < spec.n; ++mu)
    locals.push_back(Vector::Constant(spec.local_dims[mu],
                                      1.0 / std::sqrt(double(spec.local_dims[mu]))));
  return ProductState{std::move(locals)};
}

double StateStatistics::sigma() const {
  if (degenerate()) throw DegenerateVarianceError();
  return std::sqrt(variance);
}

namespace {

void check_state_matches(const ModelSpec& spec, const ProductState& state) {
  if (state.n() != spec.n)
    throw std::invalid_argument("state/model site count mismatch");
  for (int mu = 0; mu < spec.n; ++mu)
    if (state.locals[mu].size() != spec.local_dims[mu])
      throw std::invalid_argument("state/model local dimension mismatch");
}

struct TermData {
  SiteWindow window;
  const Matrix* op;
  Vector restricted;   // window restriction of |a>
  Vector applied;      // op * restricted
  double mean;         // <a| term |a>
};

}  // namespace

StateStatistics energy_stats(const ModelSpec& spec, const ProductState& state) {
  spec.validate();
  check_state_matches(spec, state);
  const auto terms = local_terms(spec);
  const int n = spec.n;

  // ---- local route: one window per term, unions for adjacent pairs -------
  std::vector<TermData> data;
  data.reserve(n);
  for (const auto& t : terms) {
    SiteWindow w(t.sites, spec.local_dims);
    Vector restricted = w.restrict_product(state.locals);
    Vector applied = t.op * restricted;
    const double mean = std::real(restricted.dot(applied));
    data.push_back(TermData{std::move(w), &t.op, std::move(restricted),
                            std::move(applied), mean});
  }

  double mean_local = 0.0;
  std::vector<double> diag(n);  // <term^2> - <term>^2
  for (int mu = 0; mu < n; ++mu) {
    mean_local += data[mu].mean;
    diag[mu] = data[mu].applied.squaredNorm() - data[mu].mean * data[mu].mean;
  }

  // <term_mu term_nu> for chain-adjacent pairs via the union window (<= 3 sites)
  auto cross_cov = [&](int mu, int nu) {
    std::vector<int> union_sites = terms[mu].sites;
    for (int s : terms[nu].sites)
      if (std::find(union_sites.begin(), union_sites.end(), s) == union_sites.end())
        union_sites.push_back(s);
    std::sort(union_sites.begin(), union_sites.end());
    std::vector<int> union_dims;
    for (int s : union_sites) union_dims.push_back(spec.local_dims[s]);
    auto slots = [&](const std::vector<int>& sites) {
      std::vector<int> out;
      for (int s : sites)
        out.push_back(static_cast<int>(
            std::find(union_sites.begin(), union_sites.end(), s) - union_sites.begin()));
      return out;
    };
    SiteWindow wu(slots(terms[mu].sites), union_dims);
    SiteWindow wv(slots(terms[nu].sites), union_dims);
    std::vector<Vector> union_locals;
    for (int s : union_sites) union_locals.push_back(state.locals[s]);
    const Vector a = kron_vector(union_locals);
    Vector xa = Vector::Zero(a.size()), xb = Vector::Zero(a.size());
    wu.apply_add(*data[mu].op, a, xa);
    wv.apply_add(*data[nu].op, a, xb);
    // both terms Hermitian: <a| T_mu T_nu |a> = <T_mu a, T_nu a>
    return xa.dot(xb) - Complex(data[mu].mean * data[nu].mean, 0);
  };

  // bonds connecting each unordered adjacent pair (2 on a two-site ring)
  const int bonds = spec.bond_count();
  double variance_local = 0.0;
  for (int mu = 0; mu < n; ++mu) variance_local += diag[mu];
  std::vector<double> cross(bonds, 0.0);
  std::vector<char> seen_pair(n, 0);  // keyed by min site of the pair
  for (int b = 0; b < bonds; ++b) {
    const int mu = b, nu = (b + 1) % n;
    const int key = std::min(mu, nu);
    if (seen_pair[key]) {
      // second bond between the same pair (two-site ring): split evenly
      cross[b] = cross[key] / 2.0;
      cross[key] /= 2.0;
      continue;
    }
    seen_pair[key] = 1;
    cross[b] = 2.0 * std::real(cross_cov(mu, nu));
    variance_local += cross[b];
  }

  // ---- global route ------------------------------------------------------
  const Vector a = state.full_vector();
  Vector ha = Vector::Zero(a.size());
  {
    std::vector<SiteWindow> windows;
    for (const auto& t : terms) windows.emplace_back(t.sites, spec.local_dims);
    for (size_t i = 0; i < terms.size(); ++i)
      windows[i].apply_add(terms[i].op, a, ha);
  }
  const double mean_global = std::real(a.dot(ha));
  const double h2_global = ha.squaredNorm();
  const double variance_global = h2_global - mean_global * mean_global;

  const double mean_scale = std::max(1.0, std::abs(mean_global));
  const double var_scale = std::max(1.0, h2_global);
  if (std::abs(mean_global - mean_local) > tol::stats_cross_check * mean_scale ||
      std::abs(variance_global - variance_local) > tol::stats_cross_check * var_scale)
    throw NumericError(
        "energy_stats: full-space and local-contraction moments disagree");

  StateStatistics stats;
  stats.n = n;
  stats.mean_energy = mean_global;
  stats.variance = variance_global;
  if (stats.variance < 0.0) {
    if (stats.variance < -tol::variance_clamp * var_scale)
      throw NumericError("energy_stats: variance significantly negative");
    stats.variance = 0.0;
  }
  if (stats.variance <= tol::variance_clamp) stats.variance = 0.0;

  // per-bond decomposition: X^2 terms weighted by adjacent bond count
  if (bonds == 0) {
    stats.per_bond_variance.assign(1, diag[0]);
  } else {
    std::vector<int> bonds_at_site(n, 0);
    for (int b = 0; b < bonds; ++b) {
      ++bonds_at_site[b];
      ++bonds_at_site[(b + 1) % n];
    }
    stats.per_bond_variance.assign(bonds, 0.0);
    for (int b = 0; b < bonds; ++b) {
      const int mu = b, nu = (b + 1) % n;
      stats.per_bond_variance[b] = diag[mu] / bonds_at_site[mu] +
                                   diag[nu] / bonds_at_site[nu] + cross[b];
    }
  }

  stats.cprime = max_local_norm_bound(spec);
  stats.c_estimate = stats.variance / n;
  return stats;
}

VarianceCondition check_variance_condition(const StateStatistics& stats, double C) {
  if (!(C > 0.0))
    throw std::invalid_argument("check_variance_condition: C must be positive");
  VarianceCondition out;
  out.margin = stats.variance - stats.n * C;
  out.ok = out.margin >= 0.0;
  return out;
}

}  // namespace qclt
