// clt.cpp
#include "qclt/clt.hpp"

#include "qclt/eig.hpp"
#include "qclt/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace qclt {

int default_k(int n) {
  if (n < 2) throw std::invalid_argument("default_k: n must be >= 2");
  // nudge before floor so exact fourth powers are not lost to rounding
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.75) + 1e-9));
  return std::clamp(k, 2, n);
}

namespace {

// Sorted union of two site lists (each already ascending).
std::vector<int> site_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> u;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
  return u;
}

}  // namespace

// Per-block mini-lattice: the block's sites plus the right-neighbour site its
// last bond reaches, with a relative window per centered term.
struct BlockDecomposition::BlockLocal {
  int lo = 0;
  std::vector<int> dims;
  std::vector<int> members;          // global term indices in the block
  std::vector<SiteWindow> windows;   // relative windows, aligned with members
  Vector restricted;                 // product state restricted to the range
  // spectrum of the window xi matrix: eigenvalues and |<phi|a>|^2
  RealVector char_values;
  RealVector char_weights;
};

BlockDecomposition::BlockDecomposition(ModelSpec spec, ProductState state, int k)
    : spec_(std::move(spec)), state_(std::move(state)), k_(k) {
  spec_.validate();
  if (spec_.boundary != Boundary::open)
    throw std::invalid_argument(
        "block decomposition requires an open chain: the wrap bond joins the "
        "first and last blocks, so their supports cannot be disjoint");
  const int n = spec_.n;
  if (state_.n() != n)
    throw std::invalid_argument("block decomposition: state size mismatch");
  if (k_ < 2 || k_ > n)
    throw std::invalid_argument("block decomposition: k must be in [2, n]");

  const int nb = n / k_;
  q_ = n - k_ * nb;
  for (int j = 0; j < nb; ++j) {
    std::vector<int> blk;
    for (int l = j * k_; l < j * k_ + k_ - 1; ++l) blk.push_back(l);
    big_.push_back(std::move(blk));
    small_.push_back(j * k_ + k_ - 1);
  }
  if (q_ > 0) {
    std::vector<int> blk;
    for (int l = nb * k_; l < n; ++l) blk.push_back(l);
    big_.push_back(std::move(blk));
  }

  stats_ = energy_stats(spec_, state_);
  terms_ = local_terms(spec_);
  windows_.reserve(terms_.size());
  centers_.reserve(terms_.size());
  for (const LocalTerm& t : terms_) {
    windows_.emplace_back(t.sites, spec_.local_dims);
    centers_.push_back(
        std::real(windows_.back().expectation(t.op, state_.locals)));
  }
  block_cache_.resize(big_.size());
}

const BlockDecomposition::BlockLocal& BlockDecomposition::block_local(int j) const {
  if (j < 0 || j >= static_cast<int>(big_.size()))
    throw std::invalid_argument("block index out of range");
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (block_cache_[j]) return *block_cache_[j];
  }
  const std::vector<int>& blk = big_[j];
  auto local = std::make_shared<BlockLocal>();
  local->lo = blk.front();
  const int last = blk.back();
  const int hi = static_cast<int>(terms_[last].sites.size()) == 2 ? last + 1 : last;
  local->dims.assign(spec_.local_dims.begin() + local->lo,
                     spec_.local_dims.begin() + hi + 1);
  std::vector<Vector> locs(state_.locals.begin() + local->lo,
                           state_.locals.begin() + hi + 1);
  local->restricted = kron_vector(locs);
  local->members = blk;
  for (int l : blk) {
    std::vector<int> rel;
    for (int s : terms_[l].sites) rel.push_back(s - local->lo);
    local->windows.emplace_back(rel, local->dims);
  }

  // window xi matrix and its spectrum, reused across char-fn grids
  const long wdim = local->restricted.size();
  Matrix xi = Matrix::Zero(wdim, wdim);
  double ctot = 0.0;
  for (std::size_t i = 0; i < local->members.size(); ++i) {
    local->windows[i].add_to_dense(terms_[local->members[i]].op, xi);
    ctot += centers_[local->members[i]];
  }
  xi.diagonal().array() -= Complex(ctot, 0);
  const EigenSystem sys = eigh(xi);
  local->char_values = sys.values;
  local->char_weights = (sys.vectors.adjoint() * local->restricted).cwiseAbs2();

  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!block_cache_[j]) block_cache_[j] = std::move(local);
  return *block_cache_[j];
}

double BlockDecomposition::block_moment(int j, int p) const {
  if (p < 1 || p > 4)
    throw std::invalid_argument("block_moment: power must be in 1..4");
  const BlockLocal& bl = block_local(j);
  Vector v = bl.restricted;
  for (int step = 0; step < p; ++step) {
    Vector next = Vector::Zero(v.size());
    double ctot = 0.0;
    for (std::size_t i = 0; i < bl.members.size(); ++i) {
      bl.windows[i].apply_add(terms_[bl.members[i]].op, v, next);
      ctot += centers_[bl.members[i]];
    }
    next -= ctot * v;
    v = std::move(next);
  }
  return std::real(bl.restricted.dot(v));
}

Complex BlockDecomposition::block_char_value(int j, double r) const {
  const BlockLocal& bl = block_local(j);
  const double sigma = stats_.sigma();
  Complex sum(0, 0);
  for (long i = 0; i < bl.char_values.size(); ++i)
    sum += bl.char_weights[i] *
           std::exp(Complex(0, -r * bl.char_values[i] / sigma));
  return sum;
}

void BlockDecomposition::apply_block_add(int j, const Vector& in, Vector& out) const {
  if (j < 0 || j >= static_cast<int>(big_.size()))
    throw std::invalid_argument("block index out of range");
  double ctot = 0.0;
  for (int l : big_[j]) {
    windows_[l].apply_add(terms_[l].op, in, out);
    ctot += centers_[l];
  }
  out -= ctot * in;
}

namespace {

Matrix centered_sum_dense(const ModelSpec& spec, const std::vector<LocalTerm>& terms,
                          const std::vector<SiteWindow>& windows,
                          const std::vector<double>& centers,
                          const std::vector<int>& which, double sigma) {
  const long dim = spec.total_dim();
  if (dim > default_dense_threshold)
    throw std::invalid_argument("dense block operator over the dense threshold");
  Matrix m = Matrix::Zero(dim, dim);
  double ctot = 0.0;
  for (int l : which) {
    windows[l].add_to_dense(terms[l].op, m);
    ctot += centers[l];
  }
  m.diagonal().array() -= Complex(ctot, 0);
  m /= sigma;
  return m;
}

}  // namespace

Matrix BlockDecomposition::zprime_dense() const {
  std::vector<int> which;
  for (const auto& blk : big_) which.insert(which.end(), blk.begin(), blk.end());
  return centered_sum_dense(spec_, terms_, windows_, centers_, which,
                            stats_.sigma());
}

Matrix BlockDecomposition::zsecond_dense() const {
  return centered_sum_dense(spec_, terms_, windows_, centers_, small_,
                            stats_.sigma());
}

const SpectralMeasure& BlockDecomposition::zprime_measure() const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (zprime_cache_) return *zprime_cache_;
  }
  const EigenSystem sys = eigh(zprime_dense());
  auto m = std::make_shared<SpectralMeasure>();
  m->kind = MeasureKind::exact;
  m->values = sys.values;
  m->weights = (sys.vectors.adjoint() * state_.full_vector()).cwiseAbs2();
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!zprime_cache_) zprime_cache_ = std::move(m);
  return *zprime_cache_;
}

BlockDecomposition block_decompose(const ModelSpec& spec,
                                   const ProductState& state, int k) {
  return BlockDecomposition(spec, state, k);
}

double truncation_error_bound(int n, int k, double C, double Cp, double r) {
  if (n < 1 || k < 1)
    throw std::invalid_argument("truncation_error_bound: n and k must be positive");
  if (!(C > 0.0) || !(Cp > 0.0))
    throw std::invalid_argument("truncation_error_bound: C and Cp must be positive");
  const double nb = static_cast<double>(n / k);
  return std::abs(r) * std::sqrt((1.0 / n) * nb * nb * (2.0 * Cp) * (2.0 * Cp) / C);
}

FactorizationReport check_factorization(const BlockDecomposition& blocks,
                                        int p, int q) {
  if (p < 1 || p > 4 || q < 1 || q > 4)
    throw std::invalid_argument("check_factorization: powers must be in 1..4");
  if (blocks.spec().total_dim() > default_dense_threshold)
    throw std::invalid_argument(
        "check_factorization: full-space side over the dense threshold");

  const int nblocks = static_cast<int>(blocks.big_blocks().size());
  const Vector a = blocks.state().full_vector();
  const auto apply_power = [&](int j, int power, const Vector& in) {
    Vector v = in;
    for (int step = 0; step < power; ++step) {
      Vector next = Vector::Zero(v.size());
      blocks.apply_block_add(j, v, next);
      v = std::move(next);
    }
    return v;
  };

  FactorizationReport report;
  for (int i = 0; i < nblocks; ++i) {
    for (int j = 0; j < nblocks; ++j) {
      if (i == j) continue;
      const Vector v = apply_power(i, p, apply_power(j, q, a));
      const Complex cross = a.dot(v);
      const double product = blocks.block_moment(i, p) * blocks.block_moment(j, q);
      report.max_residual = std::max(report.max_residual, std::abs(cross - product));
      if (i < j) {
        Vector ij = Vector::Zero(a.size());
        blocks.apply_block_add(i, apply_power(j, 1, a), ij);
        Vector ji = Vector::Zero(a.size());
        blocks.apply_block_add(j, apply_power(i, 1, a), ji);
        report.max_commutator_action =
            std::max(report.max_commutator_action, (ij - ji).norm());
      }
    }
  }
  return report;
}

double char_fn_factorization_check(const BlockDecomposition& blocks,
                                   const RealVector& r_grid) {
  const SpectralMeasure& zp = blocks.zprime_measure();
  const int nblocks = static_cast<int>(blocks.big_blocks().size());
  double worst = 0.0;
  for (long g = 0; g < r_grid.size(); ++g) {
    const double r = r_grid[g];
    const Complex lhs = char_fn_from_measure(zp, r);
    Complex rhs(1, 0);
    for (int j = 0; j < nblocks; ++j) rhs *= blocks.block_char_value(j, r);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

namespace {

// <a|T_u T_v|a> on the union window of two terms via two window applies.
double pair_moment(const ModelSpec& spec, const ProductState& state,
                   const LocalTerm& tu, const LocalTerm& tv) {
  const std::vector<int> united = site_union(tu.sites, tv.sites);
  // relative windows inside the union mini-lattice
  std::vector<int> udims;
  std::vector<Vector> ulocs;
  for (int s : united) {
    udims.push_back(spec.local_dims[s]);
    ulocs.push_back(state.locals[s]);
  }
  auto rel = [&united](const std::vector<int>& sites) {
    std::vector<int> out;
    for (int s : sites) {
      const auto it = std::find(united.begin(), united.end(), s);
      out.push_back(static_cast<int>(it - united.begin()));
    }
    return out;
  };
  SiteWindow ru(rel(tu.sites), udims);
  SiteWindow rv(rel(tv.sites), udims);
  const Vector aw = kron_vector(ulocs);
  Vector xu = Vector::Zero(aw.size());
  ru.apply_add(tu.op, aw, xu);
  Vector xv = Vector::Zero(aw.size());
  rv.apply_add(tv.op, aw, xv);
  return std::real(xu.dot(xv));  // <a|T_u T_v|a>, T_u applied to the bra
}

// Fourth moment <a|xi^4|a> of one block by cluster enumeration: ordered index
// quadruples whose sorted gaps are all <= 1 (one connected support cluster)
// evaluated exactly on a window of at most five sites, plus the closed form
// 6 * sum T(P1) T(P2) over disjoint covariance pairs, where T(u,u) = <X_u^2>
// and T(u,v) = <X_u X_v> + <X_v X_u> for adjacent u < v.  Every other
// quadruple leaves an isolated centered factor and vanishes.
double block_fourth_moment_clusters(const BlockDecomposition& blocks, int j) {
  const ModelSpec& spec = blocks.spec();
  const ProductState& state = blocks.state();
  const std::vector<LocalTerm>& terms = blocks.terms();
  const std::vector<double>& centers = blocks.term_means();
  const std::vector<int>& blk = blocks.big_blocks()[j];
  const int first = blk.front();
  const int last = blk.back();

  // covariance pairs: {start, end, T}
  struct Pair {
    int start, end;
    double value;
  };
  std::vector<Pair> pairs;
  for (int l : blk) {
    const double second = pair_moment(spec, state, terms[l], terms[l]);
    pairs.push_back({l, l, second - centers[l] * centers[l]});
    if (l + 1 <= last) {
      const double cross = pair_moment(spec, state, terms[l], terms[l + 1]);
      pairs.push_back({l, l + 1, 2.0 * (cross - centers[l] * centers[l + 1])});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) {
              return a.start != b.start ? a.start < b.start : a.end < b.end;
            });
  double two_pair = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t l = i + 1; l < pairs.size(); ++l)
      if (pairs[l].start - pairs[i].end >= 2)
        two_pair += pairs[i].value * pairs[l].value;
  two_pair *= 6.0;

  // connected quadruples, anchored at their smallest index
  double single = 0.0;
  for (int anchor = first; anchor <= last; ++anchor) {
    const int mhi = std::min(anchor + 3, last);
    std::vector<int> members;
    for (int l = anchor; l <= mhi; ++l) members.push_back(l);
    const int top = members.back();
    const int hi =
        static_cast<int>(terms[top].sites.size()) == 2 ? top + 1 : top;
    std::vector<int> dims;
    std::vector<Vector> locs;
    for (int s = anchor; s <= hi; ++s) {
      dims.push_back(spec.local_dims[s]);
      locs.push_back(state.locals[s]);
    }
    const Vector aw = kron_vector(locs);
    std::vector<SiteWindow> rels;
    for (int l : members) {
      std::vector<int> rel;
      for (int s : terms[l].sites) rel.push_back(s - anchor);
      rels.emplace_back(rel, dims);
    }
    const auto apply_x = [&](int member_index, const Vector& in) {
      const int l = members[member_index];
      Vector out = Vector::Zero(in.size());
      rels[member_index].apply_add(terms[l].op, in, out);
      out -= centers[l] * in;
      return out;
    };

    const int span = static_cast<int>(members.size());
    for (int u = 0; u < span; ++u)
      for (int v = 0; v < span; ++v)
        for (int w = 0; w < span; ++w)
          for (int x = 0; x < span; ++x) {
            int s[4] = {u, v, w, x};
            std::sort(s, s + 4);
            if (s[0] != 0) continue;  // anchored quadruples only
            if (s[1] - s[0] > 1 || s[2] - s[1] > 1 || s[3] - s[2] > 1)
              continue;  // not one connected cluster
            const Vector val = apply_x(v, apply_x(w, apply_x(x, aw)));
            Vector full = apply_x(u, val);
            single += std::real(aw.dot(full));
          }
  }
  return single + two_pair;
}

}  // namespace

LyapunovResult lyapunov_sum(const BlockDecomposition& blocks, int m) {
  if (m != 2)
    throw std::invalid_argument("lyapunov_sum: only order m = 2 is implemented");
  const StateStatistics& st = blocks.stats();
  const double sigma2 = st.variance;
  if (!(sigma2 > 0.0)) throw DegenerateVarianceError();

  double fourth_total = 0.0;
  for (std::size_t j = 0; j < blocks.big_blocks().size(); ++j)
    fourth_total += block_fourth_moment_clusters(blocks, static_cast<int>(j));

  LyapunovResult out;
  out.sum = fourth_total / (sigma2 * sigma2);
  const int n = blocks.n();
  const int k = blocks.k();
  const double nb = static_cast<double>(n / k);
  const double cp = st.cprime;
  const double c = st.c_estimate;
  out.bound = (nb + 1.0) * ((k - 1.0) * (k - 1.0) + 630.0 * (k - 1.0)) *
              std::pow(2.0 * cp, 4) / (static_cast<double>(n) * n * c * c);
  return out;
}

double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

RealVector default_charfn_grid() {
  RealVector grid(81);
  for (int i = 0; i <= 80; ++i) grid[i] = (i - 40) / 10.0;
  return grid;
}

namespace {

double measure_moment(const SpectralMeasure& m, int p) {
  if (m.kind == MeasureKind::exact)
    return (m.values.array().pow(p) * m.weights.array()).sum();
  double sum = 0.0;
  for (long i = 1; i < m.grid.size(); ++i) {
    const double fa = std::pow(m.grid[i - 1], p) * m.density[i - 1];
    const double fb = std::pow(m.grid[i], p) * m.density[i];
    sum += 0.5 * (fa + fb) * (m.grid[i] - m.grid[i - 1]);
  }
  return sum;
}

double ks_distance_exact(const SpectralMeasure& m) {
  std::vector<long> order(m.values.size());
  for (long i = 0; i < m.values.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&m](long a, long b) { return m.values[a] < m.values[b]; });
  double ks = 0.0;
  double cum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double z = m.values[order[i]];
    const double before = cum;
    while (i < order.size() && m.values[order[i]] == z) cum += m.weights[order[i++]];
    const double phi = standard_normal_cdf(z);
    ks = std::max({ks, std::abs(before - phi), std::abs(cum - phi)});
  }
  return ks;
}

double ks_distance_grid(const SpectralMeasure& m) {
  double ks = 0.0;
  double cum = 0.0;
  for (long i = 0; i < m.grid.size(); ++i) {
    if (i > 0)
      cum += 0.5 * (m.density[i - 1] + m.density[i]) * (m.grid[i] - m.grid[i - 1]);
    ks = std::max(ks, std::abs(cum - standard_normal_cdf(m.grid[i])));
  }
  return ks;
}

}  // namespace

GaussianReport gaussian_comparison(const SpectralMeasure& measure,
                                   const std::vector<CharFnSample>& charfn,
                                   int n) {
  const double moment_tol = measure.kind == MeasureKind::exact ? 1e-6 : 5e-2;
  const double m1 = measure_moment(measure, 1);
  const double m2 = measure_moment(measure, 2);
  if (std::abs(m1) > moment_tol || std::abs(m2 - 1.0) > moment_tol)
    throw std::invalid_argument(
        "gaussian_comparison: measure is not standardized (mean " +
        std::to_string(m1) + ", second moment " + std::to_string(m2) + ")");

  GaussianReport report;
  report.n = n;
  report.moments = {m1, m2, measure_moment(measure, 3), measure_moment(measure, 4)};
  report.moment_devs = {std::abs(report.moments[0]),
                        std::abs(report.moments[1] - 1.0),
                        std::abs(report.moments[2]),
                        std::abs(report.moments[3] - 3.0)};
  report.ks_distance = measure.kind == MeasureKind::exact
                           ? ks_distance_exact(measure)
                           : ks_distance_grid(measure);

  double dev = 0.0;
  for (const CharFnSample& s : charfn)
    dev = std::max(dev, std::abs(s.value - Complex(std::exp(-s.r * s.r / 2.0), 0)));
  report.charfn_dev = dev;

  if (measure.kind == MeasureKind::kpm) {
    double l1 = 0.0;
    const auto gauss = [](double z) {
      return std::exp(-z * z / 2.0) / std::sqrt(2.0 * M_PI);
    };
    for (long i = 1; i < measure.grid.size(); ++i) {
      const double fa = std::abs(measure.density[i - 1] - gauss(measure.grid[i - 1]));
      const double fb = std::abs(measure.density[i] - gauss(measure.grid[i]));
      l1 += 0.5 * (fa + fb) * (measure.grid[i] - measure.grid[i - 1]);
    }
    report.l1_density_dev = l1;
  }
  return report;
}

namespace {

SweepRow sweep_row(const ModelFactory& model_for, const StateFactory& state_for,
                   int n, long dense_threshold, int kpm_moments) {
  ModelSpec spec = model_for(n);
  spec.validate();
  const ProductState state = state_for(spec);
  const StateStatistics st = energy_stats(spec, state);
  const int k = default_k(n);
  const BlockDecomposition blocks(spec, state, k);
  const LyapunovResult lyap = lyapunov_sum(blocks);

  const HamiltonianOperator op(spec, dense_threshold);
  const RealVector grid = default_charfn_grid();
  SpectralMeasure standardized;
  std::vector<CharFnSample> samples;
  std::string method;
  if (op.has_dense()) {
    method = "exact";
    standardized = standardize(spectral_measure_exact(op, state), st);
    samples.reserve(grid.size());
    for (long i = 0; i < grid.size(); ++i)
      samples.push_back({grid[i], char_fn_from_measure(standardized, grid[i])});
  } else {
    method = "kpm";
    standardized = standardize(spectral_density_kpm(op, state, kpm_moments), st);
    samples.reserve(grid.size());
    for (long i = 0; i < grid.size(); ++i)
      samples.push_back(char_fn_krylov(op, state, st, grid[i]));
  }
  const GaussianReport report = gaussian_comparison(standardized, samples, n);

  SweepRow row;
  row.n = n;
  row.k = k;
  row.q = blocks.q();
  row.sigma2 = st.variance;
  row.cprime = st.cprime;
  row.ks = report.ks_distance;
  row.m1 = report.moments[0];
  row.m2 = report.moments[1];
  row.m3 = report.moments[2];
  row.m4 = report.moments[3];
  row.charfn_dev = report.charfn_dev;
  row.lyapunov_sum = lyap.sum;
  row.lyapunov_bound = lyap.bound;
  row.trunc_bound_r1 =
      truncation_error_bound(n, k, st.c_estimate, st.cprime, 1.0);
  row.method = method;
  return row;
}

}  // namespace

std::vector<SweepRow> convergence_sweep(const ModelFactory& model_for,
                                        const StateFactory& state_for,
                                        const std::vector<int>& n_list,
                                        long dense_threshold, int kpm_moments,
                                        int max_threads) {
  std::vector<SweepRow> rows(n_list.size());
  if (max_threads <= 1 || n_list.size() <= 1) {
    for (std::size_t i = 0; i < n_list.size(); ++i)
      rows[i] = sweep_row(model_for, state_for, n_list[i], dense_threshold,
                          kpm_moments);
    return rows;
  }
  std::size_t next = 0;
  while (next < n_list.size()) {
    const std::size_t batch =
        std::min<std::size_t>(max_threads, n_list.size() - next);
    std::vector<std::future<SweepRow>> futures;
    for (std::size_t b = 0; b < batch; ++b) {
      const int n = n_list[next + b];
      futures.push_back(std::async(std::launch::async, [&, n] {
        return sweep_row(model_for, state_for, n, dense_threshold, kpm_moments);
      }));
    }
    for (std::size_t b = 0; b < batch; ++b) rows[next + b] = futures[b].get();
    next += batch;
  }
  return rows;
}

}  // namespace qclt
