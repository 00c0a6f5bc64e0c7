// model.cpp
#include "qclt/model.hpp"

#include "qclt/eig.hpp"
#include "qclt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace qclt {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

void ModelSpec::validate() const {
  if (n < 1) throw std::invalid_argument("model: n must be >= 1");
  if (static_cast<int>(local_dims.size()) != n)
    throw std::invalid_argument("model: local_dims size mismatch");
  if (static_cast<int>(site_terms.size()) != n)
    throw std::invalid_argument("model: site_terms size mismatch");
  const int expected_bonds = boundary == Boundary::open ? n - 1 : n;
  if (bond_count() != expected_bonds)
    throw std::invalid_argument("model: bond_terms count mismatch for boundary");
  if (boundary == Boundary::periodic && n < 2)
    throw std::invalid_argument("model: periodic chain requires n >= 2");
  checked_total_dim(local_dims);
  for (int mu = 0; mu < n; ++mu) {
    const auto& h = site_terms[mu];
    if (h.rows() != local_dims[mu] || h.cols() != local_dims[mu])
      throw std::invalid_argument("model: site term dimension mismatch");
    if (hermiticity_defect(h) > tol::hermiticity) {
      std::ostringstream os;
      os << "model: site term " << mu << " is not Hermitian";
      throw std::invalid_argument(os.str());
    }
  }
  for (int mu = 0; mu < bond_count(); ++mu) {
    const long d = static_cast<long>(local_dims[mu]) * local_dims[(mu + 1) % n];
    const auto& b = bond_terms[mu];
    if (b.rows() != d || b.cols() != d)
      throw std::invalid_argument("model: bond term dimension mismatch");
    if (hermiticity_defect(b) > tol::hermiticity) {
      std::ostringstream os;
      os << "model: bond term " << mu << " is not Hermitian";
      throw std::invalid_argument(os.str());
    }
  }
}

std::vector<LocalTerm> local_terms(const ModelSpec& spec) {
  std::vector<LocalTerm> terms;
  terms.reserve(spec.n);
  for (int mu = 0; mu < spec.n; ++mu) {
    const bool has_bond = mu < spec.bond_count();
    if (!has_bond) {
      terms.push_back({{mu}, spec.site_terms[mu]});
      continue;
    }
    const int nu = (mu + 1) % spec.n;
    const int dnu = spec.local_dims[nu];
    Matrix op = kron(spec.site_terms[mu], Matrix::Identity(dnu, dnu));
    op += spec.bond_terms[mu];
    terms.push_back({{mu, nu}, std::move(op)});
  }
  return terms;
}

struct HamiltonianOperator::EigCache {
  std::mutex mutex;
  std::unique_ptr<EigenSystem> system;
};

HamiltonianOperator::HamiltonianOperator(ModelSpec spec, long dense_threshold)
    : spec_(std::move(spec)), eig_cache_(std::make_shared<EigCache>()) {
  spec_.validate();
  total_dim_ = spec_.total_dim();
  terms_ = local_terms(spec_);
  windows_.reserve(terms_.size());
  for (const auto& t : terms_) windows_.emplace_back(t.sites, spec_.local_dims);
  if (total_dim_ <= dense_threshold) {
    Matrix dense = Matrix::Zero(total_dim_, total_dim_);
    for (size_t i = 0; i < terms_.size(); ++i)
      windows_[i].add_to_dense(terms_[i].op, dense);
    dense_ = std::move(dense);
  }
}

const EigenSystem& HamiltonianOperator::eigensystem() const {
  std::lock_guard<std::mutex> lock(eig_cache_->mutex);
  if (!eig_cache_->system)
    eig_cache_->system = std::make_unique<EigenSystem>(eigh(dense()));
  return *eig_cache_->system;
}

const Matrix& HamiltonianOperator::dense() const {
  if (!dense_)
    throw std::invalid_argument(
        "dense Hamiltonian not materialized (dimension over threshold); use the "
        "matrix-free or KPM path");
  return *dense_;
}

void HamiltonianOperator::apply_add(const Vector& x, Vector& y, Complex scale) const {
  for (size_t i = 0; i < terms_.size(); ++i)
    windows_[i].apply_add(terms_[i].op, x, y, scale);
}

Vector HamiltonianOperator::apply(const Vector& x) const {
  Vector y = Vector::Zero(total_dim_);
  apply_add(x, y);
  return y;
}

ModelSpec build_ising(int n, double B, double J, Boundary boundary) {
  if (n < 1) throw std::invalid_argument("build_ising: n must be >= 1");
  Matrix sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  ModelSpec spec;
  spec.n = n;
  spec.boundary = boundary;
  spec.local_dims.assign(n, 2);
  spec.site_terms.assign(n, -B * sz);
  const int bonds = boundary == Boundary::open ? n - 1 : n;
  spec.bond_terms.assign(bonds, -(J / 2.0) * kron(sx, sx));
  spec.validate();
  return spec;
}

ModelSpec build_harmonic(int n, double mass, double omega, int d_trunc,
                         Boundary boundary) {
  if (n < 1) throw std::invalid_argument("build_harmonic: n must be >= 1");
  if (mass <= 0 || omega <= 0)
    throw std::invalid_argument("build_harmonic: mass and omega must be positive");
  if (d_trunc < 2) throw std::invalid_argument("build_harmonic: d_trunc must be >= 2");
  Matrix lower = Matrix::Zero(d_trunc, d_trunc);
  for (int k = 1; k < d_trunc; ++k) lower(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Matrix number = lower.adjoint() * lower;
  const Matrix q = (lower + lower.adjoint()) / std::sqrt(2.0 * mass * omega);
  ModelSpec spec;
  spec.n = n;
  spec.boundary = boundary;
  spec.local_dims.assign(n, d_trunc);
  spec.site_terms.assign(
      n, omega * (number + 0.5 * Matrix::Identity(d_trunc, d_trunc)));
  const int bonds = boundary == Boundary::open ? n - 1 : n;
  spec.bond_terms.assign(bonds, -mass * omega * omega * kron(q, q));
  spec.validate();
  return spec;
}

HamiltonianOperator assemble(const ModelSpec& spec, long dense_threshold) {
  return HamiltonianOperator(spec, dense_threshold);
}

double local_norm_bound(const ModelSpec& spec, int mu) {
  if (mu < 0 || mu >= spec.n) throw std::invalid_argument("local_norm_bound: site out of range");
  const auto terms = local_terms(spec);
  Eigen::SelfAdjointEigenSolver<Matrix> es(terms[mu].op, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("local_norm_bound: eigensolve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double max_local_norm_bound(const ModelSpec& spec) {
  double best = 0.0;
  for (int mu = 0; mu < spec.n; ++mu) best = std::max(best, local_norm_bound(spec, mu));
  return best;
}

namespace {

int ring_distance(int mu, int nu, int n, Boundary boundary) {
  const int d = std::abs(mu - nu);
  return boundary == Boundary::periodic ? std::min(d, n - d) : d;
}

// Commutator magnitude of two local terms computed on their joint support:
// a dense Frobenius norm when the joint factor is small, otherwise the action
// norm max_v ||[A,B] v|| on seeded random unit vectors of the joint factor.
double pair_commutator(const LocalTerm& ta, const LocalTerm& tb,
                       const std::vector<int>& all_dims) {
  std::vector<int> union_sites;
  for (int s : ta.sites) union_sites.push_back(s);
  for (int s : tb.sites)
    if (std::find(union_sites.begin(), union_sites.end(), s) == union_sites.end())
      union_sites.push_back(s);
  std::sort(union_sites.begin(), union_sites.end());

  std::vector<int> union_dims;
  long union_dim = 1;
  for (int s : union_sites) {
    union_dims.push_back(all_dims[s]);
    union_dim *= all_dims[s];
  }
  auto slot_of = [&](int site) {
    return static_cast<int>(std::find(union_sites.begin(), union_sites.end(), site) -
                            union_sites.begin());
  };
  std::vector<int> slots_a, slots_b;
  for (int s : ta.sites) slots_a.push_back(slot_of(s));
  for (int s : tb.sites) slots_b.push_back(slot_of(s));
  SiteWindow wa(slots_a, union_dims), wb(slots_b, union_dims);

  if (union_dim <= 512) {
    Matrix A = Matrix::Zero(union_dim, union_dim), B = Matrix::Zero(union_dim, union_dim);
    wa.add_to_dense(ta.op, A);
    wb.add_to_dense(tb.op, B);
    return (A * B - B * A).norm();
  }
  NormalSampler normal(0x6c6f63616cULL);
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    Vector v(union_dim);
    for (long i = 0; i < union_dim; ++i) v[i] = Complex(normal(), normal());
    v.normalize();
    Vector ab = Vector::Zero(union_dim), ba = Vector::Zero(union_dim);
    Vector tmp = Vector::Zero(union_dim);
    wb.apply_add(tb.op, v, tmp);
    wa.apply_add(ta.op, tmp, ab);
    tmp.setZero();
    wa.apply_add(ta.op, v, tmp);
    wb.apply_add(tb.op, tmp, ba);
    worst = std::max(worst, (ab - ba).norm());
  }
  return worst;
}

}  // namespace

LocalityReport check_locality(const ModelSpec& spec) {
  spec.validate();
  const auto terms = local_terms(spec);
  LocalityReport report;
  for (int mu = 0; mu < spec.n; ++mu)
    for (int nu = mu + 1; nu < spec.n; ++nu) {
      const double norm = pair_commutator(terms[mu], terms[nu], spec.local_dims);
      if (ring_distance(mu, nu, spec.n, spec.boundary) > 1) {
        report.max_far_commutator = std::max(report.max_far_commutator, norm);
        ++report.far_pairs_checked;
      } else {
        report.max_near_commutator = std::max(report.max_near_commutator, norm);
      }
    }
  return report;
}

}  // namespace qclt
