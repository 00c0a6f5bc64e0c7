// window.cpp
#include "qclt/window.hpp"

#include <algorithm>
#include <limits>

namespace qclt {

long checked_total_dim(const std::vector<int>& dims) {
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("local dimension must be positive");
    if (total > std::numeric_limits<long>::max() / d)
      throw std::invalid_argument("total dimension overflows platform integer");
    total *= d;
  }
  return total;
}

Vector kron_vector(const std::vector<Vector>& locals) {
  Vector v = Vector::Ones(1);
  for (const Vector& x : locals) {
    Vector next(v.size() * x.size());
    for (long i = 0; i < v.size(); ++i)
      next.segment(i * x.size(), x.size()) = v[i] * x;
    v = std::move(next);
  }
  return v;
}

SiteWindow::SiteWindow(std::vector<int> sites, const std::vector<int>& all_dims)
    : sites_(std::move(sites)) {
  const int n = static_cast<int>(all_dims.size());
  total_dim_ = checked_total_dim(all_dims);

  // site mu is most significant for mu = 0: stride = prod of dims to its right
  std::vector<long> strides(n, 1);
  for (int mu = n - 2; mu >= 0; --mu) strides[mu] = strides[mu + 1] * all_dims[mu + 1];

  std::vector<char> in_window(n, 0);
  for (int s : sites_) {
    if (s < 0 || s >= n) throw std::invalid_argument("window site out of range");
    if (in_window[s]) throw std::invalid_argument("duplicate window site");
    in_window[s] = 1;
    site_strides_.push_back(strides[s]);
    site_dims_.push_back(all_dims[s]);
    window_dim_ *= all_dims[s];
  }

  // offsets of all window basis states, window-ordered (first site most significant)
  window_offsets_.assign(window_dim_, 0);
  long repeat = 1;
  for (size_t i = 0; i < sites_.size(); ++i) {
    // after processing i sites, window_offsets_[0..repeat*d_i) filled
    const int d = site_dims_[i];
    const long stride = site_strides_[i];
    for (long base = repeat - 1; base >= 0; --base)
      for (int x = d - 1; x >= 0; --x)
        window_offsets_[base * d + x] = window_offsets_[base] + x * stride;
    repeat *= d;
  }

  // the complement is enumerated on demand; only its dims and strides are kept
  for (int mu = 0; mu < n; ++mu) {
    if (in_window[mu]) continue;
    rest_dims_.push_back(all_dims[mu]);
    rest_strides_.push_back(strides[mu]);
  }
}

void SiteWindow::apply_add(const Matrix& op, const Vector& in, Vector& out,
                           Complex scale) const {
  if (op.rows() != window_dim_ || op.cols() != window_dim_)
    throw std::invalid_argument("window operator dimension mismatch");
  if (in.size() != total_dim_ || out.size() != total_dim_)
    throw std::invalid_argument("full-space vector dimension mismatch");
  Vector buf(window_dim_), prod(window_dim_);
  for_each_rest([&](long rest) {
    for (long x = 0; x < window_dim_; ++x) buf[x] = in[rest + window_offsets_[x]];
    prod.noalias() = op * buf;
    for (long x = 0; x < window_dim_; ++x) out[rest + window_offsets_[x]] += scale * prod[x];
  });
}

void SiteWindow::add_to_dense(const Matrix& op, Matrix& dense, Complex scale) const {
  if (dense.rows() != total_dim_ || dense.cols() != total_dim_)
    throw std::invalid_argument("dense matrix dimension mismatch");
  for_each_rest([&](long rest) {
    for (long col = 0; col < window_dim_; ++col) {
      const long gc = rest + window_offsets_[col];
      for (long row = 0; row < window_dim_; ++row)
        dense(rest + window_offsets_[row], gc) += scale * op(row, col);
    }
  });
}

Vector SiteWindow::restrict_product(const std::vector<Vector>& locals) const {
  std::vector<Vector> parts;
  parts.reserve(sites_.size());
  for (int s : sites_) parts.push_back(locals.at(s));
  return kron_vector(parts);
}

Complex SiteWindow::expectation(const Matrix& op,
                                const std::vector<Vector>& locals) const {
  const Vector a = restrict_product(locals);
  return a.dot(op * a);  // Eigen's dot conjugates the left argument
}

Matrix embed_in_window(const Matrix& op, const std::vector<int>& window_dims,
                       int lo, int hi) {
  long left = 1, mid = 1, right = 1;
  for (int i = 0; i < static_cast<int>(window_dims.size()); ++i) {
    if (i < lo) left *= window_dims[i];
    else if (i <= hi) mid *= window_dims[i];
    else right *= window_dims[i];
  }
  if (op.rows() != mid || op.cols() != mid)
    throw std::invalid_argument("embed_in_window: operator/range mismatch");
  Matrix out = Matrix::Zero(left * mid * right, left * mid * right);
  for (long l = 0; l < left; ++l)
    for (long r = 0; r < right; ++r) {
      const long base = (l * mid) * right + r;
      for (long i = 0; i < mid; ++i)
        for (long j = 0; j < mid; ++j)
          out(base + i * right, base + j * right) += op(i, j);
    }
  return out;
}

}  // namespace qclt
