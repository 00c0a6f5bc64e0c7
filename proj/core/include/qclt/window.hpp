// window.hpp — apply operators supported on a few sites to full-space vectors
#pragma once

#include "qclt/common.hpp"

#include <vector>

namespace qclt {

// A SiteWindow names an ordered subset of chain sites.  Operators given as
// dense matrices on the window's tensor factor (basis ordered as the sites
// are listed, leftmost site most significant) can be applied to full-space
// vectors without materializing anything of full dimension, embedded into a
// full dense matrix, or contracted in expectation values of product states.
//
// The site order is arbitrary — in particular the periodic wrap bond (n-1,0)
// is the window {n-1, 0} with its matrix in the |site n-1> (x) |site 0> basis.
class SiteWindow {
 public:
  SiteWindow(std::vector<int> sites, const std::vector<int>& all_dims);

  const std::vector<int>& sites() const { return sites_; }
  long window_dim() const { return window_dim_; }
  long total_dim() const { return total_dim_; }

  // out += scale * (op acting on the window) * in.  op is window_dim square.
  void apply_add(const Matrix& op, const Vector& in, Vector& out,
                 Complex scale = Complex(1, 0)) const;

  // dense += scale * identity-padded embedding of op.
  void add_to_dense(const Matrix& op, Matrix& dense,
                    Complex scale = Complex(1, 0)) const;

  // Restriction of a product state to the window: tensor product of the
  // listed sites' local vectors, in window order.
  Vector restrict_product(const std::vector<Vector>& locals) const;

  // <a| op_window |a> for a product state (window-local contraction).
  Complex expectation(const Matrix& op, const std::vector<Vector>& locals) const;

 private:
  // Visits the full-space offset of every complement configuration (mixed-
  // radix counter over the out-of-window sites); nothing of size
  // total_dim / window_dim is ever materialized.
  template <class F>
  void for_each_rest(F&& f) const {
    std::vector<int> digit(rest_dims_.size(), 0);
    long offset = 0;
    for (;;) {
      f(offset);
      std::size_t i = rest_dims_.size();
      for (;;) {
        if (i == 0) return;
        --i;
        offset += rest_strides_[i];
        if (++digit[i] < rest_dims_[i]) break;
        offset -= static_cast<long>(rest_dims_[i]) * rest_strides_[i];
        digit[i] = 0;
      }
    }
  }

  std::vector<int> sites_;
  std::vector<long> site_strides_;   // full-space stride of each window site
  std::vector<int> site_dims_;
  std::vector<long> window_offsets_; // full-space offset of each window basis state
  std::vector<int> rest_dims_;       // dims of the complement sites, chain order
  std::vector<long> rest_strides_;
  long window_dim_ = 1;
  long total_dim_ = 1;
};

// Window-local operator algebra: embed a matrix acting on a contiguous range
// [lo, hi] of window slots (inclusive) into the window's full tensor factor.
Matrix embed_in_window(const Matrix& op, const std::vector<int>& window_dims,
                       int lo, int hi);

// Product of all dims; throws on platform-integer overflow.
long checked_total_dim(const std::vector<int>& dims);

// Full tensor-product vector of a list of local vectors (small systems only).
Vector kron_vector(const std::vector<Vector>& locals);

}  // namespace qclt
