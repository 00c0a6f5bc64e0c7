// eig.hpp — dense Hermitian eigendecomposition (LAPACK divide & conquer)
#pragma once

#include "qclt/common.hpp"

namespace qclt {

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns
};

// Full eigendecomposition of a Hermitian matrix.  Real-symmetric inputs are
// detected and routed to the ~4x faster real driver; either way the result is
// returned in complex storage.  Throws NumericError when LAPACK fails.
EigenSystem eigh(const Matrix& m);

// Eigenvalues only.
RealVector eigvalsh(const Matrix& m);

}  // namespace qclt
