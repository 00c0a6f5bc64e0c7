// eig.cpp
#include "qclt/eig.hpp"

#include <lapacke.h>

#include <string>

namespace qclt {

namespace {

bool is_real(const Matrix& m) {
  for (long j = 0; j < m.cols(); ++j)
    for (long i = 0; i < m.rows(); ++i)
      if (m(i, j).imag() != 0.0) return false;
  return true;
}

[[noreturn]] void lapack_failure(const char* routine, int info) {
  throw NumericError(std::string(routine) + " failed with info=" + std::to_string(info));
}

}  // namespace

EigenSystem eigh(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigh: matrix not square");
  const lapack_int dim = static_cast<lapack_int>(m.rows());
  EigenSystem out;
  out.values.resize(dim);
  if (is_real(m)) {
    Eigen::MatrixXd work = m.real();
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', dim,
                                           work.data(), dim, out.values.data());
    if (info != 0) lapack_failure("dsyevd", info);
    out.vectors = work.cast<Complex>();
  } else {
    Matrix work = m;
    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', dim,
        reinterpret_cast<lapack_complex_double*>(work.data()), dim,
        out.values.data());
    if (info != 0) lapack_failure("zheevd", info);
    out.vectors = std::move(work);
  }
  return out;
}

RealVector eigvalsh(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigvalsh: matrix not square");
  const lapack_int dim = static_cast<lapack_int>(m.rows());
  RealVector values(dim);
  if (is_real(m)) {
    Eigen::MatrixXd work = m.real();
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', dim,
                                           work.data(), dim, values.data());
    if (info != 0) lapack_failure("dsyevd", info);
  } else {
    Matrix work = m;
    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'N', 'L', dim,
        reinterpret_cast<lapack_complex_double*>(work.data()), dim, values.data());
    if (info != 0) lapack_failure("zheevd", info);
  }
  return values;
}

}  // namespace qclt
