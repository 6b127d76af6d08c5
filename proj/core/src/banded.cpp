#include "sgflow/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sgflow/errors.hpp"

namespace sgflow {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ab_(static_cast<std::size_t>(n) * (2 * kl + ku + 1), 0.0) {}

double BandedMatrix::get(int row, int col) const {
  return in_band(row, col) ? ab_[slot(row, col)] : 0.0;
}

void BandedMatrix::add(int row, int col, double v) {
  if (!in_band(row, col))
    throw std::out_of_range("band entry (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside kl=" + std::to_string(kl_) + " ku=" + std::to_string(ku_));
  ab_[slot(row, col)] += v;
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (int row = 0; row < n_; ++row) {
    const int lo = std::max(0, row - kl_);
    const int hi = std::min(n_ - 1, row + ku_);
    double acc = 0.0;
    for (int col = lo; col <= hi; ++col) acc += ab_[slot(row, col)] * x[col];
    y[row] = acc;
  }
  return y;
}

double BandedMatrix::norm_inf() const {
  double best = 0.0;
  for (int row = 0; row < n_; ++row) {
    double acc = 0.0;
    for (int col = std::max(0, row - kl_); col <= std::min(n_ - 1, row + ku_); ++col)
      acc += std::abs(ab_[slot(row, col)]);
    best = std::max(best, acc);
  }
  return best;
}

double BandedMatrix::norm_one() const {
  double best = 0.0;
  for (int col = 0; col < n_; ++col) {
    double acc = 0.0;
    for (int row = std::max(0, col - ku_); row <= std::min(n_ - 1, col + kl_); ++row)
      acc += std::abs(ab_[slot(row, col)]);
    best = std::max(best, acc);
  }
  return best;
}

BandedLU::BandedLU(const BandedMatrix& a) : a_(a), lu_(a), ipiv_(a.n()) {
  const lapack_int info =
      LAPACKE_dgbtrf(LAPACK_COL_MAJOR, lu_.n(), lu_.n(), lu_.kl(), lu_.ku(), lu_.storage().data(),
                     lu_.ldab(), ipiv_.data());
  if (info != 0)
    throw EllipticError("band factorization failed (dgbtrf info " + std::to_string(info) + ")");
  double rc = 0.0;
  const lapack_int cinfo =
      LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', lu_.n(), lu_.kl(), lu_.ku(), lu_.storage().data(),
                     lu_.ldab(), ipiv_.data(), a_.norm_one(), &rc);
  if (cinfo != 0 || !(rc > 0.0) || !std::isfinite(rc))
    throw EllipticError("band system is numerically singular (rcond " + std::to_string(rc) + ")");
  rcond_ = rc;
  norm_inf_ = a_.norm_inf();
}

void BandedLU::solve(std::span<double> rhs, int nrhs) const {
  const lapack_int info =
      LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', lu_.n(), lu_.kl(), lu_.ku(), nrhs,
                     lu_.storage().data(), lu_.ldab(), ipiv_.data(), rhs.data(), lu_.n());
  if (info != 0) throw EllipticError("band solve failed (dgbtrs info " + std::to_string(info) + ")");
}

}  // namespace sgflow
