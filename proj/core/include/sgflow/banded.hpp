#pragma once

#include <span>
#include <vector>

namespace sgflow {

// Square band matrix in LAPACK general-band layout (extra kl rows for the LU fill).
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(int n, int kl, int ku);

  int n() const noexcept { return n_; }
  int kl() const noexcept { return kl_; }
  int ku() const noexcept { return ku_; }
  int ldab() const noexcept { return 2 * kl_ + ku_ + 1; }

  bool in_band(int row, int col) const noexcept {
    return col - row <= ku_ && row - col <= kl_ && row >= 0 && col >= 0 && row < n_ && col < n_;
  }
  double get(int row, int col) const;
  void add(int row, int col, double v);

  std::vector<double> multiply(std::span<const double> x) const;
  double norm_inf() const;
  double norm_one() const;

  std::vector<double>& storage() noexcept { return ab_; }
  const std::vector<double>& storage() const noexcept { return ab_; }

 private:
  std::size_t slot(int row, int col) const noexcept {
    return static_cast<std::size_t>(col) * ldab() + (kl_ + ku_ + row - col);
  }

  int n_ = 0, kl_ = 0, ku_ = 0;
  std::vector<double> ab_;
};

// Partial-pivoting band LU (dgbtrf) with a reciprocal condition estimate (dgbcon).
class BandedLU {
 public:
  explicit BandedLU(const BandedMatrix& a);

  // rhs is column-major n x nrhs, overwritten with the solution.
  void solve(std::span<double> rhs, int nrhs) const;
  double rcond() const noexcept { return rcond_; }
  const BandedMatrix& matrix() const noexcept { return a_; }
  double norm_inf() const noexcept { return norm_inf_; }

 private:
  BandedMatrix a_;
  BandedMatrix lu_;
  std::vector<int> ipiv_;
  double rcond_ = 0.0;
  double norm_inf_ = 0.0;
};

}  // namespace sgflow
