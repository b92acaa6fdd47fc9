#include "qline/banded.hpp"

namespace qline {

Eigen::MatrixXcd WrapTridiag::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = diag(i);
    if (i + 1 < n) {
      m(i, i + 1) = upper(i);
      m(i + 1, i) = lower(i);
    }
  }
  if (periodic && n > 2) {
    m(0, n - 1) = corner_upper;
    m(n - 1, 0) = corner_lower;
  }
  return m;
}

void WrapTridiagFactor::factor(const WrapTridiag& a) {
  const Eigen::Index n = a.size();
  if (n < 2) throw DomainError("tridiagonal factor needs n >= 2");
  dl_ = a.lower;
  d_ = a.diag;
  du_ = a.upper;
  periodic_ = a.periodic && n > 2;
  cu_ = a.corner_upper;
  cl_ = a.corner_lower;

  if (periodic_) {
    // Sherman-Morrison: A = A1 + u v^T with u = (gamma,0,..,cl), v = (1,0,..,cu/gamma)
    gamma_ = -d_(0);
    d_(0) -= gamma_;
    d_(n - 1) -= cu_ * cl_ / gamma_;
  }

  for (Eigen::Index i = 1; i < n; ++i) {
    const std::complex<double> m = dl_(i - 1) / d_(i - 1);
    dl_(i - 1) = m;
    d_(i) -= m * du_(i - 1);
  }

  if (periodic_) {
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
    u(0) = gamma_;
    u(n - 1) = cl_;
    tri_solve(u);
    z_ = u;
    vz_denom_ = 1.0 + z_(0) + (cu_ / gamma_) * z_(n - 1);
    if (vz_denom_ == std::complex<double>(0.0, 0.0))
      throw NumericalError("cyclic tridiagonal factorization is singular");
  }
}

void WrapTridiagFactor::tri_solve(Eigen::VectorXcd& b) const {
  const Eigen::Index n = d_.size();
  for (Eigen::Index i = 1; i < n; ++i) b(i) -= dl_(i - 1) * b(i - 1);
  b(n - 1) /= d_(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) b(i) = (b(i) - du_(i) * b(i + 1)) / d_(i);
}

void WrapTridiagFactor::solve_in_place(Eigen::VectorXcd& b) const {
  const Eigen::Index n = d_.size();
  tri_solve(b);
  if (periodic_) {
    const std::complex<double> vy = b(0) + (cu_ / gamma_) * b(n - 1);
    b -= z_ * (vy / vz_denom_);
  }
}

}  // namespace qline
