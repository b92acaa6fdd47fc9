#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qline/errors.hpp"

namespace qline {

/// Symmetric tridiagonal matrix with optional periodic wrap (corner) entries,
/// complex-valued storage. Used for the phase-basis operator stencils, where
/// first-order elements couple nearest neighbours only and the transmon mesh
/// identifies its first and last node.
struct WrapTridiag {
  Eigen::VectorXcd diag;   // size n
  Eigen::VectorXcd upper;  // size n-1, entry (i, i+1)
  Eigen::VectorXcd lower;  // size n-1, entry (i+1, i)
  std::complex<double> corner_upper{0.0, 0.0};  // entry (0, n-1)
  std::complex<double> corner_lower{0.0, 0.0};  // entry (n-1, 0)
  bool periodic = false;

  Eigen::Index size() const { return diag.size(); }

  void resize(Eigen::Index n) {
    diag = Eigen::VectorXcd::Zero(n);
    upper = Eigen::VectorXcd::Zero(n - 1);
    lower = Eigen::VectorXcd::Zero(n - 1);
  }

  /// y = A x (no aliasing between x and y).
  template <typename In, typename Out>
  void multiply(const In& x, Out& y) const {
    const Eigen::Index n = size();
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::complex<double> acc = diag(i) * x(i);
      if (i > 0) acc += lower(i - 1) * x(i - 1);
      if (i + 1 < n) acc += upper(i) * x(i + 1);
      y(i) = acc;
    }
    if (periodic && n > 2) {
      y(0) += corner_upper * x(n - 1);
      y(n - 1) += corner_lower * x(0);
    }
  }

  Eigen::MatrixXcd dense() const;
};

/// LU factorization (Thomas algorithm, no pivoting) of a wrap-tridiagonal
/// matrix; periodic corners handled by the Sherman-Morrison correction.
/// Valid for the diagonally dominant mass matrices assembled here.
class WrapTridiagFactor {
 public:
  WrapTridiagFactor() = default;
  explicit WrapTridiagFactor(const WrapTridiag& a) { factor(a); }

  void factor(const WrapTridiag& a);
  void solve_in_place(Eigen::VectorXcd& b) const;

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const {
    Eigen::VectorXcd x = b;
    solve_in_place(x);
    return x;
  }

 private:
  // plain tridiagonal solve with the stored factors
  void tri_solve(Eigen::VectorXcd& b) const;

  Eigen::VectorXcd dl_, d_, du_;  // factored
  Eigen::VectorXcd z_;            // A1^{-1} u for Sherman-Morrison
  std::complex<double> vz_denom_{1.0, 0.0};
  std::complex<double> gamma_{0.0, 0.0};
  std::complex<double> cu_{0.0, 0.0}, cl_{0.0, 0.0};
  bool periodic_ = false;
};

}  // namespace qline
