#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace cogniscope {

/// Small dense square matrix, row-major.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size, double fill = 0.0) : n(size), a(size * size, fill) {}
  static SquareMatrix identity(std::size_t size, double diag = 1.0);

  double& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }

  SquareMatrix& operator+=(const SquareMatrix& o);
  SquareMatrix& operator*=(double s);
  /// this += s * v v'
  void add_outer(const std::vector<double>& v, double s = 1.0);
};

/// Lower Cholesky factor; nullopt when the matrix is not positive definite.
std::optional<SquareMatrix> cholesky(const SquareMatrix& m);

/// log det from a Cholesky factor.
double log_det_from_cholesky(const SquareMatrix& l);

/// |L^{-1} v|^2 = v' M^{-1} v for M = L L'.
double mahalanobis_sq(const SquareMatrix& l, const std::vector<double>& v);

/// Multivariate log-gamma: log Gamma_d(x).
double log_multigamma(double x, std::size_t d);

}  // namespace cogniscope
