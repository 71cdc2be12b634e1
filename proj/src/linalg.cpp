#include "cogniscope/linalg.hpp"

#include <cmath>
#include <numbers>

namespace cogniscope {

SquareMatrix SquareMatrix::identity(std::size_t size, double diag) {
  SquareMatrix m(size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = diag;
  return m;
}

SquareMatrix& SquareMatrix::operator+=(const SquareMatrix& o) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
  return *this;
}

SquareMatrix& SquareMatrix::operator*=(double s) {
  for (double& v : a) v *= s;
  return *this;
}

void SquareMatrix::add_outer(const std::vector<double>& v, double s) {
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a[r * n + c] += s * v[r] * v[c];
}

std::optional<SquareMatrix> cholesky(const SquareMatrix& m) {
  SquareMatrix l(m.n);
  for (std::size_t j = 0; j < m.n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < m.n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

double log_det_from_cholesky(const SquareMatrix& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.n; ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

double mahalanobis_sq(const SquareMatrix& l, const std::vector<double>& v) {
  std::vector<double> z(l.n);
  double q = 0.0;
  for (std::size_t i = 0; i < l.n; ++i) {
    double s = v[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z[k];
    z[i] = s / l(i, i);
    q += z[i] * z[i];
  }
  return q;
}

double log_multigamma(double x, std::size_t d) {
  double s = 0.25 * static_cast<double>(d * (d - 1)) * std::log(std::numbers::pi);
  for (std::size_t j = 1; j <= d; ++j) s += std::lgamma(x + 0.5 * (1.0 - static_cast<double>(j)));
  return s;
}

}  // namespace cogniscope
