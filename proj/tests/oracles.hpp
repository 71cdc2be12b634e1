#pragma once

// Reference computations written from first principles. Nothing here calls
// into the library under test.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline std::vector<cplx> bpsk() { return {{1, 0}, {-1, 0}}; }

inline std::vector<cplx> qpsk() {
  const double h = 1.0 / std::sqrt(2.0);
  return {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
}

inline std::vector<cplx> psk8() {
  std::vector<cplx> out;
  for (int k = 0; k < 8; ++k) out.push_back(std::polar(1.0, k * std::numbers::pi / 4.0));
  return out;
}

inline std::vector<cplx> qam16() {
  std::vector<cplx> out;
  for (int i : {-3, -1, 1, 3})
    for (int q : {-3, -1, 1, 3}) out.emplace_back(i / std::sqrt(10.0), q / std::sqrt(10.0));
  return out;
}

struct Cumulants {
  double c21, c40, c42;
};

// Population cumulants of sqrt(P) * s + CN(0, s2), s uniform over `points`.
inline Cumulants enumerate(const std::vector<cplx>& points, double power, double noise) {
  cplx m20 = 0, m40 = 0;
  double m21 = 0, m42 = 0;
  for (const auto& p0 : points) {
    const cplx p = std::sqrt(power) * p0;
    m20 += p * p;
    m21 += std::norm(p);
    m40 += p * p * p * p;
    m42 += std::norm(p) * std::norm(p);
  }
  const double n = static_cast<double>(points.size());
  m20 /= n;
  m21 /= n;
  m40 /= n;
  m42 /= n;
  const cplx c40 = m40 - 3.0 * m20 * m20;
  const double c42 = m42 - std::norm(m20) - 2.0 * m21 * m21;
  return {m21 + noise, c40.real(), c42};
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Crossing of two Gaussian log-densities N(m0, v0) and N(m1, v1), m0 < m1,
// the root lying between the means.
inline double gaussian_crossing(double m0, double v0, double m1, double v1) {
  // (x-m0)^2/v0 + log v0 = (x-m1)^2/v1 + log v1
  const double a = 1.0 / v0 - 1.0 / v1;
  const double b = -2.0 * (m0 / v0 - m1 / v1);
  const double c = m0 * m0 / v0 - m1 * m1 / v1 + std::log(v0 / v1);
  if (std::abs(a) < 1e-15) return -c / b;
  const double d = std::sqrt(b * b - 4.0 * a * c);
  for (double r : {(-b - d) / (2.0 * a), (-b + d) / (2.0 * a)})
    if (r > m0 && r < m1) return r;
  return (-b + d) / (2.0 * a);
}

}  // namespace oracle
