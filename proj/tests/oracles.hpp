#pragma once

// Polynomial root oracle for checking winding numbers: Durand-Kerner
// iteration on the complete root set, then a count of roots in the right
// half plane. Shares nothing with the contour code it validates.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracles {

using Complex = std::complex<double>;

// Coefficients ascending in degree, matching the rational-expression
// convention elsewhere. Trailing (highest-degree) zeros are trimmed.
inline std::vector<Complex> all_roots(std::vector<Complex> c) {
  while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
  if (c.size() < 2) return {};
  const Complex lead = c.back();
  for (auto& x : c) x /= lead;
  const std::size_t n = c.size() - 1;

  auto eval = [&](Complex z) {
    Complex acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
    return acc;
  };

  // spiral start points, never mutually coincident
  std::vector<Complex> r(n);
  const Complex seed{0.4, 0.9};
  Complex p = 1.0;
  for (auto& z : r) {
    p *= seed;
    z = p;
  }

  for (int it = 0; it < 1000; ++it) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= r[i] - r[j];
      const Complex step = eval(r[i]) / denom;
      r[i] -= step;
      worst = std::max(worst, std::abs(step));
    }
    double scale = 1.0;
    for (const auto& z : r) scale = std::max(scale, std::abs(z));
    if (worst < 1e-12 * scale) break;
  }

  // Steps stagnate at eps^(1/m) around an m-fold root, so the stop above
  // cannot be the acceptance test. Judge by the polynomial residual
  // against a coefficient-magnitude bound instead: clusters sit at tiny
  // residual, an unconverged iterate at order one.
  for (const auto& z : r) {
    double bound = 0.0;
    double zp = 1.0;
    for (const auto& ck : c) {
      bound += std::abs(ck) * zp;
      zp *= std::max(1.0, std::abs(z));
    }
    if (!(std::abs(eval(z)) <= 1e-7 * bound))
      throw std::runtime_error("root iteration did not converge");
  }
  return r;
}

// Roots with real part beyond `margin` count as right-half-plane; a root
// inside the margin band means the test polynomial was chosen badly.
inline int rhp_count(const std::vector<Complex>& coeffs, double margin = 1e-6) {
  int n = 0;
  for (const auto& z : all_roots(coeffs)) {
    if (std::abs(z.real()) < margin)
      throw std::runtime_error("root sits on the imaginary axis margin");
    if (z.real() > 0.0) ++n;
  }
  return n;
}

inline std::vector<Complex> poly_sum(std::vector<Complex> a,
                                     const std::vector<Complex>& b) {
  if (a.size() < b.size()) a.resize(b.size(), Complex{0.0, 0.0});
  for (std::size_t k = 0; k < b.size(); ++k) a[k] += b[k];
  return a;
}

}  // namespace oracles
