#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace qspsem {

using cplx = std::complex<double>;

namespace cheb {

// First-kind Chebyshev nodes cos(pi (k + 1/2) / n), k = 0..n-1 (descending).
inline std::vector<double> nodes(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
  return x;
}

// Chebyshev-Lobatto points cos(pi k / (n-1)), endpoints included.
inline std::vector<double> lobatto(std::size_t n) {
  if (n == 1) return {1.0};
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
  return x;
}

// Coefficients of the degree n-1 interpolant through values sampled at nodes(n).
template <class T>
std::vector<T> fit(const std::vector<T>& v) {
  const std::size_t n = v.size();
  std::vector<T> c(n, T{});
  if (n == 0) return c;
  // cos(pi j (2k+1) / 2n) from a table indexed mod 4n keeps the angles exact.
  const std::size_t period = 4 * n;
  std::vector<double> table(period);
  for (std::size_t t = 0; t < period; ++t)
    table[t] = std::cos(std::numbers::pi * static_cast<double>(t) / static_cast<double>(2 * n));
  for (std::size_t j = 0; j < n; ++j) {
    T acc{};
    for (std::size_t k = 0; k < n; ++k) acc += v[k] * table[(j * (2 * k + 1)) % period];
    c[j] = acc * (2.0 / static_cast<double>(n));
  }
  c[0] *= 0.5;
  return c;
}

// Clenshaw recurrence; X may be complex.
template <class T, class X = double>
auto eval(const std::vector<T>& c, X x) {
  using R = decltype(T{} * x);
  R b1{}, b2{};
  for (std::size_t k = c.size(); k-- > 1;) {
    R b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  if (c.empty()) return R{};
  return R(x * b1 - b2 + c[0]);
}

// Coefficients of f'.
template <class T>
std::vector<T> derivative(const std::vector<T>& c) {
  const std::size_t n = c.size();
  if (n <= 1) return {T{}};
  std::vector<T> d(n - 1, T{});
  for (std::size_t k = n - 1; k-- > 0;) {
    d[k] = (k + 2 < n - 1 ? d[k + 2] : T{}) + 2.0 * static_cast<double>(k + 1) * c[k + 1];
  }
  d[0] *= 0.5;
  return d;
}

template <class T>
std::vector<T> to_monomial(const std::vector<T>& c) {
  const std::size_t n = c.size();
  std::vector<T> out(n, T{});
  if (n == 0) return out;
  std::vector<double> prev(n, 0.0), cur(n, 0.0), next(n, 0.0);
  prev[0] = 1.0;  // T0
  out[0] += c[0];
  if (n == 1) return out;
  cur[1] = 1.0;  // T1
  out[1] += c[1];
  for (std::size_t k = 2; k < n; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) next[j + 1] += 2.0 * cur[j];
    for (std::size_t j = 0; j + 1 < k; ++j) next[j] -= prev[j];
    for (std::size_t j = 0; j <= k; ++j) out[j] += c[k] * next[j];
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return out;
}

// x * f for f in Chebyshev form.
template <class T>
std::vector<T> times_x(const std::vector<T>& c) {
  std::vector<T> out(c.size() + 1, T{});
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == 0) {
      out[1] += c[0];
    } else {
      out[j + 1] += 0.5 * c[j];
      out[j - 1] += 0.5 * c[j];
    }
  }
  return out;
}

template <class T>
std::vector<T> from_monomial(const std::vector<T>& a) {
  std::vector<T> r;
  for (std::size_t k = a.size(); k-- > 0;) {
    r = times_x(r);
    if (r.empty()) r.push_back(T{});
    r[0] += a[k];
  }
  return r;
}

// Product via T_j T_k = (T_{j+k} + T_{|j-k|}) / 2.
template <class T>
std::vector<T> multiply(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<T> out(a.size() + b.size() - 1, T{});
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t k = 0; k < b.size(); ++k) {
      T h = 0.5 * a[j] * b[k];
      out[j + k] += h;
      out[j > k ? j - k : k - j] += h;
    }
  return out;
}

}  // namespace cheb

// Polynomial held in the Chebyshev basis; used where monomial coefficients
// would lose precision (degrees beyond ~20).
struct ChebPoly {
  std::vector<cplx> coeffs;

  ChebPoly() = default;
  explicit ChebPoly(std::vector<cplx> c) : coeffs(std::move(c)) {}

  cplx operator()(double x) const { return cheb::eval(coeffs, x); }

  // Highest index whose coefficient exceeds rel * max |c|.
  int degree(double rel = 1e-12) const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c));
    if (m == 0.0) return 0;
    for (std::size_t k = coeffs.size(); k-- > 0;)
      if (std::abs(coeffs[k]) > rel * m) return static_cast<int>(k);
    return 0;
  }

  double max_imag() const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c.imag()));
    return m;
  }

  static ChebPoly interpolate(const std::vector<cplx>& values_at_nodes) {
    return ChebPoly(cheb::fit(values_at_nodes));
  }

  // Samples f at nodes(n) and interpolates.
  template <class F>
  static ChebPoly sample(F&& f, std::size_t n) {
    auto x = cheb::nodes(n);
    std::vector<cplx> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = f(x[k]);
    return interpolate(v);
  }

  ChebPoly truncated(std::size_t len) const {
    ChebPoly r = *this;
    r.coeffs.resize(std::max<std::size_t>(len, 1));
    return r;
  }
};

}  // namespace qspsem
