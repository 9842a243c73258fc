#pragma once

// Completion and layer stripping carried out in 50-digit arithmetic. Plain
// stripping amplifies rounding roughly geometrically in the degree; for step
// polynomials of degree ~50 double precision loses every digit, while the
// same recursion on exactly consistent (P, Q) data is accurate to the working
// precision.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <cstddef>
#include <string>
#include <vector>

#include "chebyshev.hpp"
#include "error.hpp"
#include "poly.hpp"

namespace qspsem::detail {

using xreal = boost::multiprecision::cpp_bin_float_50;
using xcplx = boost::multiprecision::cpp_complex_50;

struct XNodes {
  std::vector<xreal> x, s;    // nodes and sqrt(1 - x^2)
  std::vector<xreal> table;   // cos(pi t / 2n), t mod 4n
};

inline XNodes x_nodes(std::size_t n) {
  const xreal pi = boost::math::constants::pi<xreal>();
  XNodes g;
  g.x.resize(n);
  g.s.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const xreal th = pi * (xreal(k) + xreal(0.5)) / xreal(n);
    g.x[k] = cos(th);
    g.s[k] = sin(th);
  }
  g.table.resize(4 * n);
  for (std::size_t t = 0; t < 4 * n; ++t) g.table[t] = cos(pi * xreal(t) / xreal(2 * n));
  return g;
}

// j-th Chebyshev coefficient of the interpolant through v at the nodes.
template <class T>
T x_coeff(const XNodes& g, const std::vector<T>& v, std::size_t j) {
  const std::size_t n = v.size(), period = 4 * n;
  T acc = T(0);
  for (std::size_t k = 0; k < n; ++k) acc += v[k] * g.table[(j * (2 * k + 1)) % period];
  acc *= xreal(2) / xreal(n);
  if (j == 0) acc /= 2;
  return acc;
}

template <class T>
std::vector<T> x_fit(const XNodes& g, const std::vector<T>& v, std::size_t len) {
  std::vector<T> c(len);
  for (std::size_t j = 0; j < len; ++j) c[j] = x_coeff(g, v, j);
  return c;
}

template <class T, class X>
X x_eval(const std::vector<T>& c, const X& x) {
  X b1 = X(0), b2 = X(0);
  for (std::size_t k = c.size(); k-- > 1;) {
    X b0 = xreal(2) * x * b1 - b2 + X(c[k]);
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + X(c.empty() ? T(0) : c[0]);
}

template <class T>
std::vector<T> x_derivative(const std::vector<T>& c) {
  const std::size_t n = c.size();
  if (n <= 1) return {T(0)};
  std::vector<T> d(n - 1, T(0));
  for (std::size_t k = n - 1; k-- > 0;) d[k] = (k + 2 < n - 1 ? d[k + 2] : T(0)) + xreal(2 * (k + 1)) * c[k + 1];
  d[0] /= 2;
  return d;
}

struct XPair {
  std::vector<xreal> p;  // Chebyshev coefficients, |P(+-1)| = 1 exactly
  std::vector<xcplx> q;
};

// Completion of a real parity-definite P (degree >= 2) with roots seeded by the
// double-precision selection and polished in extended precision.
inline XPair x_complete(const ChebPoly& p_in, int d) {
  const auto seeds = complement_roots(p_in, d);
  XPair out;
  out.p.resize(static_cast<std::size_t>(d) + 1);
  for (std::size_t k = 0; k < out.p.size(); ++k) out.p[k] = xreal(p_in.coeffs[k].real());
  const xreal end = abs(x_eval(out.p, xreal(1)));
  for (auto& c : out.p) c /= end;

  const std::size_t n = static_cast<std::size_t>(2 * d + 8);
  const auto g = x_nodes(n);
  std::vector<xreal> rv(n);
  for (std::size_t k = 0; k < n; ++k) {
    const xreal pv = x_eval(out.p, g.x[k]);
    rv[k] = (1 - pv * pv) / (g.s[k] * g.s[k]);
  }
  const auto rc = x_fit(g, rv, static_cast<std::size_t>(2 * d - 1));
  const auto d1 = x_derivative(rc), d2 = x_derivative(d1);

  std::vector<xcplx> roots;
  const xreal stop = xreal(1e-45);
  for (std::size_t i = 0; i < seeds.roots.size(); ++i) {
    const bool twice = seeds.mult[i] == 2;
    const bool on_imag = twice && seeds.roots[i].real() == 0.0;
    const auto& f0 = twice ? d1 : rc;
    const auto& f1 = twice ? d2 : d1;
    xcplx r(xreal(seeds.roots[i].real()), xreal(seeds.roots[i].imag()));
    for (int it = 0; it < 60; ++it) {
      xcplx step = x_eval(f0, r) / x_eval(f1, r);
      if (twice) step = on_imag ? xcplx(0, step.imag()) : xcplx(step.real(), 0);
      r -= step;
      if (abs(step) <= stop * (1 + abs(r))) break;
    }
    roots.push_back(r);
  }

  std::vector<xcplx> qv(n);
  xreal num = 0, den = 0;
  for (std::size_t k = 0; k < n; ++k) {
    xcplx v(1);
    for (const auto& r : roots) v *= xcplx(g.x[k]) - r;
    qv[k] = v;
    num += rv[k];
    den += norm(v);
  }
  const xreal c = sqrt(num / den);
  for (auto& v : qv) v *= c;
  out.q = x_fit(g, qv, static_cast<std::size_t>(d));
  for (std::size_t k = (d % 2 == 0) ? 0 : 1; k < out.q.size(); k += 2) out.q[k] = xcplx(0);
  return out;
}

inline double x_identity_residual(const XPair& t) {
  xreal worst = 0;
  for (double xd : cheb::lobatto(201)) {
    const xreal x(xd);
    const xreal pv = x_eval(t.p, x);
    const xreal v = abs(pv * pv + (1 - x * x) * norm(x_eval(t.q, xcplx(x))) - 1);
    if (v > worst) worst = v;
  }
  return static_cast<double>(worst);
}

inline xreal x_reduce(xreal phi) {
  const xreal pi = boost::math::constants::pi<xreal>();
  phi -= pi * floor((phi + pi / 2) / pi);
  return phi;
}

// Leading-ratio stripping: e^{2 i phi} = Q_{k-1} / (2 P_k) in Chebyshev
// coefficients, then U <- W^dag e^{-i phi Z} U e^{i phi Z} W^dag.
inline std::vector<double> x_strip(const XPair& t, int d) {
  const std::size_t n = static_cast<std::size_t>(std::max(2 * d + 4, 8));
  const auto g = x_nodes(n);
  const xcplx i1(0, 1);
  std::vector<xcplx> a(n), b(n), c(n), e(n);  // [[a, b], [c, e]] per node
  for (std::size_t k = 0; k < n; ++k) {
    const xcplx pv(x_eval(t.p, g.x[k])), qv = x_eval(t.q, xcplx(g.x[k]));
    a[k] = pv;
    b[k] = i1 * g.s[k] * qv;
    c[k] = i1 * g.s[k] * conj(qv);
    e[k] = conj(pv);
  }
  std::vector<double> half;
  std::vector<xcplx> pv(n), qv(n);
  int deg = d;
  while (deg >= 2) {
    for (std::size_t k = 0; k < n; ++k) pv[k] = a[k], qv[k] = b[k] / (i1 * g.s[k]);
    const xcplx lead_p = x_coeff(g, pv, static_cast<std::size_t>(deg));
    const xcplx lead_q = x_coeff(g, qv, static_cast<std::size_t>(deg - 1));
    if (abs(lead_p) == 0) throw NumericError("extended stripping: vanishing leading coefficient", static_cast<int>(half.size()));
    const xreal phi = x_reduce(arg(lead_q / (2 * lead_p)) / 2);
    half.push_back(static_cast<double>(phi));
    const xcplx u(cos(2 * phi), -sin(2 * phi));  // e^{-2 i phi}
    for (std::size_t k = 0; k < n; ++k) {
      // M = e^{-i phi Z} U e^{i phi Z}; V = W^dag M W^dag, W^dag = [[x, -is], [-is, x]].
      const xcplx m00 = a[k], m01 = b[k] * u, m10 = c[k] * conj(u), m11 = e[k];
      const xcplx x(g.x[k]), ms = -i1 * g.s[k];
      const xcplx t00 = x * m00 + ms * m10, t01 = x * m01 + ms * m11;
      const xcplx t10 = ms * m00 + x * m10, t11 = ms * m01 + x * m11;
      a[k] = t00 * x + t01 * ms;
      b[k] = t00 * ms + t01 * x;
      c[k] = t10 * x + t11 * ms;
      e[k] = t10 * ms + t11 * x;
    }
    deg -= 2;
  }
  if (deg == 1) {
    xcplx mean(0);
    for (std::size_t k = 0; k < n; ++k) mean += b[k] / (i1 * g.s[k]);
    half.push_back(static_cast<double>(x_reduce(arg(mean) / 2)));
  }
  return half;
}

}  // namespace qspsem::detail
