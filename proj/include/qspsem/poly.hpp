#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "chebyshev.hpp"
#include "error.hpp"

namespace qspsem {

enum class Parity { Even, Odd, Indefinite };

inline const char* to_string(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    default: return "indefinite";
  }
}

// Monomial-basis polynomial; coeffs[k] multiplies x^k.
struct ComplexPoly {
  std::vector<cplx> coeffs;

  ComplexPoly() : coeffs{0.0} {}
  ComplexPoly(std::initializer_list<cplx> c) : coeffs(c) {
    if (coeffs.empty()) coeffs.push_back(0.0);
  }
  explicit ComplexPoly(std::vector<cplx> c) : coeffs(std::move(c)) {
    if (coeffs.empty()) coeffs.push_back(0.0);
  }
  static ComplexPoly real(const std::vector<double>& c) {
    return ComplexPoly(std::vector<cplx>(c.begin(), c.end()));
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c));
    return m;
  }

  // Highest index with |c_k| > 1e-12 relative to the largest coefficient.
  int degree() const {
    const double m = max_abs();
    if (m == 0.0) return 0;
    for (std::size_t k = coeffs.size(); k-- > 0;)
      if (std::abs(coeffs[k]) > 1e-12 * m) return static_cast<int>(k);
    return 0;
  }

  ComplexPoly normalized() const {
    ComplexPoly r = *this;
    r.coeffs.resize(static_cast<std::size_t>(degree()) + 1);
    return r;
  }

  cplx coeff(std::size_t k) const { return k < coeffs.size() ? coeffs[k] : cplx{}; }
  cplx leading() const { return coeffs[static_cast<std::size_t>(degree())]; }

  cplx operator()(cplx x) const {
    cplx r{};
    for (std::size_t k = coeffs.size(); k-- > 0;) r = r * x + coeffs[k];
    return r;
  }
  cplx operator()(double x) const { return (*this)(cplx(x, 0.0)); }

  ComplexPoly conj() const {
    ComplexPoly r = *this;
    for (auto& c : r.coeffs) c = std::conj(c);
    return r;
  }

  bool is_real(double tol = 1e-10) const {
    return std::all_of(coeffs.begin(), coeffs.end(),
                       [&](const cplx& c) { return std::abs(c.imag()) <= tol; });
  }

  ChebPoly to_cheb() const { return ChebPoly(cheb::from_monomial(coeffs)); }
  static ComplexPoly from_cheb(const ChebPoly& p) {
    return ComplexPoly(cheb::to_monomial(p.coeffs));
  }
};

inline ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b) {
  std::vector<cplx> c(std::max(a.coeffs.size(), b.coeffs.size()));
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(k) + b.coeff(k);
  return ComplexPoly(std::move(c));
}

inline ComplexPoly operator*(cplx s, const ComplexPoly& a) {
  ComplexPoly r = a;
  for (auto& c : r.coeffs) c *= s;
  return r;
}

inline ComplexPoly operator-(const ComplexPoly& a, const ComplexPoly& b) {
  return a + cplx(-1.0) * b;
}

// Max-norm distance between coefficient vectors.
inline double coeff_distance(const ComplexPoly& a, const ComplexPoly& b) {
  double m = 0.0;
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(a.coeff(k) - b.coeff(k)));
  return m;
}

inline ComplexPoly multiply(const ComplexPoly& f, const ComplexPoly& g) {
  std::vector<cplx> c(f.coeffs.size() + g.coeffs.size() - 1, cplx{});
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    for (std::size_t j = 0; j < g.coeffs.size(); ++j) c[i + j] += f.coeffs[i] * g.coeffs[j];
  return ComplexPoly(std::move(c));
}

inline ComplexPoly linear_combine(cplx alpha, const ComplexPoly& f, cplx beta, const ComplexPoly& g,
                                  bool norm_preserving = false) {
  if (norm_preserving && std::abs(alpha) + std::abs(beta) > 1.0 + 1e-15)
    throw ArgumentError("linear_combine: |alpha| + |beta| exceeds 1");
  return alpha * f + beta * g;
}

// g(f(x)) by Horner accumulation over the coefficients of g.
inline ComplexPoly compose(const ComplexPoly& g, const ComplexPoly& f) {
  ComplexPoly r{g.coeffs.back()};
  for (std::size_t k = g.coeffs.size() - 1; k-- > 0;) {
    r = multiply(r, f);
    r.coeffs[0] += g.coeffs[k];
  }
  return r;
}

inline Parity parity(const ComplexPoly& f, double tol = 1e-10) {
  bool even = true, odd = true;
  for (std::size_t k = 0; k < f.coeffs.size(); ++k) {
    if (std::abs(f.coeffs[k]) <= tol) continue;
    if (k % 2) even = false;
    else odd = false;
  }
  if (even) return Parity::Even;  // the zero polynomial counts as even
  if (odd) return Parity::Odd;
  return Parity::Indefinite;
}

inline Parity parity(const ChebPoly& f, double tol = 1e-10) {
  return parity(ComplexPoly(f.coeffs), tol);  // T_k has the parity of k
}

namespace detail {

// Max of |f| over a Lobatto grid, then golden-section refinement around the best point.
template <class F>
double refined_max_abs(F&& f, std::size_t grid) {
  auto x = cheb::lobatto(grid);
  std::size_t best = 0;
  double bv = -1.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double v = std::abs(f(x[k]));
    if (v > bv) bv = v, best = k;
  }
  double a = best + 1 < x.size() ? x[best + 1] : x[best];
  double b = best > 0 ? x[best - 1] : x[best];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
    double c1 = b - g * (b - a), c2 = a + g * (b - a);
    double v1 = std::abs(f(c1)), v2 = std::abs(f(c2));
    bv = std::max({bv, v1, v2});
    if (v1 > v2) b = c2;
    else a = c1;
  }
  return bv;
}

}  // namespace detail

inline double sup_norm(const ComplexPoly& f, int grid) {
  if (grid < 4 * f.degree() || grid < 2) throw ArgumentError("sup_norm: grid must be at least 4*deg(f)");
  return detail::refined_max_abs([&](double x) { return f(x); }, static_cast<std::size_t>(grid));
}

inline double sup_norm(const ChebPoly& f, int grid) {
  if (grid < 4 * f.degree() || grid < 2) throw ArgumentError("sup_norm: grid must be at least 4*deg(f)");
  return detail::refined_max_abs([&](double x) { return f(x); }, static_cast<std::size_t>(grid));
}

// Coefficients of z^k for k = -m..m, stored at index k + m.
struct LaurentPoly {
  int m = 0;
  std::vector<cplx> coeffs{cplx{}};

  cplx coeff(int k) const {
    return (k < -m || k > m) ? cplx{} : coeffs[static_cast<std::size_t>(k + m)];
  }
  cplx operator()(cplx z) const {
    cplx r{};
    for (int k = m; k >= -m; --k) r += coeff(k) * std::pow(z, k);
    return r;
  }
  bool is_real_on_circle(double tol = 1e-10) const {
    for (int k = 0; k <= m; ++k)
      if (std::abs(coeff(-k) - std::conj(coeff(k))) > tol) return false;
    return true;
  }
};

// 1 - P((z + 1/z)/2)^2 in powers of z.
inline LaurentPoly to_laurent(const ComplexPoly& p) {
  auto c = cheb::from_monomial(p.normalized().coeffs);
  auto sq = cheb::multiply(c, c);
  LaurentPoly out;
  out.m = static_cast<int>(sq.size()) - 1;
  out.coeffs.assign(2 * sq.size() - 1, cplx{});
  // T_k -> (z^k + z^-k)/2
  for (std::size_t k = 0; k < sq.size(); ++k) {
    const int i = static_cast<int>(k);
    if (k == 0) {
      out.coeffs[static_cast<std::size_t>(out.m)] -= sq[0];
    } else {
      out.coeffs[static_cast<std::size_t>(out.m + i)] -= 0.5 * sq[k];
      out.coeffs[static_cast<std::size_t>(out.m - i)] -= 0.5 * sq[k];
    }
  }
  out.coeffs[static_cast<std::size_t>(out.m)] += 1.0;
  return out;
}

struct RootMultiset {
  struct Root {
    cplx value;
    int multiplicity;
  };
  std::vector<Root> roots;
  bool closed_under_negation = false;
  bool closed_under_conjugation = false;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& r : roots) n += static_cast<std::size_t>(r.multiplicity);
    return n;
  }
  std::vector<cplx> flat() const {
    std::vector<cplx> v;
    for (const auto& r : roots)
      for (int k = 0; k < r.multiplicity; ++k) v.push_back(r.value);
    return v;
  }
};

namespace detail {

inline cplx horner(const std::vector<cplx>& a, cplx z) {
  cplx r{};
  for (std::size_t k = a.size(); k-- > 0;) r = r * z + a[k];
  return r;
}

// Companion-matrix eigenvalues followed by Aberth sweeps; a is monomial, a.back() != 0.
inline std::vector<cplx> raw_roots(const std::vector<cplx>& a, int sweeps = 20) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -a[static_cast<std::size_t>(i)] / a.back();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericError("roots: companion eigensolver did not converge");
  std::vector<cplx> z(es.eigenvalues().data(), es.eigenvalues().data() + n);

  std::vector<cplx> da(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) da[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * a[static_cast<std::size_t>(k)];
  for (int s = 0; s < sweeps; ++s) {
    double moved = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx f = horner(a, z[i]), fp = horner(da, z[i]);
      if (f == cplx{}) continue;
      cplx ratio = f / fp;
      cplx sum{};
      for (int j = 0; j < n; ++j)
        if (j != i && z[i] != z[j]) sum += 1.0 / (z[i] - z[j]);
      cplx step = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
      cplx cand = z[i] - step;
      if (std::abs(horner(a, cand)) <= std::abs(f)) {
        z[i] = cand;
        moved = std::max(moved, std::abs(step) / std::max(1.0, std::abs(cand)));
      }
    }
    if (moved < 1e-16) break;
  }
  return z;
}

inline bool multiset_match(const std::vector<cplx>& a, std::vector<cplx> b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const cplx& u, const cplx& v) { return std::abs(u - x) < std::abs(v - x); });
    if (it == b.end() || std::abs(*it - x) > tol * std::max(1.0, std::abs(x))) return false;
    b.erase(it);
  }
  return true;
}

}  // namespace detail

inline RootMultiset roots(const ComplexPoly& f) {
  auto g = f.normalized();
  if (g.degree() < 1) throw ArgumentError("roots: degree must be at least 1");
  auto z = detail::raw_roots(g.coeffs);
  const double scale = g.max_abs();
  for (const auto& r : z)
    if (std::abs(g(r)) > 1e-8 * scale * std::max(1.0, std::pow(std::abs(r), g.degree())))
      throw NumericError("roots: residual above 1e-8 after refinement");

  RootMultiset out;
  std::vector<bool> used(z.size(), false);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (used[i]) continue;
    cplx sum = z[i];
    int mult = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < z.size(); ++j)
      if (!used[j] && std::abs(z[j] - z[i]) <= 1e-7 * std::max(1.0, std::abs(z[i]))) {
        used[j] = true;
        sum += z[j];
        ++mult;
      }
    out.roots.push_back({sum / static_cast<double>(mult), mult});
  }
  // Cluster means: a multiple root splits by ~eps^(1/mult), its mean does not.
  const auto c = out.flat();
  std::vector<cplx> neg, cj;
  for (const auto& r : c) neg.push_back(-r), cj.push_back(std::conj(r));
  out.closed_under_negation = detail::multiset_match(c, neg, 1e-8);
  out.closed_under_conjugation = detail::multiset_match(c, cj, 1e-8);
  return out;
}

namespace detail {

// Checks shared by completion and synthesis of real targets.
inline void require_completable(const ChebPoly& p) {
  if (p.max_imag() > 1e-10) throw PreconditionError("target violates the reality condition: P must have real coefficients");
  if (parity(p) == Parity::Indefinite)
    throw PreconditionError("target violates the parity condition: P must have definite parity");
  const int d = p.degree();
  if (sup_norm(p, std::max(64, 8 * d)) > 1.0 + 1e-10)
    throw PreconditionError("target violates the boundedness condition: |P(x)| <= 1 on [-1,1]");
  if (std::abs(std::abs(p(1.0)) - 1.0) > 1e-8 || std::abs(std::abs(p(-1.0)) - 1.0) > 1e-8)
    throw PreconditionError("target violates the endpoint condition |P(+-1)| = 1");
}

}  // namespace detail

namespace detail {

struct ComplementRoots {
  std::vector<cplx> roots;  // x-roots of Q, one per factor
  std::vector<int> mult;    // 2 for coincident pairs on an axis
};

// Root selection for the completion of a real, parity-definite P of degree d >= 2.
inline ComplementRoots complement_roots(const ChebPoly& p, int d) {
  const int m = 2 * d - 2;
  const std::size_t n = static_cast<std::size_t>(2 * d + 8);
  auto x = cheb::nodes(n);
  std::vector<cplx> rv(n);
  for (std::size_t k = 0; k < n; ++k) {
    double pv = p(x[k]).real();
    rv[k] = (1.0 - pv) * (1.0 + pv) / ((1.0 - x[k]) * (1.0 + x[k]));
  }
  auto rc = cheb::fit(rv);
  rc.resize(static_cast<std::size_t>(m) + 1);
  for (std::size_t k = 1; k < rc.size(); k += 2) rc[k] = 0.0;

  std::vector<cplx> zc(static_cast<std::size_t>(2 * m) + 1, cplx{});
  zc[static_cast<std::size_t>(m)] = rc[0].real();
  for (int k = 1; k <= m; ++k) {
    zc[static_cast<std::size_t>(m + k)] = 0.5 * rc[static_cast<std::size_t>(k)].real();
    zc[static_cast<std::size_t>(m - k)] = 0.5 * rc[static_cast<std::size_t>(k)].real();
  }
  if (std::abs(zc.back()) == 0.0)
    throw NumericError("completion: degree of (1-P^2)/(1-x^2) dropped");
  auto zr = raw_roots(zc);

  std::vector<cplx> xr;
  std::vector<double> circle;
  for (const auto& z : zr) {
    const double r = std::abs(z);
    if (std::abs(r - 1.0) <= 1e-6) circle.push_back(z.real() / r);
    else if (r < 1.0) xr.push_back(0.5 * (z + 1.0 / z));
  }
  std::sort(circle.begin(), circle.end());
  for (std::size_t k = 0; k + 1 < circle.size(); k += 2) xr.push_back(0.5 * (circle[k] + circle[k + 1]));
  if (circle.size() % 2 != 0 || static_cast<int>(xr.size()) != m)
    throw NumericError("completion: Laurent roots do not split into reciprocal pairs");

  std::vector<cplx> sel;
  std::vector<int> mult;
  std::vector<double> on_real, on_imag;
  for (const auto& r : xr) {
    const double tol = 1e-6 * std::max(1.0, std::abs(r));
    if (std::abs(r.imag()) <= tol) on_real.push_back(r.real());
    else if (std::abs(r.real()) <= tol) on_imag.push_back(r.imag());
    else if (r.real() * r.imag() > 0) sel.push_back(r), mult.push_back(1);
  }
  auto pair_up = [&](std::vector<double>& v, bool imag) {
    std::sort(v.begin(), v.end());
    if (v.size() % 2)
      throw PreconditionError("target violates the root-pairing condition: root multiset of F(z) not closed under negation");
    for (std::size_t k = 0; k < v.size(); k += 2) {
      if (std::abs(v[k] - v[k + 1]) > 1e-4 * std::max(1.0, std::abs(v[k])))
        throw PreconditionError("target violates the root-pairing condition: root multiset of F(z) not closed under negation");
      const double mid = 0.5 * (v[k] + v[k + 1]);
      sel.push_back(imag ? cplx(0.0, mid) : cplx(mid, 0.0));
      mult.push_back(2);
    }
  };
  pair_up(on_real, false);
  pair_up(on_imag, true);
  if (static_cast<int>(sel.size()) != d - 1)
    throw PreconditionError("target violates the root-pairing condition: root multiset of F(z) not closed under negation");

  // Double roots (where P^2 touches 1) are only resolved to ~sqrt(eps) by the
  // eigensolver; they are simple roots of R', so Newton on R' polishes them.
  {
    std::vector<cplx> rcc(rc.begin(), rc.end());
    auto d1 = cheb::derivative(rcc);
    auto d2 = cheb::derivative(d1);
    for (std::size_t i = 0; i < sel.size(); ++i) {
      const auto& f0 = mult[i] == 2 ? d1 : rcc;
      const auto& f1 = mult[i] == 2 ? d2 : d1;
      for (int it = 0; it < 8; ++it) {
        cplx f = cheb::eval(f0, sel[i]), fp = cheb::eval(f1, sel[i]);
        if (f == cplx{} || fp == cplx{}) break;
        cplx cand = sel[i] - f / fp;
        if (mult[i] == 2) cand = sel[i].imag() == 0.0 ? cplx(cand.real(), 0.0) : cplx(0.0, cand.imag());
        if (!(std::abs(cheb::eval(f0, cand)) < std::abs(f))) break;
        sel[i] = cand;
      }
    }
  }

  return {std::move(sel), std::move(mult)};
}

}  // namespace detail

// Complementary polynomial Q with P^2 + (1-x^2)|Q|^2 = 1, parity deg(P)-1.
//
// R = (1-P^2)/(1-x^2) is factored in the Laurent picture z^m R((z+1/z)/2);
// the inside-circle half of its roots gives the x-roots of R. Q takes one
// member of every conjugate pair, choosing the first/third quadrant so the
// selection is closed under negation; roots on an axis must come in
// coincident pairs, otherwise no parity-definite Q exists.
inline ChebPoly fejer_riesz_complete(const ChebPoly& p_in) {
  detail::require_completable(p_in);
  const int d = p_in.degree();
  ChebPoly p = p_in.truncated(static_cast<std::size_t>(d) + 1);
  for (auto& c : p.coeffs) c = c.real();
  if (d == 0) return ChebPoly({cplx{}});
  if (d == 1) return ChebPoly({cplx(std::abs(p.coeffs[1].real()), 0.0)});

  const std::size_t n = static_cast<std::size_t>(2 * d + 8);
  auto x = cheb::nodes(n);
  std::vector<cplx> rv(n);
  for (std::size_t k = 0; k < n; ++k) {
    double pv = p(x[k]).real();
    rv[k] = (1.0 - pv) * (1.0 + pv) / ((1.0 - x[k]) * (1.0 + x[k]));
  }
  const auto sel = detail::complement_roots(p, d).roots;

  std::vector<cplx> qv(n);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx v = 1.0;
    for (const auto& r : sel) v *= x[k] - r;
    qv[k] = v;
    num += rv[k].real();
    den += std::norm(v);
  }
  const double c = std::sqrt(num / den);
  for (auto& v : qv) v *= c;
  auto qc = cheb::fit(qv);
  qc.resize(static_cast<std::size_t>(d));
  for (std::size_t k = (d % 2 == 0) ? 0 : 1; k < qc.size(); k += 2) qc[k] = 0.0;
  ChebPoly q(qc);

  auto g = cheb::lobatto(201);
  double worst = 0.0;
  for (double xx : g) {
    double pv = p(xx).real();
    worst = std::max(worst, std::abs(pv * pv + (1 - xx * xx) * std::norm(q(xx)) - 1.0));
  }
  if (worst > 1e-8) throw NumericError("completion: determinantal identity residual " + std::to_string(worst));
  return q;
}

inline ComplexPoly fejer_riesz_complete(const ComplexPoly& p) {
  return ComplexPoly::from_cheb(fejer_riesz_complete(p.to_cheb())).normalized();
}

namespace detail {

// Gauss-Legendre rule on [a, b] by Golub-Welsch.
inline void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v = es.eigenvectors()(0, k);
    x[static_cast<std::size_t>(k)] = 0.5 * (b - a) * es.eigenvalues()(k) + 0.5 * (b + a);
    w[static_cast<std::size_t>(k)] = (b - a) * v * v;
  }
}

template <class T>
std::vector<T> antiderivative(const std::vector<T>& c) {
  std::vector<T> out(c.size() + 1, T{});
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == 0) {
      out[1] += c[0];
    } else if (k == 1) {
      out[2] += 0.25 * c[1];
    } else {
      out[k + 1] += c[k] / (2.0 * static_cast<double>(k + 1));
      out[k - 1] -= c[k] / (2.0 * static_cast<double>(k - 1));
    }
  }
  out[0] -= cheb::eval(out, 0.0);
  return out;
}

// Even polynomial g of degree 2n maximizing int_{-delta}^{delta} g^2 / int_{-1}^{1} g^2.
// Returns the Chebyshev coefficients of g and the leaked fraction 1 - lambda_max.
inline std::vector<double> concentrated_window(int n, double delta, double& leak) {
  const int m = n + 1;
  std::vector<double> xa, wa, xb, wb;
  gauss_legendre(2 * n + 2, 0.0, delta, xa, wa);
  gauss_legendre(2 * n + 2, 0.0, 1.0, xb, wb);
  auto gram = [&](const std::vector<double>& x, const std::vector<double>& w) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t q = 0; q < x.size(); ++q) {
      Eigen::VectorXd t(m);
      const double th = std::acos(std::clamp(x[q], -1.0, 1.0));
      for (int i = 0; i < m; ++i) t(i) = std::cos(2.0 * i * th);
      g += w[q] * t * t.transpose();
    }
    return g;
  };
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(xa, wa), gram(xb, wb));
  leak = 1.0 - es.eigenvalues()(m - 1);
  std::vector<double> c(static_cast<std::size_t>(2 * n + 1), 0.0);
  for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(2 * i)] = es.eigenvectors()(i, m - 1);
  return c;
}

// P(x) = int_0^x g^2 / int_0^1 g^2 for the window of half-degree n.
inline std::vector<double> integrated_window(int n, double delta, double& leak) {
  auto g = concentrated_window(n, delta, leak);
  auto p = antiderivative(cheb::multiply(g, g));
  const double norm = cheb::eval(p, 1.0);
  for (auto& v : p) v /= norm;
  for (std::size_t k = 0; k < p.size(); k += 2) p[k] = 0.0;
  return p;
}

inline bool step_meets(const std::vector<double>& c, double delta, double eps) {
  const int samples = 1000;
  for (int i = 0; i <= samples; ++i) {
    double x = delta + (1.0 - delta) * i / samples;
    if (std::abs(cheb::eval(c, x) - 1.0) > eps) return false;
  }
  for (double x : cheb::lobatto(4 * c.size() + 16))
    if (std::abs(cheb::eval(c, x)) > 1.0 + 1e-13) return false;
  return true;
}

}  // namespace detail

// Odd real step polynomial: |f| <= 1 on [-1,1], f(+-1) = +-1, |f(x) - 1| <= eps
// on [delta, 1]. f is the normalized integral of g^2 where g is the even
// polynomial whose energy is most concentrated on [-delta, delta]; f is
// monotone on the whole real line, so |f| >= 1 outside [-1,1] as completion
// requires. The leaked energy fraction equals 1 - f(delta).
inline ChebPoly approx_step(double delta, double eps, int degree_cap = 4000) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("approx_step: delta must lie in (0,1)");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("approx_step: eps must lie in (0,1)");

  auto ok = [&](int n, std::vector<double>& out) {
    if (4 * n + 1 > degree_cap) throw CapacityError("approx_step: tolerance infeasible below the degree cap");
    double leak = 1.0;
    auto c = detail::integrated_window(n, delta, leak);
    if (!(leak <= eps) || !detail::step_meets(c, delta, eps)) return false;
    out = std::move(c);
    return true;
  };

  std::vector<double> best;
  int lo = 0, hi = 1;
  while (!ok(hi, best)) lo = hi, hi *= 2;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    std::vector<double> c;
    if (ok(mid, c)) hi = mid, best = std::move(c);
    else lo = mid;
  }
  return ChebPoly(std::vector<cplx>(best.begin(), best.end()));
}

}  // namespace qspsem
