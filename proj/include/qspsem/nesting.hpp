#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chebyshev.hpp"
#include "error.hpp"
#include "qsp.hpp"

namespace qspsem {

// Outer protocol whose every oracle slot holds the inner protocol. Either side
// may itself be a nest: a nested outer means its own leaf oracles are
// replaced, so (a o b) o c and a o (b o c) are both expressible.
struct NestedProtocol {
  using Side = std::variant<PhaseList, std::shared_ptr<const NestedProtocol>>;
  Side outer;
  Side inner;

  NestedProtocol(PhaseList o, PhaseList i) : outer(std::move(o)), inner(std::move(i)) {}
  NestedProtocol(PhaseList o, NestedProtocol i) : outer(std::move(o)), inner(wrap(std::move(i))) {}
  NestedProtocol(NestedProtocol o, PhaseList i) : outer(wrap(std::move(o))), inner(std::move(i)) {}
  NestedProtocol(NestedProtocol o, NestedProtocol i) : outer(wrap(std::move(o))), inner(wrap(std::move(i))) {}

 private:
  static std::shared_ptr<const NestedProtocol> wrap(NestedProtocol p) {
    return std::make_shared<const NestedProtocol>(std::move(p));
  }
};

// How the first outer phase enters: as a z-rotation (default) or as a bare
// scalar e^{i phi_0}. Only the rotation reading composes.
enum class FirstPhase { ZRotation, Scalar };

namespace detail {

inline Unitary2 evaluate_side(const NestedProtocol::Side& s, const Unitary2& leaf, FirstPhase reading);

inline Unitary2 evaluate_nested_with(const NestedProtocol& p, const Unitary2& leaf, FirstPhase reading) {
  const Unitary2 oracle = evaluate_side(p.inner, leaf, reading);
  return evaluate_side(p.outer, oracle, reading);
}

inline Unitary2 evaluate_side(const NestedProtocol::Side& s, const Unitary2& leaf, FirstPhase reading) {
  if (!std::holds_alternative<PhaseList>(s))
    return evaluate_nested_with(*std::get<std::shared_ptr<const NestedProtocol>>(s), leaf, reading);
  const auto& phi = std::get<PhaseList>(s);
  if (reading == FirstPhase::ZRotation) return evaluate_with(phi, leaf);
  Unitary2 u = std::polar(1.0, phi[0]) * Unitary2::Identity();
  for (std::size_t k = 1; k < phi.size(); ++k) u = u * leaf * zrot(phi[k]);
  return u;
}

}  // namespace detail

inline Unitary2 evaluate_nested(const NestedProtocol& p, double x, FirstPhase reading = FirstPhase::ZRotation) {
  return detail::evaluate_nested_with(p, signal_oracle(x), reading);
}

struct FlatList {
  PhaseList phases{0.0};
  // [first, last] index of every inner copy at the top level; both endpoints
  // are merged entries, everything strictly between is the inner list verbatim.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
};

namespace detail {

// Correctly rounded sum (Shewchuk partials with a final half-way fix-up).
// Independent of summation order, so merged phases do not depend on how a
// nest was bracketed, and sum(-t) == -sum(t) exactly.
inline double exact_sum(const std::vector<double>& terms) {
  std::vector<double> p;
  for (double x : terms) {
    std::size_t i = 0;
    for (double y : p) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) p[i++] = lo;
      x = hi;
    }
    p.resize(i);
    p.push_back(x);
  }
  if (p.empty()) return 0.0;
  std::size_t n = p.size() - 1;
  double hi = p[n], lo = 0.0;
  while (n > 0) {
    const double x = hi, y = p[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0 && p[n - 1] < 0) || (lo > 0 && p[n - 1] > 0))) {
    const double y = lo * 2, x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

using Terms = std::vector<std::vector<double>>;

inline Terms side_terms(const NestedProtocol::Side& s, std::vector<std::pair<std::size_t, std::size_t>>* spans);

// Outer {a_0..a_m} around inner {b_0..b_n}:
// {a_0+b_0, b_1..b_{n-1}, b_n+a_1+b_0, b_1.., ..., b_n+a_m}.
inline Terms merge_terms(const Terms& a, const Terms& b, std::vector<std::pair<std::size_t, std::size_t>>* spans) {
  const std::size_t m = a.size() - 1, n = b.size() - 1;
  auto join = [](std::vector<double> x, const std::vector<double>& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };
  if (m == 0) return a;
  if (n == 0) {
    // The inner protocol calls no oracle; everything collapses to one rotation.
    std::vector<double> all;
    for (const auto& t : a) all = join(std::move(all), t);
    for (std::size_t k = 0; k < m; ++k) all = join(std::move(all), b[0]);
    return {all};
  }
  Terms v;
  v.push_back(join(a[0], b[0]));
  for (std::size_t k = 1; k <= m; ++k) {
    const std::size_t first = v.size() - 1;
    for (std::size_t j = 1; j < n; ++j) v.push_back(b[j]);
    v.push_back(k < m ? join(join(b[n], a[k]), b[0]) : join(b[n], a[m]));
    if (spans) spans->emplace_back(first, v.size() - 1);
  }
  return v;
}

inline Terms nest_terms(const NestedProtocol& p, std::vector<std::pair<std::size_t, std::size_t>>* spans) {
  return merge_terms(side_terms(p.outer, nullptr), side_terms(p.inner, nullptr), spans);
}

inline Terms side_terms(const NestedProtocol::Side& s, std::vector<std::pair<std::size_t, std::size_t>>* spans) {
  if (!std::holds_alternative<PhaseList>(s)) return nest_terms(*std::get<std::shared_ptr<const NestedProtocol>>(s), spans);
  Terms t;
  for (double v : std::get<PhaseList>(s).phases()) t.push_back({v});
  return t;
}

}  // namespace detail

inline FlatList flatten_with_spans(const NestedProtocol& p) {
  FlatList out;
  const auto terms = detail::nest_terms(p, &out.spans);
  std::vector<double> v;
  v.reserve(terms.size());
  for (const auto& t : terms) v.push_back(detail::exact_sum(t));
  out.phases = PhaseList(std::move(v));
  return out;
}

inline PhaseList flatten(const NestedProtocol& p) { return flatten_with_spans(p).phases; }

struct CompositionReport {
  double max_deviation = 0.0;
  double worst_x = 0.0;
  bool pass = false;
  bool outer_antisymmetric = false;
  bool inner_antisymmetric = false;
};

// g(f(x)) for Chebyshev-basis g, f, interpolated at deg(g)*deg(f)+1 nodes.
inline ChebPoly compose_cheb(const ChebPoly& g, const ChebPoly& f) {
  const std::size_t n = static_cast<std::size_t>(std::max(1, g.degree() * std::max(f.degree(), 0))) + 1;
  auto x = cheb::nodes(n);
  std::vector<cplx> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = cheb::eval(g.coeffs, f(x[k]));
  return ChebPoly(cheb::fit(v));
}

inline CompositionReport verify_composition(const PhaseList& outer, const PhaseList& inner, int grid, double tol = 1e-9) {
  const int deg = outer.degree_bound() * inner.degree_bound();
  if (grid < 2 * deg) throw ArgumentError("verify_composition: grid must be at least 2*deg(outer)*deg(inner)");
  CompositionReport r;
  r.outer_antisymmetric = is_antisymmetric(outer);
  r.inner_antisymmetric = is_antisymmetric(inner);
  const auto po = extract_cheb(outer).P, pi = extract_cheb(inner).P;
  const NestedProtocol nest(outer, inner);
  for (double x : cheb::lobatto(static_cast<std::size_t>(std::max(grid, 2)))) {
    const double dev = std::abs(evaluate_nested(nest, x)(0, 0) - cheb::eval(po.coeffs, pi(x)));
    if (dev > r.max_deviation) r.max_deviation = dev, r.worst_x = x;
  }
  r.pass = r.max_deviation <= tol;
  return r;
}

struct DiagramReport {
  double max_deviation = 0.0;  // path A vs path B over the grid
  bool nested_antisymmetric = false;
  bool commutes = false;
};

// Path A nests in phase space, then reads off the top-left entry; path B
// reads off each polynomial and composes them.
inline DiagramReport commuting_diagram_check(const PhaseList& outer, const PhaseList& inner, int grid = 51,
                                             double tol = 1e-9) {
  if (!is_antisymmetric(outer) || !is_antisymmetric(inner))
    throw PreconditionError("commuting diagram requires antisymmetric phase lists (only those compose under nesting)");
  DiagramReport r;
  const PhaseList flat = flatten(NestedProtocol(outer, inner));
  r.nested_antisymmetric = is_antisymmetric(flat);
  const ChebPoly composed = compose_cheb(extract_cheb(outer).P, extract_cheb(inner).P);
  for (double x : cheb::lobatto(static_cast<std::size_t>(grid)))
    r.max_deviation = std::max(r.max_deviation, std::abs(evaluate(flat, x)(0, 0) - composed(x)));
  r.commutes = r.max_deviation <= tol && r.nested_antisymmetric;
  return r;
}

}  // namespace qspsem
