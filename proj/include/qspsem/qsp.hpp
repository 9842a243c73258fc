#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "chebyshev.hpp"
#include "error.hpp"
#include "poly.hpp"

namespace qspsem {

using Unitary2 = Eigen::Matrix2cd;

enum class Convention { Wx };

// Ordered list of finite z-rotation angles. Length d+1 programs degree <= d.
class PhaseList {
 public:
  PhaseList(std::initializer_list<double> p) : PhaseList(std::vector<double>(p)) {}
  explicit PhaseList(std::vector<double> p) : phases_(std::move(p)) {
    if (phases_.empty()) throw ArgumentError("phase list must not be empty");
    for (double v : phases_)
      if (!std::isfinite(v)) throw ArgumentError("phase list entries must be finite");
  }

  const std::vector<double>& phases() const { return phases_; }
  std::size_t size() const { return phases_.size(); }
  int degree_bound() const { return static_cast<int>(phases_.size()) - 1; }
  double operator[](std::size_t i) const { return phases_[i]; }
  Convention convention() const { return Convention::Wx; }

  bool operator==(const PhaseList& o) const { return phases_ == o.phases_; }

 private:
  std::vector<double> phases_;
};

// Reduce an angle mod pi into [-pi/2, pi/2).
inline double reduce_phase(double p) {
  double r = std::fmod(p + std::numbers::pi / 2, std::numbers::pi);
  if (r < 0) r += std::numbers::pi;
  r -= std::numbers::pi / 2;
  if (r >= std::numbers::pi / 2) r -= std::numbers::pi;
  return r;
}

inline PhaseList reduced(const PhaseList& p) {
  std::vector<double> v = p.phases();
  for (auto& x : v) x = reduce_phase(x);
  return PhaseList(std::move(v));
}

// Largest |a_k - b_k| with each difference taken mod pi.
inline double phase_distance(const PhaseList& a, const PhaseList& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(reduce_phase(a[k] - b[k])));
  return m;
}

// Exact antisymmetry: phi_k == -phi_{n-k}, odd length has center 0.
inline bool is_antisymmetric(const PhaseList& p) {
  const std::size_t n = p.size();
  for (std::size_t k = 0; k < n; ++k)
    if (p[k] != -p[n - 1 - k]) return false;
  return true;
}

inline Unitary2 zrot(double phi) {
  Unitary2 u = Unitary2::Zero();
  u(0, 0) = std::polar(1.0, phi);
  u(1, 1) = std::polar(1.0, -phi);
  return u;
}

namespace detail {

inline double checked_signal(double x) {
  if (!(std::abs(x) <= 1.0 + 1e-14)) throw DomainError("signal must lie in [-1,1], got " + std::to_string(x));
  return std::clamp(x, -1.0, 1.0);
}

}  // namespace detail

// exp(i arccos(x) X): real diagonal x, off-diagonal i sqrt(1-x^2).
inline Unitary2 signal_oracle(double x) {
  x = detail::checked_signal(x);
  const double s = std::sqrt((1.0 - x) * (1.0 + x));
  Unitary2 w;
  w << cplx(x, 0), cplx(0, s), cplx(0, s), cplx(x, 0);
  return w;
}

inline Unitary2 twisted_oracle(double theta, double x) {
  return zrot(theta) * signal_oracle(x) * zrot(-theta);
}

// e^{i phi_0 Z} prod_k [oracle e^{i phi_k Z}] with a caller-supplied oracle.
inline Unitary2 evaluate_with(const PhaseList& phi, const Unitary2& oracle) {
  Unitary2 u = zrot(phi[0]);
  for (std::size_t k = 1; k < phi.size(); ++k) u = u * oracle * zrot(phi[k]);
  return u;
}

inline Unitary2 evaluate(const PhaseList& phi, double x) { return evaluate_with(phi, signal_oracle(x)); }

struct PolyPair {
  ComplexPoly P;
  ComplexPoly Q;
};

struct ChebPair {
  ChebPoly P;
  ChebPoly Q;
};

inline cplx q_entry(const Unitary2& u, double x) {
  const double s = std::sqrt((1.0 - x) * (1.0 + x));
  return u(0, 1) / cplx(0.0, s);
}

// P and Q of U_phi in the Chebyshev basis, interpolated at d+1 first-kind nodes.
inline ChebPair extract_cheb(const PhaseList& phi) {
  const int d = phi.degree_bound();
  const std::size_t n = static_cast<std::size_t>(d) + 1;
  auto x = cheb::nodes(n);
  std::vector<cplx> pv(n), qv(n);
  for (std::size_t k = 0; k < n; ++k) {
    Unitary2 u = evaluate(phi, x[k]);
    pv[k] = u(0, 0);
    qv[k] = q_entry(u, x[k]);
  }
  auto pc = cheb::fit(pv);
  auto qc = cheb::fit(qv);
  qc.resize(std::max<std::size_t>(1, static_cast<std::size_t>(d)));
  for (std::size_t k = (d % 2 == 0) ? 1 : 0; k < pc.size(); k += 2) pc[k] = 0.0;
  for (std::size_t k = (d % 2 == 0) ? 0 : 1; k < qc.size(); k += 2) qc[k] = 0.0;
  if (d == 0) qc.assign(1, 0.0);
  ChebPair out{ChebPoly(pc), ChebPoly(qc)};

  // Held-out check between the interpolation nodes.
  auto y = cheb::nodes(2 * n + 3);
  for (double xx : y) {
    Unitary2 u = evaluate(phi, xx);
    if (std::abs(out.P(xx) - u(0, 0)) > 1e-9 || std::abs(out.Q(xx) - q_entry(u, xx)) > 1e-9)
      throw InternalConsistencyError("extract_poly: interpolation residual above 1e-9");
  }
  return out;
}

inline PolyPair extract_poly(const PhaseList& phi) {
  auto c = extract_cheb(phi);
  return {ComplexPoly::from_cheb(c.P), ComplexPoly::from_cheb(c.Q)};
}

inline bool is_honest(const PhaseList& phi) {
  const std::size_t d = phi.size() - 1;
  auto pp = extract_poly(phi);
  return std::abs(pp.P.coeff(d)) > 1e-9;
}

inline bool is_embeddable(const PhaseList& phi, int grid) {
  if (grid < 2 * static_cast<int>(phi.size())) throw ArgumentError("is_embeddable: grid must be at least 2*len(phi)");
  for (double x : cheb::lobatto(static_cast<std::size_t>(grid))) {
    Unitary2 u = evaluate(phi, x);
    if (std::abs(u(0, 0).imag()) > 1e-9 || std::abs(u(1, 1).imag()) > 1e-9) return false;
  }
  for (double x : {-1.0, 1.0})
    if (std::abs(std::abs(evaluate(phi, x)(0, 0)) - 1.0) > 1e-9) return false;
  return true;
}

struct TwistReport {
  double max_deviation = 0.0;
  double worst_x = 0.0;
};

// Twisting every oracle by theta equals conjugating the whole protocol.
inline TwistReport twist_deviation(const PhaseList& phi, double theta, int grid) {
  TwistReport r;
  for (double x : cheb::lobatto(static_cast<std::size_t>(std::max(grid, 2)))) {
    Unitary2 lhs = evaluate_with(phi, twisted_oracle(theta, x));
    Unitary2 rhs = zrot(theta) * evaluate(phi, x) * zrot(-theta);
    const double dev = (lhs - rhs).cwiseAbs().maxCoeff();
    if (dev > r.max_deviation) r.max_deviation = dev, r.worst_x = x;
  }
  return r;
}

inline bool verify_twist(const PhaseList& phi, double theta, int grid, double tol = 1e-10) {
  return twist_deviation(phi, theta, grid).max_deviation <= tol;
}

// Element of (Z2)^4 generated by reversal R, negation N, the antipodal
// endpoint shift A (+pi/2, -pi/2) and the sign shift S (+pi/2, +pi/2).
struct GroupElement {
  bool r = false, n = false, a = false, s = false;

  static GroupElement R() { return {true, false, false, false}; }
  static GroupElement N() { return {false, true, false, false}; }
  static GroupElement A() { return {false, false, true, false}; }
  static GroupElement S() { return {false, false, false, true}; }

  GroupElement operator*(const GroupElement& o) const { return {r != o.r, n != o.n, a != o.a, s != o.s}; }
  bool operator==(const GroupElement&) const = default;
  bool is_identity() const { return !(r || n || a || s); }

  std::string name() const {
    std::string out;
    if (r) out += 'R';
    if (n) out += 'N';
    if (a) out += 'A';
    if (s) out += 'S';
    return out.empty() ? "I" : out;
  }
};

// Generators are applied in the order N, R, A, S.
inline PhaseList group_action(const GroupElement& g, const PhaseList& phi) {
  std::vector<double> v = phi.phases();
  constexpr double h = std::numbers::pi / 2;
  if (g.n)
    for (auto& p : v) p = -p;
  if (g.r) std::reverse(v.begin(), v.end());
  if (g.a) {
    v.front() += h;
    v.back() -= h;
  }
  if (g.s) {
    v.front() += h;
    v.back() += h;
  }
  return PhaseList(std::move(v));
}

// (P, iQ): the pair read as U = [[P, Q' sqrt(1-x^2)], [-Q'* sqrt(1-x^2), P*]].
// The generator table below is stated for this reading.
inline PolyPair real_frame(const PolyPair& pq) { return {pq.P, cplx(0.0, 1.0) * pq.Q}; }

// Image of (P, Q') under g: R (P,-Q'*), N (P*,-Q'*), A (P,-Q'), S (-P,Q').
inline PolyPair group_image(const GroupElement& g, PolyPair pq) {
  if (g.n) pq = {pq.P.conj(), cplx(-1.0) * pq.Q.conj()};
  if (g.r) pq = {pq.P, cplx(-1.0) * pq.Q.conj()};
  if (g.a) pq.Q = cplx(-1.0) * pq.Q;
  if (g.s) pq.P = cplx(-1.0) * pq.P;
  return pq;
}

struct GroupReport {
  double max_deviation = 0.0;  // worst coefficient mismatch of (P, Q) over all 16 elements
  std::string worst_element = "I";
  bool squares_identity = false;  // R, N bitwise; A, S modulo pi
};

inline GroupReport group_check(const PhaseList& phi) {
  GroupReport r;
  const PolyPair base = real_frame(extract_poly(phi));
  for (int bits = 0; bits < 16; ++bits) {
    const GroupElement g{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
    const PolyPair want = group_image(g, base), got = real_frame(extract_poly(group_action(g, phi)));
    const double dev = std::max(coeff_distance(want.P, got.P), coeff_distance(want.Q, got.Q));
    if (dev > r.max_deviation) r.max_deviation = dev, r.worst_element = g.name();
  }
  auto twice = [&](const GroupElement& g) { return group_action(g, group_action(g, phi)); };
  r.squares_identity = twice(GroupElement::R()) == phi && twice(GroupElement::N()) == phi &&
                       phase_distance(twice(GroupElement::A()), phi) <= 1e-15 &&
                       phase_distance(twice(GroupElement::S()), phi) <= 1e-15;
  return r;
}

}  // namespace qspsem
