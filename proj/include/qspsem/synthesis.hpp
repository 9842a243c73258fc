#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "chebyshev.hpp"
#include "error.hpp"
#include "extended.hpp"
#include "poly.hpp"
#include "qsp.hpp"

namespace qspsem {

struct ValidationResult {
  bool pass = true;
  std::vector<std::string> violations;

  void fail(std::string why) {
    pass = false;
    violations.push_back(std::move(why));
  }
  std::string summary() const {
    std::string s;
    for (const auto& v : violations) s += (s.empty() ? "" : "; ") + v;
    return s;
  }
};

// Phase list Phi = {h_0, ..., h_{k-1}, [0,] -h_{k-1}, ..., -h_0}.
struct AntisymmetricPhaseList {
  PhaseList phases{0.0};
  std::vector<double> half;

  static AntisymmetricPhaseList from_half(const std::vector<double>& half, bool odd_length) {
    std::vector<double> v(half);
    if (odd_length) v.push_back(0.0);
    for (std::size_t k = half.size(); k-- > 0;) v.push_back(-half[k]);
    return {PhaseList(std::move(v)), half};
  }
};

struct SynthesisReport {
  AntisymmetricPhaseList phases;
  double residual = 0.0;         // max coefficient mismatch of the re-extracted pair
  int steps = 0;                 // stripping iterations
  double max_subleading = 0.0;   // worst stripping-step residual, relative to the pair's scale
  int worst_step = -1;
  bool refined = false;          // Gauss-Newton pass was needed
  bool extended = false;         // completion and stripping redone in 50-digit arithmetic
};

namespace detail {

inline double grid_identity_residual(const ChebPoly& p, const ChebPoly& q) {
  double worst = 0.0;
  for (double x : cheb::lobatto(201))
    worst = std::max(worst, std::abs(std::norm(p(x)) + (1 - x * x) * std::norm(q(x)) - 1.0));
  return worst;
}

inline double cheb_distance(const ChebPoly& a, const ChebPoly& b) {
  double m = 0.0;
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  for (std::size_t k = 0; k < n; ++k) {
    cplx u = k < a.coeffs.size() ? a.coeffs[k] : cplx{};
    cplx v = k < b.coeffs.size() ? b.coeffs[k] : cplx{};
    m = std::max(m, std::abs(u - v));
  }
  return m;
}

}  // namespace detail

inline ValidationResult validate_target(const ChebPoly& p, const ChebPoly& q) {
  ValidationResult r;
  const int d = p.degree();
  if (p.max_imag() > 1e-10) r.fail("P is not real");
  const Parity pp = parity(p), qp = parity(q);
  if (pp == Parity::Indefinite || (d % 2 == 0) != (pp == Parity::Even)) r.fail("P parity differs from deg(P) mod 2");
  const bool q_zero = std::all_of(q.coeffs.begin(), q.coeffs.end(), [](const cplx& c) { return std::abs(c) <= 1e-12; });
  if (d == 0) {
    if (!q_zero) r.fail("deg(Q) must be -1 for a constant P");
  } else {
    if (q_zero || q.degree() != d - 1) r.fail("deg(Q) != deg(P) - 1");
    if (qp == Parity::Indefinite || (d % 2 == 1) != (qp == Parity::Even)) r.fail("Q parity differs from (deg(P)-1) mod 2");
  }
  if (detail::grid_identity_residual(p, q) > 1e-9) r.fail("|P|^2 + (1-x^2)|Q|^2 = 1 fails on the 201-point grid");
  const cplx lead = p.coeffs[static_cast<std::size_t>(d)];
  if (!(lead.real() > 0.0)) r.fail("leading coefficient of P is not positive");
  return r;
}

inline ValidationResult validate_target(const ComplexPoly& p, const ComplexPoly& q) {
  return validate_target(p.to_cheb(), q.to_cheb());
}

namespace detail {

using Mats = std::vector<Unitary2>;

// Chebyshev coefficients of P (from index p_from) and Q (from q_from) for
// matrices sampled at the nodes.
inline Eigen::VectorXcd high_coeffs(const Mats& ms, const std::vector<double>& x, int p_from, int q_from) {
  const std::size_t n = x.size();
  std::vector<cplx> pv(n), qv(n);
  for (std::size_t k = 0; k < n; ++k) {
    pv[k] = ms[k](0, 0);
    qv[k] = q_entry(ms[k], x[k]);
  }
  auto pc = cheb::fit(pv), qc = cheb::fit(qv);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(2 * n) - p_from - q_from);
  Eigen::Index i = 0;
  for (std::size_t k = static_cast<std::size_t>(p_from); k < n; ++k) out(i++) = pc[k];
  for (std::size_t k = static_cast<std::size_t>(q_from); k < n; ++k) out(i++) = qc[k];
  return out;
}

// Minimizes |A + B u + C conj(u)|^2 over unit u = e^{i t}; returns t.
inline double min_on_circle(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const Eigen::VectorXcd& c,
                            double& value) {
  const double k0 = a.squaredNorm() + b.squaredNorm() + c.squaredNorm();
  const cplx al = a.dot(b), be = a.dot(c), ga = c.dot(b);  // dot conjugates its left side
  auto f = [&](double t) {
    cplx u = std::polar(1.0, t);
    return k0 + 2 * (al * u).real() + 2 * (be * std::conj(u)).real() + 2 * (ga * u * u).real();
  };
  auto df = [&](double t, double& d1, double& d2) {
    cplx u = std::polar(1.0, t), iu = cplx(0, 1) * u;
    d1 = 2 * (al * iu).real() + 2 * (be * std::conj(iu)).real() + 2 * (ga * cplx(0, 2) * u * u).real();
    d2 = -2 * (al * u).real() - 2 * (be * std::conj(u)).real() - 8 * (ga * u * u).real();
  };
  const int grid = 720;
  double best_t = 0.0, best = f(0.0);
  for (int i = 1; i < grid; ++i) {
    double t = 2 * std::numbers::pi * i / grid;
    double v = f(t);
    if (v < best) best = v, best_t = t;
  }
  for (int it = 0; it < 30; ++it) {
    double d1, d2;
    df(best_t, d1, d2);
    if (d2 <= 0) break;
    double t = best_t - d1 / d2;
    double v = f(t);
    if (!(v <= best)) break;
    bool done = std::abs(t - best_t) < 1e-16;
    best = v, best_t = t;
    if (done) break;
  }
  value = std::max(best, 0.0);
  return best_t;
}

// Gauss-Newton with Levenberg damping on the free half of an antisymmetric list.
inline std::vector<double> refine_half(std::vector<double> h, bool odd_length, const ChebPair& target, int d,
                                       int max_iter = 60) {
  const std::size_t n = static_cast<std::size_t>(2 * d + 4);
  auto x = cheb::nodes(n);
  std::vector<cplx> tp(n), tq(n);
  for (std::size_t j = 0; j < n; ++j) tp[j] = target.P(x[j]), tq[j] = target.Q(x[j]);
  const std::size_t H = h.size();

  auto residual = [&](const std::vector<double>& hh, Eigen::VectorXd* r, Eigen::MatrixXd* jac) {
    auto full = AntisymmetricPhaseList::from_half(hh, odd_length).phases;
    const std::size_t L = full.size();
    if (r) r->resize(static_cast<Eigen::Index>(4 * n));
    if (jac) jac->resize(static_cast<Eigen::Index>(4 * n), static_cast<Eigen::Index>(H));
    std::vector<Unitary2> pre(L), suf(L + 1);
    for (std::size_t j = 0; j < n; ++j) {
      Unitary2 w = signal_oracle(x[j]);
      const double s = std::sqrt((1 - x[j]) * (1 + x[j]));
      // pre[k] = rotations 0..k-1 with oracles between; suf[k] = rotation k onward.
      pre[0] = Unitary2::Identity();
      for (std::size_t k = 1; k < L; ++k) pre[k] = pre[k - 1] * zrot(full[k - 1]) * w;
      suf[L] = Unitary2::Identity();
      for (std::size_t k = L; k-- > 0;) suf[k] = zrot(full[k]) * (k + 1 < L ? Unitary2(w * suf[k + 1]) : Unitary2(Unitary2::Identity()));
      Unitary2 u = suf[0];
      const Eigen::Index row = static_cast<Eigen::Index>(4 * j);
      if (r) {
        cplx dp = u(0, 0) - tp[j], dq = u(0, 1) / cplx(0, s) - tq[j];
        (*r)(row) = dp.real(), (*r)(row + 1) = dp.imag(), (*r)(row + 2) = dq.real(), (*r)(row + 3) = dq.imag();
      }
      if (jac) {
        Unitary2 iz = Unitary2::Zero();
        iz(0, 0) = cplx(0, 1), iz(1, 1) = cplx(0, -1);
        for (std::size_t i = 0; i < H; ++i) {
          Unitary2 g = pre[i] * iz * suf[i] - pre[L - 1 - i] * iz * suf[L - 1 - i];
          cplx gp = g(0, 0), gq = g(0, 1) / cplx(0, s);
          const Eigen::Index col = static_cast<Eigen::Index>(i);
          (*jac)(row, col) = gp.real(), (*jac)(row + 1, col) = gp.imag();
          (*jac)(row + 2, col) = gq.real(), (*jac)(row + 3, col) = gq.imag();
        }
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residual(h, &r, &jac);
  double cost = r.squaredNorm(), lambda = 1e-8;
  for (int it = 0; it < max_iter && cost > 1e-30; ++it) {
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;
    bool improved = false;
    while (lambda < 1e8) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
      Eigen::VectorXd step = a.ldlt().solve(-g);
      std::vector<double> hn(h);
      for (std::size_t i = 0; i < H; ++i) hn[i] += step(static_cast<Eigen::Index>(i));
      Eigen::VectorXd rn;
      residual(hn, &rn, nullptr);
      if (rn.squaredNorm() < cost) {
        h = hn;
        cost = rn.squaredNorm();
        lambda = std::max(lambda * 0.1, 1e-15);
        improved = true;
        break;
      }
      lambda *= 10;
    }
    if (!improved) break;
    residual(h, &r, &jac);
  }
  return h;
}

}  // namespace detail

// Layer stripping of an antisymmetric target. Each step removes the outer
// pair e^{i phi Z} W ... W e^{-i phi Z}: the peeled matrix is
// W^dag e^{-i phi Z} U e^{i phi Z} W^dag, and phi is the angle that cancels
// the two top coefficients of P and the top of Q in the peeled matrix. With
// exact data that angle satisfies e^{2 i phi} = Q_{d-1} / P_d; solving for all
// cancelled coefficients at once in least squares keeps the recursion stable.
inline SynthesisReport synthesize(const ChebPoly& p_in, const ChebPoly& q_in, double tol = 1e-10) {
  auto v = validate_target(p_in, q_in);
  if (!v.pass) throw PreconditionError("target not in antisymmetric class: " + v.summary());
  const int d = p_in.degree();
  ChebPair target{p_in.truncated(static_cast<std::size_t>(d) + 1), q_in.truncated(static_cast<std::size_t>(std::max(d, 1)))};

  SynthesisReport rep;
  const bool odd_length = (d % 2 == 0);
  std::vector<double> half;

  const std::size_t n = static_cast<std::size_t>(std::max(2 * d + 4, 8));
  auto x = cheb::nodes(n);
  detail::Mats ms(n);
  std::vector<Unitary2> wdag(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt((1 - x[k]) * (1 + x[k]));
    cplx pv = target.P(x[k]), qv = target.Q(x[k]);
    ms[k] << pv, cplx(0, s) * qv, cplx(0, s) * std::conj(qv), std::conj(pv);
    wdag[k] = signal_oracle(x[k]).adjoint();
  }

  int deg = d;
  while (deg >= 2) {
    detail::Mats dm(n), bm(n), cm(n);
    for (std::size_t k = 0; k < n; ++k) {
      Unitary2 diag = Unitary2::Zero(), up = Unitary2::Zero(), lo = Unitary2::Zero();
      diag(0, 0) = ms[k](0, 0), diag(1, 1) = ms[k](1, 1);
      up(0, 1) = ms[k](0, 1);
      lo(1, 0) = ms[k](1, 0);
      dm[k] = wdag[k] * diag * wdag[k];
      bm[k] = wdag[k] * up * wdag[k];
      cm[k] = wdag[k] * lo * wdag[k];
    }
    auto a = detail::high_coeffs(dm, x, deg - 1, deg - 2);
    auto b = detail::high_coeffs(bm, x, deg - 1, deg - 2);
    auto c = detail::high_coeffs(cm, x, deg - 1, deg - 2);
    double value = 0.0;
    const double t = detail::min_on_circle(a, b, c, value);  // t = -2 phi
    const double phi = reduce_phase(-0.5 * t);
    const double sub = std::sqrt(value);
    if (sub > rep.max_subleading) rep.max_subleading = sub, rep.worst_step = rep.steps;
    half.push_back(phi);
    const Unitary2 zl = zrot(-phi), zr = zrot(phi);
    for (std::size_t k = 0; k < n; ++k) ms[k] = wdag[k] * zl * ms[k] * zr * wdag[k];
    deg -= 2;
    ++rep.steps;
  }
  if (deg == 1) {
    cplx mean{};
    for (std::size_t k = 0; k < n; ++k) mean += q_entry(ms[k], x[k]);
    half.push_back(reduce_phase(0.5 * std::arg(mean)));
    ++rep.steps;
  }

  auto residual_of = [&](const std::vector<double>& h) {
    auto got = extract_cheb(AntisymmetricPhaseList::from_half(h, odd_length).phases);
    return std::max(detail::cheb_distance(got.P, target.P), detail::cheb_distance(got.Q, target.Q));
  };
  rep.residual = residual_of(half);
  if (rep.residual > tol && !half.empty()) {
    auto h2 = detail::refine_half(half, odd_length, target, d);
    for (auto& p : h2) p = reduce_phase(p);
    const double r2 = residual_of(h2);
    if (r2 < rep.residual) half = h2, rep.residual = r2, rep.refined = true;
  }
  rep.phases = AntisymmetricPhaseList::from_half(half, odd_length);
  if (rep.residual > tol)
    throw NumericError("synthesis: re-extraction residual " + std::to_string(rep.residual) + " above tolerance; worst stripping step " +
                           std::to_string(rep.worst_step),
                       rep.worst_step);
  return rep;
}

// Monomial inputs are converted once; residuals are still measured on
// Chebyshev coefficients, which stay O(1) where monomial ones grow like 2^d.
inline SynthesisReport synthesize(const ComplexPoly& p, const ComplexPoly& q, double tol = 1e-10) {
  return synthesize(p.to_cheb(), q.to_cheb(), tol);
}

inline SynthesisReport synthesize_from_P(const ChebPoly& p, double tol = 1e-10) {
  detail::require_completable(p);
  const int d = p.degree();
  if (!(p.coeffs[static_cast<std::size_t>(d)].real() > 0.0))
    throw PreconditionError("target violates the sign condition: leading coefficient of P must be positive");
  ChebPoly pr = p;
  for (auto& c : pr.coeffs) c = c.real();
  try {
    return synthesize(pr, fejer_riesz_complete(pr), tol);
  } catch (const NumericError& e) {
    if (d < 2) throw;
    auto xt = detail::x_complete(pr, d);
    const double ident = detail::x_identity_residual(xt);
    if (ident > 1e-30) throw NumericError(std::string(e.what()) + "; extended completion residual " + std::to_string(ident), e.step());
    SynthesisReport rep;
    const auto half = detail::x_strip(xt, d);
    rep.steps = static_cast<int>(half.size());
    rep.extended = true;
    rep.phases = AntisymmetricPhaseList::from_half(half, d % 2 == 0);
    std::vector<cplx> qd(xt.q.size());
    for (std::size_t k = 0; k < qd.size(); ++k) qd[k] = cplx(static_cast<double>(xt.q[k].real()), static_cast<double>(xt.q[k].imag()));
    auto got = extract_cheb(rep.phases.phases);
    rep.residual = std::max(detail::cheb_distance(got.P, pr.truncated(static_cast<std::size_t>(d) + 1)), detail::cheb_distance(got.Q, ChebPoly(qd)));
    if (rep.residual > tol)
      throw NumericError("synthesis: extended-precision re-extraction residual " + std::to_string(rep.residual) + " above tolerance");
    return rep;
  }
}

inline SynthesisReport synthesize_from_P(const ComplexPoly& p, double tol = 1e-10) {
  return synthesize_from_P(p.to_cheb(), tol);
}

}  // namespace qspsem
