#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "qspsem/poly.hpp"

using namespace qspsem;

namespace {

ComplexPoly cheb_t(int n) {
  std::vector<cplx> c(static_cast<std::size_t>(n) + 1, 0.0);
  c.back() = 1.0;
  return ComplexPoly::from_cheb(ChebPoly(c));
}

}  // namespace

TEST(Compose, ChebyshevSemigroup) {
  EXPECT_LE(coeff_distance(compose(cheb_t(2), cheb_t(2)), cheb_t(4)), 1e-13);
  EXPECT_LE(coeff_distance(compose(cheb_t(3), cheb_t(2)), cheb_t(6)), 1e-12);
  EXPECT_LE(coeff_distance(compose(cheb_t(1), cheb_t(5)), cheb_t(5)), 1e-13);
}

TEST(Compose, QuarterPiCounterexample) {
  // P = -(1+i)/sqrt2 + i sqrt2 x^2 composed with itself.
  const double r2 = std::sqrt(2.0);
  const ComplexPoly p{-cplx(1, 1) / r2, 0.0, cplx(0, r2)};
  const ComplexPoly want{-cplx(3, 1) / r2, 0.0, cplx(1, 1) * 2.0 * r2, 0.0, cplx(0, -2 * r2)};
  EXPECT_LE(coeff_distance(compose(p, p), want), 1e-14);
  EXPECT_EQ(parity(compose(p, p)), Parity::Even);
  const ComplexPoly lin{0.0, cplx(1, 1) / r2};
  EXPECT_LE(coeff_distance(compose(lin, lin), ComplexPoly{0.0, cplx(0, 1)}), 1e-15);
}

TEST(Parity, Classification) {
  EXPECT_EQ(parity(ComplexPoly{0.0, 1.0, 0.0, -2.0}), Parity::Odd);
  EXPECT_EQ(parity(ComplexPoly{1.0, 0.0, 3.0}), Parity::Even);
  EXPECT_EQ(parity(ComplexPoly{1.0, 1.0}), Parity::Indefinite);
  EXPECT_EQ(parity(ComplexPoly{0.0, 1.0, 1e-12}), Parity::Odd);
  EXPECT_STREQ(to_string(Parity::Indefinite), "indefinite");
}

TEST(SupNorm, InteriorExtremum) {
  EXPECT_NEAR(sup_norm(ComplexPoly{0.0, -1.0, 0.0, 1.0}, 64), 2.0 / (3.0 * std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(sup_norm(cheb_t(7), 64), 1.0, 1e-13);
  EXPECT_THROW(sup_norm(cheb_t(7), 8), ArgumentError);
}

TEST(Laurent, LinearTarget) {
  const auto f = to_laurent(ComplexPoly{0.0, 1.0});
  EXPECT_EQ(f.m, 2);
  EXPECT_NEAR(std::abs(f.coeff(0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.coeff(2) + 0.25), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.coeff(-2) + 0.25), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.coeff(1)), 0.0, 1e-15);
  EXPECT_TRUE(f.is_real_on_circle());
  // F(z) vanishes where x = +-1.
  EXPECT_NEAR(std::abs(f(1.0)), 0.0, 1e-15);
}

TEST(Roots, MultiplicityAndSymmetry) {
  // (x - 1)^2 (x + 1)^2 = x^4 - 2x^2 + 1
  const auto r = roots(ComplexPoly{1.0, 0.0, -2.0, 0.0, 1.0});
  EXPECT_EQ(r.total(), 4u);
  EXPECT_EQ(r.roots.size(), 2u);
  for (const auto& z : r.roots) EXPECT_EQ(z.multiplicity, 2);
  EXPECT_TRUE(r.closed_under_negation);
  EXPECT_TRUE(r.closed_under_conjugation);
  const auto s = roots(ComplexPoly{-2.0, 1.0});
  EXPECT_FALSE(s.closed_under_negation);
  EXPECT_THROW(roots(ComplexPoly{3.0}), ArgumentError);
}

TEST(Completion, KnownTargets) {
  auto q = fejer_riesz_complete(ComplexPoly{0.0, 1.0});
  EXPECT_LE(coeff_distance(q, ComplexPoly{1.0}), 1e-14);
  q = fejer_riesz_complete(cheb_t(2));
  EXPECT_NEAR(std::abs(q(0.3)), 0.6, 1e-12);
  for (int n : {3, 5, 8}) {
    const auto p = cheb_t(n);
    q = fejer_riesz_complete(p);
    EXPECT_EQ(q.degree(), n - 1);
    for (double x : cheb::lobatto(101)) {
      const double pv = p(x).real();
      EXPECT_NEAR(pv * pv + (1 - x * x) * std::norm(q(x)), 1.0, 1e-9) << n;
    }
  }
}

TEST(Completion, Rejections) {
  EXPECT_THROW(fejer_riesz_complete(ComplexPoly{0.0, 0.0, 0.0, 0.8 * 4.0}), PreconditionError);
  EXPECT_THROW(fejer_riesz_complete(ComplexPoly{0.0, -2.4, 0.0, 3.2}), PreconditionError);
  EXPECT_THROW(fejer_riesz_complete(ComplexPoly{0.5, 0.5}), PreconditionError);
  EXPECT_THROW(fejer_riesz_complete(ComplexPoly{0.0, cplx(0, 1)}), PreconditionError);
  EXPECT_THROW(fejer_riesz_complete(ComplexPoly{0.0, 1.5}), PreconditionError);
  try {
    fejer_riesz_complete(ComplexPoly{0.0, -2.4, 0.0, 3.2});
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("|P(+-1)| = 1"), std::string::npos) << e.what();
  }
}

TEST(ApproxStep, Properties) {
  for (auto [delta, eps] : {std::pair{0.5, 0.05}, {0.25, 0.01}, {0.1, 0.05}}) {
    const auto f = approx_step(delta, eps);
    EXPECT_EQ(parity(f), Parity::Odd);
    EXPECT_LE(f.max_imag(), 0.0);
    EXPECT_NEAR(f(1.0).real(), 1.0, 1e-12);
    EXPECT_NEAR(f(-1.0).real(), -1.0, 1e-12);
    for (double x : cheb::lobatto(801)) {
      EXPECT_LE(std::abs(f(x)), 1.0 + 1e-12);
      if (x >= delta) EXPECT_LE(std::abs(f(x) - 1.0), eps);
    }
  }
}

TEST(ApproxStep, DegreeGrowsWithInverseWidth) {
  const int d4 = approx_step(0.25, 0.005).degree(), d8 = approx_step(0.125, 0.005).degree();
  EXPECT_EQ(d4, 29);
  EXPECT_EQ(d8, 61);
  EXPECT_THROW(approx_step(0.0, 0.1), DomainError);
  EXPECT_THROW(approx_step(0.5, 1.0), DomainError);
  EXPECT_THROW(approx_step(1e-3, 1e-6, 64), CapacityError);
}
