// One line per acceptance criterion; nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "qspsem/apps.hpp"
#include "qspsem/cli.hpp"
#include "qspsem/io.hpp"
#include "qspsem/nesting.hpp"
#include "qspsem/qsvt.hpp"
#include "qspsem/synthesis.hpp"

using namespace qspsem;
using testing_util::kPi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.size() < 400) detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << v;
  return s.str();
}

ChebPoly cheb_t(int n) {
  std::vector<cplx> c(static_cast<std::size_t>(n) + 1, 0.0);
  c.back() = 1.0;
  return ChebPoly(c);
}

Outcome counterexample() {
  Outcome o;
  const double q = kPi / 4, r2 = std::sqrt(2.0);
  const PhaseList phi{q, q, q};
  const cplx c0 = -cplx(1, 1) / r2;
  const ComplexPoly p{c0, 0.0, cplx(0, r2)};
  const ComplexPoly nested{c0, 0.0, -cplx(1, -1) * r2, 0.0, 2 * r2};
  const ComplexPoly pp{-cplx(3, 1) / r2, 0.0, cplx(1, 1) * 2.0 * r2, 0.0, cplx(0, -2 * r2)};
  const double d1 = coeff_distance(extract_poly(phi).P, p);
  o.require(d1 <= 1e-10, "extracted P off by " + num(d1));
  const auto np = extract_poly(flatten(NestedProtocol(phi, phi))).P;
  const double d2 = coeff_distance(np, nested);
  o.require(d2 <= 1e-10, "nested P off by " + num(d2));
  double d2b = 0;
  for (double x : cheb::lobatto(41)) d2b = std::max(d2b, std::abs(evaluate_nested(NestedProtocol(phi, phi), x)(0, 0) - nested(x)));
  o.require(d2b <= 1e-10, "nested evaluation off by " + num(d2b));
  const double d3 = coeff_distance(compose(p, p), pp);
  o.require(d3 <= 1e-10, "P o P off by " + num(d3));
  double gap = 0;
  for (double x : cheb::lobatto(201)) gap = std::max(gap, std::abs(nested(x) - pp(x)));
  o.require(gap > 0.5, "gap only " + num(gap));
  o.detail = o.pass ? "gap " + num(gap) : o.detail;
  return o;
}

Outcome semigroup() {
  Outcome o;
  const PhaseList z{0, 0, 0};
  const NestedProtocol nest(z, z);
  double dev = 0;
  for (double x : cheb::lobatto(101)) {
    const double t4 = std::cos(4 * std::acos(x));
    dev = std::max({dev, std::abs(evaluate_nested(nest, x)(0, 0) - t4), std::abs(evaluate(flatten(nest), x)(0, 0) - t4)});
  }
  o.require(dev <= 1e-10, "deviation " + num(dev));
  o.detail = o.pass ? "max deviation " + num(dev) : o.detail;
  return o;
}

Outcome property_suite() {
  Outcome o;
  std::mt19937_64 rng(301);
  double worst_phase = 0, worst_diag = 0;
  int pairs = 0;
  auto draw = [&](int d) {
    for (;;) {
      const auto phi = testing_util::random_antisymmetric(rng, d);
      if (extract_cheb(phi).P.coeffs[static_cast<std::size_t>(d)].real() >= 1e-3) return phi;
    }
  };
  while (pairs < 200) {
    const int da = 1 + static_cast<int>(rng() % 12), db = 1 + static_cast<int>(rng() % 12);
    const auto a = draw(da), b = draw(db);
    for (const auto& phi : {a, b}) {
      const auto c = extract_cheb(phi);
      const auto rep = synthesize(c.P, c.Q);
      worst_phase = std::max(worst_phase, phase_distance(rep.phases.phases, phi));
    }
    const auto dia = commuting_diagram_check(a, b, std::max(51, 2 * da * db + 1));
    worst_diag = std::max(worst_diag, dia.max_deviation);
    o.require(dia.nested_antisymmetric, "flattened list not antisymmetric");
    ++pairs;
  }
  o.require(worst_phase <= 1e-7, "phase error " + num(worst_phase));
  o.require(worst_diag <= 1e-9, "diagram deviation " + num(worst_diag));
  o.detail = o.pass ? "200 pairs, phase error " + num(worst_phase) + ", diagram " + num(worst_diag) : o.detail;
  return o;
}

Outcome completion() {
  Outcome o;
  std::vector<ChebPoly> targets{cheb_t(1), cheb_t(2), cheb_t(3), cheb_t(5)};
  std::mt19937_64 rng(401);
  while (targets.size() < 24) {
    const int d = 2 + static_cast<int>(rng() % 15);
    const auto p = extract_cheb(testing_util::random_antisymmetric(rng, d)).P;
    if (p.coeffs[static_cast<std::size_t>(d)].real() >= 1e-2) targets.push_back(p);
  }
  double worst_det = 0, worst_re = 0;
  for (const auto& p : targets) {
    try {
      const auto q = fejer_riesz_complete(p);
      for (double x : cheb::lobatto(201))
        worst_det = std::max(worst_det, std::abs(std::norm(p(x)) + (1 - x * x) * std::norm(q(x)) - 1.0));
      const auto rep = synthesize(p, q, 1e-8);
      worst_re = std::max(worst_re, rep.residual);
    } catch (const Error& e) {
      o.require(false, std::string("degree ") + std::to_string(p.degree()) + ": " + e.what());
    }
  }
  o.require(worst_det <= 1e-8, "determinantal residual " + num(worst_det));
  o.require(worst_re <= 1e-8, "re-extraction residual " + num(worst_re));
  auto scaled = cheb_t(3);
  scaled.coeffs[3] = 0.8;
  try {
    synthesize_from_P(scaled);
    o.require(false, "0.8 T3 accepted");
  } catch (const PreconditionError& e) {
    o.require(std::string(e.what()).find("|P(+-1)| = 1") != std::string::npos, std::string("wrong violation: ") + e.what());
  }
  o.detail = o.pass ? "24 targets, determinantal " + num(worst_det) + ", re-extraction " + num(worst_re) : o.detail;
  return o;
}

std::vector<Eigen::Index> random_subset(std::mt19937_64& rng, Eigen::Index n) {
  std::vector<Eigen::Index> v;
  for (Eigen::Index k = 0; k < n; ++k)
    if (rng() % 2) v.push_back(k);
  if (v.empty()) v.push_back(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
  return v;
}

Outcome qsvt() {
  Outcome o;
  std::mt19937_64 rng(501);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 15);
    const QsvtProgram prog(testing_util::random_list(rng, 1 + rng() % 10, kPi), Projector::basis_states(n, random_subset(rng, n)),
                           Projector::basis_states(n, random_subset(rng, n)), detail::haar_unitary(n, rng));
    worst = std::max(worst, verify_svt(prog).max_deviation);
  }
  o.require(worst <= 1e-8, "svt deviation " + num(worst));

  // Flat nests against the composed polynomial at each singular value.
  double worst_nest = 0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 15);
    const auto l = Projector::basis_states(n, random_subset(rng, n)), r = Projector::basis_states(n, random_subset(rng, n));
    const Matrix u = detail::haar_unitary(n, rng);
    const auto g = testing_util::random_antisymmetric(rng, 1 + static_cast<int>(rng() % 5));
    const auto f = testing_util::random_antisymmetric(rng, 1 + static_cast<int>(rng() % 5));
    const auto flat = flat_nest(QsvtProgram(g, l, r, u), QsvtProgram(f, l, r, u));
    const auto pg = extract_cheb(g).P, pf = extract_cheb(f).P;
    const bool odd = flat.phases.degree_bound() % 2 == 1;
    const Matrix vb = r.basis(), wb = l.basis();
    Eigen::JacobiSVD<Matrix> svd(wb.adjoint() * u * vb, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix target = Matrix::Zero(n, n);
    const Matrix vs = vb * svd.matrixV(), ws = wb * svd.matrixU();
    for (Eigen::Index k = 0; k < vs.cols(); ++k) {
      const double s = k < svd.singularValues().size() ? std::min(svd.singularValues()(k), 1.0) : 0.0;
      const cplx val = cheb::eval(pg.coeffs, pf(s));
      if (!odd) target += val * vs.col(k) * vs.col(k).adjoint();
      else if (k < svd.singularValues().size()) target += val * ws.col(k) * vs.col(k).adjoint();
    }
    const Matrix full = qsvt_evaluate(flat);
    const Matrix block = (odd ? l.matrix() : r.matrix()) * full * r.matrix();
    worst_nest = std::max(worst_nest, detail::max_abs(block - target));
  }
  o.require(worst_nest <= 1e-8, "flat nest deviation " + num(worst_nest));
  o.detail = o.pass ? "100 instances " + num(worst) + ", 50 flat nests " + num(worst_nest) : o.detail;
  return o;
}

Outcome jordan() {
  Outcome o;
  std::mt19937_64 rng(601);
  double inv = 0, sdev = 0;
  for (int t = 0; t < 60; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 15);
    const Matrix h = detail::haar_unitary(n, rng);
    const auto ra = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    const auto rb = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    const auto a = Projector::onto(h.leftCols(ra)), b = Projector::onto(detail::haar_unitary(n, rng).leftCols(rb));
    const auto jd = jordan_decompose(a, b);
    inv = std::max(inv, jd.max_invariance_residual(a, b));
    Eigen::Index dims = 0;
    std::vector<double> planes;
    for (const auto& s : jd.subspaces) {
      dims += s.basis.cols();
      if (s.two_dimensional()) planes.push_back(s.s);
    }
    o.require(dims == n, "dimensions do not add up");
    Eigen::JacobiSVD<Matrix> svd(a.matrix() * b.matrix());
    std::vector<double> sv;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
      const double s = svd.singularValues()(k);
      if (s > 1e-9 && s < 1 - 1e-9) sv.push_back(s);
    }
    std::sort(planes.begin(), planes.end());
    std::sort(sv.begin(), sv.end());
    if (planes.size() != sv.size()) {
      o.require(false, "plane count differs from SVD");
      continue;
    }
    for (std::size_t k = 0; k < sv.size(); ++k) sdev = std::max(sdev, std::abs(planes[k] - sv[k]));
  }
  o.require(inv <= 1e-9, "invariance residual " + num(inv));
  o.require(sdev <= 1e-9, "s mismatch " + num(sdev));
  o.detail = o.pass ? "invariance " + num(inv) + ", s " + num(sdev) : o.detail;
  return o;
}

Outcome grover() {
  Outcome o;
  const double small = grover_sweep({4, {0}, {0}}).best.success_mass;
  std::vector<Eigen::Index> m, m2;
  for (Eigen::Index i = 0; i < 8; ++i) m.push_back(i), m2.push_back(i + 4);
  const double big = grover_sweep({16, m, m2}).best.success_mass;
  const double empty = grover_sweep({8, {0, 1}, {2, 3}}).best.success_mass;
  o.require(small >= 0.999, "N=4 mass " + num(small));
  o.require(big >= 0.8, "N=16 mass " + num(big));
  o.require(empty <= 0.05, "empty-intersection mass " + num(empty));
  o.detail = o.pass ? "N=4 " + num(small) + ", N=16 " + num(big) + ", empty " + num(empty) : o.detail;
  return o;
}

Outcome amplification() {
  Outcome o;
  const double delta = 0.25, eps = 0.01;
  const auto phases = step_phases(delta, eps * eps / 2).phases.phases;
  double worst = 0;
  int degree = 0;
  double bound = 0;
  for (double a = 0.3; a < 1.0 + 1e-9; a += 0.05) {
    const auto inst = block_encoding_instance(6, {std::min(a, 1.0)}, 801);
    const auto r = fixed_point_aa(inst.U, inst.in, inst.out, delta, eps, phases);
    worst = std::max(worst, r.distance);
    degree = std::max(degree, r.degree);
    bound = r.call_bound;
    o.require(r.within_bound, "call count " + std::to_string(r.degree) + " above " + num(r.call_bound));
  }
  o.require(worst <= eps, "fixed-point distance " + num(worst));
  const auto inst = block_encoding_instance(8, {0.5, 0.5}, 802);
  const double oeps = 0.05;
  const auto ob = oblivious_aa(inst.U, inst.in, inst.out, 0.4, oeps);
  o.require(ob.distance <= oeps + 0.01, "oblivious distance " + num(ob.distance));
  o.detail = o.pass ? "fixed-point " + num(worst) + " at degree " + std::to_string(degree) + " (bound " + num(bound) +
                          "), oblivious " + num(ob.distance)
                    : o.detail;
  return o;
}

Outcome scaling() {
  Outcome o;
  const auto sw = inversion_sweep({2, 4, 8}, 0.9);
  o.require(std::abs(sw.two_way_slope - 1.0) <= 0.3, "two-way slope " + num(sw.two_way_slope));
  o.require(std::abs(sw.one_way_slope - 2.0) <= 0.3, "one-way slope " + num(sw.one_way_slope));
  for (const auto& r : sw.rows) o.require(r.two_way_success >= 0.99, "two-way success " + num(r.two_way_success));
  o.detail = o.pass ? "slopes two-way " + num(sw.two_way_slope) + ", one-way " + num(sw.one_way_slope) : o.detail;
  return o;
}

Outcome group() {
  Outcome o;
  std::mt19937_64 rng(1001);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const auto phi = testing_util::random_list(rng, 1 + rng() % 12, kPi);
    for (const auto& g : {GroupElement::R(), GroupElement::N(), GroupElement::A(), GroupElement::S()}) {
      const auto twice = group_action(g, group_action(g, phi));
      // Reversal and negation are bitwise; the endpoint shifts are congruent mod pi up to
      // the rounding of +-pi/2, which no double represents exactly.
      const bool exact = (g == GroupElement::R() || g == GroupElement::N()) ? twice == phi : phase_distance(twice, phi) <= 1e-15;
      o.require(exact, g.name() + " squared is not the identity");
    }
    const auto rep = group_check(phi);
    worst = std::max(worst, rep.max_deviation);
    o.require(rep.squares_identity, "squares check failed");
  }
  o.require(worst <= 1e-9, "table deviation " + num(worst));
  o.detail = o.pass ? "50 lists, table deviation " + num(worst) : o.detail;
  return o;
}

Outcome cli_integration() {
  Outcome o;
  std::mt19937_64 rng(1101);
  int trips = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + rng() % 16);
    for (auto& x : v) x = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng), static_cast<int>(rng() % 40) - 20);
    Matrix m(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) m.data()[i] = cplx(v[0] * static_cast<double>(i), -v.back());
    const std::vector<io::Document> docs{PhaseList(v), ComplexPoly::real(v), m};
    for (const auto& d : docs) {
      o.require(io::same_document(d, io::parse(io::serialize(d))), std::string("round trip failed for ") + io::kind_name(d));
      ++trips;
    }
  }

  const auto dir = std::filesystem::temp_directory_path() / "qspsem_acceptance";
  std::filesystem::create_directories(dir);
  const auto good = (dir / "t3.json").string(), bad = (dir / "scaled.json").string(), csv = (dir / "inv.csv").string();
  io::write_text(good, io::serialize(ComplexPoly{0.0, -3.0, 0.0, 4.0}));
  io::write_text(bad, io::serialize(ComplexPoly{0.0, -2.4, 0.0, 3.2}));
  const double q = kPi / 4;
  const auto qp = (dir / "quarter.json").string();
  io::write_text(qp, io::serialize(PhaseList{q, q, q}));
  struct Case {
    std::vector<std::string> args;
    int expect;
  };
  const std::vector<Case> cases{{{"synth", good}, 0},
                                {{"synth", bad}, 2},
                                {{"verify", "--kind", "compose", "--grid", "20", qp, qp}, 1},
                                {{"demo", "no-such-demo"}, 64},
                                {{}, 64},
                                {{"--help"}, 0},
                                {{"demo", "distributed-inversion", "--emit", csv}, 0}};
  for (const auto& c : cases) {
    std::ostringstream out, err;
    const int code = cli::run(c.args, out, err);
    o.require(code == c.expect, "exit " + std::to_string(code) + " for case expecting " + std::to_string(c.expect));
  }
  std::ifstream in(csv);
  std::string line;
  std::size_t width = 0, rows = 0;
  bool header = true;
  while (std::getline(in, line)) {
    const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (header) width = cols, header = false;
    else {
      o.require(cols == width, "csv row width " + std::to_string(cols));
      std::stod(line.substr(0, line.find(',')));
      ++rows;
    }
  }
  o.require(width == 6 && rows == 3, "csv shape " + std::to_string(width) + "x" + std::to_string(rows));
  o.detail = o.pass ? std::to_string(trips) + " round trips, " + std::to_string(cases.size()) + " exit codes, csv " +
                          std::to_string(rows) + "x" + std::to_string(width)
                    : o.detail;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {"counterexample", 1, counterexample},       {"chebyshev-semigroup", 1, semigroup},
      {"antisymmetric-properties", 60, property_suite}, {"completion", 30, completion},
      {"singular-value-transform", 120, qsvt},     {"jordan-decomposition", 10, jordan},
      {"grover-scheduling", 10, grover},           {"amplitude-amplification", 30, amplification},
      {"distributed-scaling", 60, scaling},        {"group-actions", 10, group},
      {"cli-integration", 10, cli_integration},
  };
  int failed = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[k].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > all[k].budget) {
      o.pass = false;
      o.detail += "; runtime " + num(secs) + " s over budget " + num(all[k].budget) + " s";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << k + 1 << " " << all[k].name << " (" << std::fixed
              << std::setprecision(2) << secs << " s) " << std::defaultfloat << o.detail << "\n";
  }
  std::cout << (all.size() - static_cast<std::size_t>(failed)) << "/" << all.size() << " criteria pass\n";
  return failed ? 1 : 0;
}
