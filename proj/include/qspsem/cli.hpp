#pragma once

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apps.hpp"
#include "error.hpp"
#include "io.hpp"
#include "nesting.hpp"
#include "qsp.hpp"
#include "qsvt.hpp"
#include "synthesis.hpp"

namespace qspsem::cli {

enum Exit : int { Ok = 0, VerifyFail = 1, Precondition = 2, Numeric = 3, Usage = 64 };

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const CapacityError*>(&e))
    return Precondition;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const InternalConsistencyError*>(&e)) return Numeric;
  return Usage;
}

// Explicit flag, then QSPSEM_TOL, then the command's default.
inline double tolerance(std::optional<double> flag, double fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QSPSEM_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) throw ArgumentError("QSPSEM_TOL must be a positive number");
    return v;
  }
  return fallback;
}

namespace detail {

inline void emit(const io::Document& d, const std::string& path, std::ostream& out) {
  if (path.empty()) out << io::serialize(d);
  else io::write_text(path, io::serialize(d));
}

inline int cmd_synth(const std::string& in, const std::string& out_path, std::optional<double> tol_flag,
                     std::ostream& out) {
  const double tol = tolerance(tol_flag, 1e-10);
  const auto poly = io::expect<ComplexPoly>(io::read_document(in), "synth");
  const auto rep = synthesize_from_P(poly, tol);
  emit(rep.phases.phases, out_path, out);
  out << "synthesis: degree " << rep.phases.phases.degree_bound() << ", residual " << rep.residual << " (tol " << tol
      << ")\n"
      << "  stripping steps " << rep.steps << ", worst sub-leading " << rep.max_subleading << " at step "
      << rep.worst_step << "\n"
      << "  refined " << (rep.refined ? "yes" : "no") << ", extended precision " << (rep.extended ? "yes" : "no")
      << "\n";
  return Ok;
}

inline int cmd_nest(const std::string& mode, const std::string& outer_path, const std::string& inner_path,
                    const std::string& out_path, std::ostream& out) {
  const auto od = io::read_document(outer_path), id = io::read_document(inner_path);
  if (mode == "qsp") {
    const auto o = io::expect<PhaseList>(od, "nest --mode qsp"), i = io::expect<PhaseList>(id, "nest --mode qsp");
    emit(flatten(NestedProtocol(o, i)), out_path, out);
    if (is_antisymmetric(o) && is_antisymmetric(i)) {
      const auto r = commuting_diagram_check(o, i);
      out << "composition: max deviation " << r.max_deviation << (r.commutes ? " (commutes)" : " (FAILS)") << "\n";
    }
    return Ok;
  }
  const auto o = io::expect<QsvtProgram>(od, "nest"), i = io::expect<QsvtProgram>(id, "nest");
  if (mode == "flat") {
    const auto f = flat_nest(o, i);
    emit(f.phases, out_path, out);
    if (is_antisymmetric(o.phases) && is_antisymmetric(i.phases)) {
      const auto r = commuting_diagram_check(o.phases, i.phases);
      out << "composition: max deviation " << r.max_deviation << (r.commutes ? " (commutes)" : " (FAILS)") << "\n";
    }
    if (f.oracle) out << "svt of nested program: max deviation " << verify_svt(f).max_deviation << "\n";
    return Ok;
  }
  const auto d = deep_nest(o, i);
  emit(d, out_path, out);
  out << "deep nest: left projector conjugated by the outer unitary (rank " << d.left.rank() << ")\n";
  if (d.oracle) {
    const Matrix a = qsvt_evaluate(d);
    Matrix b = qsvt_evaluate(deep_nest(o, i, DeepRealization::TransformedOracle));
    if (i.phases.degree_bound() % 2) b = qsvt_evaluate(o) * b;
    out << "  realizations agree to " << qspsem::detail::max_abs(a - b) << "; svt max deviation "
        << verify_svt(d).max_deviation << "\n";
  }
  return Ok;
}

struct VerifyArgs {
  std::string kind;
  std::vector<std::string> inputs;
  int grid = 64;
  double theta = 0.0;
  std::optional<double> tol;
  std::string out_path;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  auto need = [&](std::size_t n) {
    if (a.inputs.size() != n)
      throw ArgumentError("verify --kind " + a.kind + " takes " + std::to_string(n) + " input file(s)");
  };
  io::Report rep;
  rep.name = a.kind;
  std::optional<double> worst_x;
  if (a.kind == "compose" || a.kind == "diagram") {
    need(2);
    const auto o = io::expect<PhaseList>(io::read_document(a.inputs[0]), "verify");
    const auto i = io::expect<PhaseList>(io::read_document(a.inputs[1]), "verify");
    const double tol = tolerance(a.tol, 1e-9);
    if (a.kind == "compose") {
      const auto r = verify_composition(o, i, a.grid, tol);
      rep.pass = r.pass;
      rep.data = {{"max_deviation", r.max_deviation}, {"worst_x", r.worst_x}, {"outer_antisymmetric", r.outer_antisymmetric},
                  {"inner_antisymmetric", r.inner_antisymmetric}};
      worst_x = r.worst_x;
    } else {
      const auto r = commuting_diagram_check(o, i, a.grid, tol);
      rep.pass = r.commutes;
      rep.data = {{"max_deviation", r.max_deviation}, {"nested_antisymmetric", r.nested_antisymmetric}};
    }
    rep.data["tol"] = tol;
  } else if (a.kind == "svt") {
    need(1);
    const double tol = tolerance(a.tol, 1e-8);
    const auto r = verify_svt(io::expect<QsvtProgram>(io::read_document(a.inputs[0]), "verify"), tol);
    rep.pass = r.pass;
    rep.data = {{"max_deviation", r.max_deviation}, {"singular_values", r.singular_values}, {"tol", tol}};
  } else if (a.kind == "twist") {
    need(1);
    const double tol = tolerance(a.tol, 1e-10);
    const auto r = twist_deviation(io::expect<PhaseList>(io::read_document(a.inputs[0]), "verify"), a.theta, a.grid);
    rep.pass = r.max_deviation <= tol;
    rep.data = {{"max_deviation", r.max_deviation}, {"worst_x", r.worst_x}, {"theta", a.theta}, {"tol", tol}};
    worst_x = r.worst_x;
  } else if (a.kind == "group") {
    need(1);
    const double tol = tolerance(a.tol, 1e-9);
    const auto r = group_check(io::expect<PhaseList>(io::read_document(a.inputs[0]), "verify"));
    rep.pass = r.max_deviation <= tol && r.squares_identity;
    rep.data = {{"max_deviation", r.max_deviation}, {"worst_element", r.worst_element},
                {"squares_identity", r.squares_identity}, {"tol", tol}};
  } else {
    throw ArgumentError("unknown verify kind '" + a.kind + "'");
  }
  rep.data["grid"] = a.grid;
  emit(rep, a.out_path, out);
  const double dev = rep.data["max_deviation"].get<double>();
  out << a.kind << ": " << (rep.pass ? "pass" : "FAIL") << ", max deviation " << dev;
  if (!rep.pass && worst_x) out << " at x = " << *worst_x;
  out << "\n";
  return rep.pass ? Ok : VerifyFail;
}

struct DemoArgs {
  std::string name;
  std::string emit;
  std::optional<std::uint64_t> seed;
  Eigen::Index N = 4;
  std::vector<Eigen::Index> m{0}, m2{0};
  double delta = 0.25, eps = 0.01;
  Eigen::Index dim = 4;
  std::vector<double> kappas{2, 4, 8};
  double gamma = 0.9;
};

inline int cmd_demo(const DemoArgs& a, std::ostream& out) {
  std::optional<io::CsvWriter> csv;
  if (a.name == "grover-scheduling") {
    const auto sw = grover_sweep({a.N, a.m, a.m2});
    const auto& b = sw.best;
    out << "grover-scheduling N=" << a.N << ": success mass " << b.success_mass << ", outside mass " << b.outside_mass
        << "\n  best of sweep (" << sw.range << "): "
        << (b.params.mode == SchedulingMode::Reflection
                ? "reflection K=" + std::to_string(b.params.inner) + " K'=" + std::to_string(b.params.outer)
                : "fixed-point delta=" + std::to_string(b.params.inner_delta) +
                      " delta'=" + std::to_string(b.params.outer_delta))
        << "\n  a " << b.a << ", a' " << b.a2 << ", block scalar " << b.scalar << " vs sqrt(|m & m2|/N) "
        << b.reference << "\n";
    csv.emplace(std::vector<std::string>{"mode", "inner", "outer", "inner_delta", "outer_delta", "success_mass",
                                         "outside_mass"});
    for (const auto& r : sw.runs)
      csv->row(r.params.mode == SchedulingMode::Reflection ? "reflection" : "fixed-point", r.params.inner,
               r.params.outer, r.params.inner_delta, r.params.outer_delta, r.success_mass, r.outside_mass);
  } else if (a.name == "fixed-point-aa") {
    const auto ph = step_phases(a.delta, a.eps * a.eps / 2).phases.phases;
    csv.emplace(std::vector<std::string>{"a", "distance", "degree", "call_bound"});
    double worst = 0.0;
    int steps = 0;
    for (double x = a.delta + 0.05; x < 0.95 + 1e-9; x += 0.05, ++steps) {
      const auto inst = block_encoding_instance(a.dim, {x}, a.seed.value_or(1));
      const auto r = fixed_point_aa(inst.U, inst.in, inst.out, a.delta, a.eps, ph);
      worst = std::max(worst, r.distance);
      csv->row(x, r.distance, r.degree, r.call_bound);
    }
    out << "fixed-point-aa delta=" << a.delta << " eps=" << a.eps << ": degree " << ph.degree_bound() << " (bound "
        << 8.0 / a.delta * std::log(1.0 / a.eps) << "), worst distance " << worst << " over " << steps
        << " values of a\n";
  } else if (a.name == "distributed-inversion") {
    const auto sw = inversion_sweep(a.kappas, a.gamma, a.seed);
    csv.emplace(std::vector<std::string>{"kappa", "one_way_total", "two_way_total", "one_way_rounds", "two_way_rounds",
                                         "two_way_success"});
    for (const auto& r : sw.rows) {
      csv->row(r.kappa, r.one_way, r.two_way, r.one_way_rounds, r.two_way_rounds, r.two_way_success);
      out << "kappa " << r.kappa << ": one-way " << r.one_way << " qubits, two-way " << r.two_way << " qubits\n";
    }
    out << "log-log slopes: one-way " << sw.one_way_slope << ", two-way " << sw.two_way_slope << " (gamma "
        << a.gamma << ")\n";
  } else {
    throw ArgumentError("unknown demo '" + a.name + "' (grover-scheduling, fixed-point-aa, distributed-inversion)");
  }
  if (!a.emit.empty()) io::write_text(a.emit, csv->str());
  return Ok;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"QSP/QSVT phase synthesis, nesting and verification", "qspsem"};
  app.require_subcommand(1);

  std::string in, out_path, outer, inner, mode = "qsp";
  std::optional<double> tol;

  auto* synth = app.add_subcommand("synth", "Synthesize phases for a poly document");
  synth->add_option("poly", in, "poly document (monomial coefficients)")->required();
  synth->add_option("-o,--out", out_path, "phases document to write (default: standard output)");
  synth->add_option("--tol", tol, "re-extraction tolerance (default QSPSEM_TOL or 1e-10)");

  auto* nest = app.add_subcommand("nest", "Nest two protocols");
  nest->add_option("--mode", mode, "qsp | flat | deep")->check(CLI::IsMember({"qsp", "flat", "deep"}));
  nest->add_option("outer", outer, "outer phases/program document")->required();
  nest->add_option("inner", inner, "inner phases/program document")->required();
  nest->add_option("-o,--out", out_path, "output document (default: standard output)");

  detail::VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check a nesting or transform identity");
  verify->add_option("--kind", va.kind, "compose | svt | diagram | twist | group")
      ->required()
      ->check(CLI::IsMember({"compose", "svt", "diagram", "twist", "group"}));
  verify->add_option("--grid", va.grid, "number of Chebyshev-Lobatto points")->check(CLI::PositiveNumber);
  verify->add_option("--theta", va.theta, "twist angle");
  verify->add_option("--tol", va.tol, "pass threshold (default QSPSEM_TOL or per-kind default)");
  verify->add_option("inputs", va.inputs, "input documents")->required();
  verify->add_option("-o,--out", va.out_path, "report document (default: standard output)");

  detail::DemoArgs da;
  std::uint64_t seed = 0;
  auto* demo = app.add_subcommand("demo", "Run an application demo");
  demo->add_option("name", da.name, "grover-scheduling | fixed-point-aa | distributed-inversion")->required();
  demo->add_option("--emit", da.emit, "write a CSV of the sweep");
  auto* seed_opt = demo->add_option("--seed", seed, "seed for instance generation / sampled repetition");
  demo->add_option("--N", da.N, "grover: dimension");
  demo->add_option("--m", da.m, "grover: first marked set")->delimiter(',');
  demo->add_option("--m2", da.m2, "grover: second marked set")->delimiter(',');
  demo->add_option("--delta", da.delta, "fixed-point-aa: threshold");
  demo->add_option("--eps", da.eps, "fixed-point-aa: target distance");
  demo->add_option("--dim", da.dim, "fixed-point-aa: dimension");
  demo->add_option("--kappas", da.kappas, "distributed-inversion: condition numbers")->delimiter(',');
  demo->add_option("--gamma", da.gamma, "distributed-inversion: overlap");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return Ok;
    }
    err << "usage error: " << e.what() << "\n" << app.help();
    return Usage;
  }

  try {
    if (*synth) return detail::cmd_synth(in, out_path, tol, out);
    if (*nest) return detail::cmd_nest(mode, outer, inner, out_path, out);
    if (*verify) return detail::cmd_verify(va, out);
    if (seed_opt->count()) da.seed = seed;
    return detail::cmd_demo(da, out);
  } catch (const Error& e) {
    const int code = exit_code(e);
    err << (code == Usage ? "usage error: " : "error: ") << e.what() << "\n";
    return code;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace qspsem::cli
