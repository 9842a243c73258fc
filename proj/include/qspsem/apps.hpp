#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "poly.hpp"
#include "qsvt.hpp"
#include "synthesis.hpp"

namespace qspsem {

namespace detail {

inline void require_unitary(const Matrix& u, const char* who) {
  if (u.rows() != u.cols()) throw ArgumentError(std::string(who) + ": oracle must be square");
  require_dimension(u.rows());
  if (unitarity_defect(u) > 1e-11) throw ArgumentError(std::string(who) + ": oracle is not unitary within 1e-11");
}

inline Matrix haar_unitary(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
  return q;
}

// Hermitian square root of a positive semidefinite matrix.
inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix hadamard_transform(Eigen::Index n) {
  Matrix h(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      h(i, j) = (std::popcount(static_cast<std::uint64_t>(i & j)) % 2 ? -s : s);
  return h;
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sx += x[k], sy += y[k], sxx += x[k] * x[k], sxy += x[k] * y[k];
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

// Unitary U with projectors whose block out * U * in has the given singular
// values; in, out and the leaked directions occupy disjoint random subspaces.
struct BlockEncodingInstance {
  Matrix U;
  Projector in;
  Projector out;
};

inline BlockEncodingInstance block_encoding_instance(Eigen::Index dim, const std::vector<double>& sv, std::uint64_t seed) {
  const auto r = static_cast<Eigen::Index>(sv.size());
  if (r == 0 || 3 * r > dim) throw ArgumentError("block_encoding_instance: need 1 <= rank and 3*rank <= dim");
  detail::require_dimension(dim);
  for (double s : sv)
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("block_encoding_instance: singular values must lie in [0,1]");
  std::mt19937_64 rng(seed);
  const Matrix h = detail::haar_unitary(dim, rng);

  // Build in the frame of h: column k goes to s_k e_{r+k} + c_k e_{2r+k}.
  Matrix fixed = Matrix::Zero(dim, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    fixed(r + k, k) = sv[k];
    fixed(2 * r + k, k) = std::sqrt((1 - sv[k]) * (1 + sv[k]));
  }
  Matrix seedm(dim, dim);
  seedm << fixed, detail::haar_unitary(dim, rng).leftCols(dim - r);
  Eigen::HouseholderQR<Matrix> qr(seedm);
  Matrix b = qr.householderQ() * Matrix::Identity(dim, dim);
  for (Eigen::Index k = 0; k < r; ++k) b.col(k) = fixed.col(k);
  // Columns r.. are orthogonal to span(fixed) by construction of the QR, so b is unitary.

  std::vector<Eigen::Index> in_idx, out_idx;
  for (Eigen::Index k = 0; k < r; ++k) in_idx.push_back(k), out_idx.push_back(r + k);
  const Matrix pin = Projector::basis_states(dim, in_idx).matrix();
  const Matrix pout = Projector::basis_states(dim, out_idx).matrix();
  return {h * b * h.adjoint(), Projector(Matrix(h * pin * h.adjoint())), Projector(Matrix(h * pout * h.adjoint()))};
}

// Phases of the odd step polynomial used by both amplifiers.
inline SynthesisReport step_phases(double delta, double eps) {
  return synthesize_from_P(approx_step(delta, eps), 1e-8);
}

struct AAResult {
  double a = 0.0;               // largest singular value of the block
  int degree = 0;               // uses of U and U^dag
  int iterations = 0;           // (degree - 1) / 2 amplification rounds
  double call_bound = 0.0;      // 8 ln(1/eps) / delta
  bool within_bound = false;
  double distance = 0.0;        // worst distance to the good state(s)
  std::vector<double> distances;  // oblivious: one per basis vector of Img(in)
  Vector state;                 // fixed point: output state
  PhaseList phases{0.0, 0.0};
};

namespace detail {

inline void check_aa_args(const Matrix& u, const Projector& pi, const Projector& pit, double delta, double eps,
                          const char* who) {
  require_unitary(u, who);
  if (pi.dim() != u.rows() || pit.dim() != u.rows()) throw ArgumentError(std::string(who) + ": projector dimension differs from U");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError(std::string(who) + ": delta must lie in (0,1)");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError(std::string(who) + ": eps must lie in (0,1)");
}

inline void fill_counts(AAResult& r, double delta, double eps) {
  r.degree = r.phases.degree_bound();
  r.iterations = (r.degree - 1) / 2;
  r.call_bound = 8.0 / delta * std::log(1.0 / eps);
  r.within_bound = r.degree <= r.call_bound;
}

}  // namespace detail

// Drives the top right singular vector v of pit * U * pi onto its partner w.
// `phases` may carry a precomputed step list for (delta, eps^2 / 2).
inline AAResult fixed_point_aa(const Matrix& U, const Projector& pi, const Projector& pit, double delta, double eps,
                               std::optional<PhaseList> phases = std::nullopt) {
  detail::check_aa_args(U, pi, pit, delta, eps, "fixed_point_aa");
  const Matrix block = pit.matrix() * U * pi.matrix();
  Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
  AAResult r;
  r.a = svd.singularValues()(0);
  if (!(r.a > delta)) throw PreconditionError("fixed_point_aa: block norm a = " + std::to_string(r.a) + " does not exceed delta");
  const Vector v = svd.matrixV().col(0);
  const Vector w = block * v / r.a;

  if (r.a >= 1.0 - 1e-12) r.phases = PhaseList{0.0, 0.0};
  else r.phases = phases ? *phases : step_phases(delta, eps * eps / 2).phases.phases;
  r.state = qsvt_evaluate(QsvtProgram(r.phases, pit, pi, U)) * v;
  r.distance = (r.state - w).norm();
  detail::fill_counts(r, delta, eps);
  return r;
}

// Amplifies every singular value of pit * U * pi at once; requires them to be
// nearly equal so the block is close to a * (isometry).
inline AAResult oblivious_aa(const Matrix& U, const Projector& pi, const Projector& pit, double delta, double eps,
                             std::optional<PhaseList> phases = std::nullopt) {
  detail::check_aa_args(U, pi, pit, delta, eps, "oblivious_aa");
  const Matrix vb = pi.basis(), wb = pit.basis();
  if (vb.cols() == 0) throw PreconditionError("oblivious_aa: input projector is zero");
  Eigen::JacobiSVD<Matrix> svd(wb.adjoint() * U * vb, Eigen::ComputeFullU | Eigen::ComputeFullV);
  std::vector<double> s(static_cast<std::size_t>(vb.cols()), 0.0);
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) s[static_cast<std::size_t>(k)] = svd.singularValues()(k);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  if (*hi - *lo > eps)
    throw PreconditionError("oblivious_aa: singular values spread over " + std::to_string(*hi - *lo) +
                            " > eps; the block is not proportional to an isometry");
  AAResult r;
  r.a = *hi;
  if (!(*lo > delta)) throw PreconditionError("oblivious_aa: smallest singular value does not exceed delta");

  // Polar isometry Img(in) -> Img(out).
  const Eigen::Index rk = std::min(vb.cols(), wb.cols());
  const Matrix iso = wb * svd.matrixU().leftCols(rk) * svd.matrixV().leftCols(rk).adjoint() * vb.adjoint();

  if (*lo >= 1.0 - 1e-12) r.phases = PhaseList{0.0, 0.0};
  else r.phases = phases ? *phases : step_phases(delta, eps).phases.phases;
  const Matrix out = pit.matrix() * qsvt_evaluate(QsvtProgram(r.phases, pit, pi, U));
  for (Eigen::Index k = 0; k < vb.cols(); ++k) {
    const double d = (iso * vb.col(k) - out * vb.col(k)).norm();
    r.distances.push_back(d);
    r.distance = std::max(r.distance, d);
  }
  detail::fill_counts(r, delta, eps);
  return r;
}

// ---------------------------------------------------------------------------
// Scheduling two marked-set searches.

struct SchedulingInstance {
  Eigen::Index N = 4;
  std::vector<Eigen::Index> m;
  std::vector<Eigen::Index> m2;
};

enum class SchedulingMode {
  Reflection,  // inner and outer loops of pi/2 reflections, K and K' times
  FixedPoint,  // inner and outer step programs with thresholds delta, delta'
};

struct SchedulingParams {
  SchedulingMode mode = SchedulingMode::Reflection;
  int inner = 1;
  int outer = 0;
  double inner_delta = 0.5;
  double outer_delta = 0.5;
  double eps = 0.01;
};

struct SchedulingResult {
  SchedulingParams params;
  Vector state;
  double success_mass = 0.0;  // on m and m2 together
  double outside_mass = 0.0;
  double a = 0.0;             // |Pi_m H|0>|
  double a2 = 0.0;            // |Pi_m2 U_m H|0>|, the outer block scalar
  double scalar = 0.0;        // |Pi_m2 Pi_m H|0>|
  double reference = 0.0;     // sqrt(|m and m2| / N) from set sizes
  int oracle_calls = 0;
};

namespace detail {

inline void require_power_of_two(Eigen::Index n) {
  if (n < 2 || (n & (n - 1)) != 0) throw ArgumentError("scheduling: N must be a power of two >= 2");
  if (n > kMaxDimension) throw CapacityError("scheduling: N exceeds the dense cap of 64");
}

// Cache of step phases keyed by (delta, eps).
class StepCache {
 public:
  const PhaseList& get(double delta, double eps) {
    auto key = std::make_pair(delta, eps);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, step_phases(delta, eps).phases.phases).first;
    return it->second;
  }

 private:
  std::map<std::pair<double, double>, PhaseList> cache_;
};

inline SchedulingResult grover_scheduling_with(const SchedulingInstance& inst, const SchedulingParams& par,
                                               StepCache& cache) {
  require_power_of_two(inst.N);
  const Eigen::Index n = inst.N;
  const MarkedOracle om(n, inst.m), om2(n, inst.m2);
  for (auto i : om.marked())
    if (i < 0 || i >= n) throw ArgumentError("scheduling: marked index out of range");
  for (auto i : om2.marked())
    if (i < 0 || i >= n) throw ArgumentError("scheduling: marked index out of range");
  const Projector pm = om.projector(), pm2 = om2.projector();
  const Projector zero = Projector::basis_states(n, {0});
  const Matrix h = hadamard_transform(n);
  const Matrix id = Matrix::Identity(n, n);
  const Vector u = h.col(0);

  SchedulingResult r;
  r.params = par;
  r.a = (pm.matrix() * u).norm();
  std::size_t both = 0;
  for (auto i : om.marked()) both += om2.contains(i);
  r.reference = std::sqrt(static_cast<double>(both) / static_cast<double>(n));
  r.scalar = (pm2.matrix() * pm.matrix() * u).norm();

  Matrix inner;  // maps |0> to the inner output state
  if (par.mode == SchedulingMode::Reflection) {
    // Reflections are (-i) e^{i pi/2 (2P - I)} = 2P - I; signs below are global.
    const Matrix ru = id - 2 * u * u.adjoint(), rm = id - 2 * pm.matrix();
    Matrix um = id;
    for (int k = 0; k < par.inner; ++k) um = ru * rm * um;
    inner = um * h;
    // Deep embedding: the outer loop reflects about the inner output state.
    const Projector conj = zero.conjugated(inner);
    const Matrix rc = id - 2 * conj.matrix(), rm2 = id - 2 * pm2.matrix();
    Matrix outer = id;
    for (int k = 0; k < par.outer; ++k) outer = rc * rm2 * outer;
    r.state = outer * inner.col(0);
    r.oracle_calls = par.inner + par.outer * (2 * par.inner + 1);
  } else {
    const QsvtProgram ip(cache.get(par.inner_delta, par.eps), pm, zero, h);
    inner = qsvt_evaluate(ip);
    const QsvtProgram op(cache.get(par.outer_delta, par.eps), pm2, zero, inner);
    r.state = qsvt_evaluate(op).col(0);
    r.oracle_calls = ip.phases.degree_bound() * op.phases.degree_bound();
  }
  r.a2 = (pm2.matrix() * inner.col(0)).norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::norm(r.state(i));
    if (om.contains(i) && om2.contains(i)) r.success_mass += p;
    else r.outside_mass += p;
  }
  return r;
}

}  // namespace detail

inline SchedulingResult grover_scheduling(const SchedulingInstance& inst, const SchedulingParams& par = {}) {
  detail::StepCache cache;
  return detail::grover_scheduling_with(inst, par, cache);
}

struct SchedulingSweep {
  SchedulingResult best;
  std::vector<SchedulingResult> runs;
  std::string range;
};

// Reflection loops K, K' in [0, 5]; step thresholds in {0.2, ..., 0.7} with eps 0.01.
inline SchedulingSweep grover_sweep(const SchedulingInstance& inst) {
  SchedulingSweep out;
  out.range = "reflection K,K' in [0,5]; fixed-point delta,delta' in {0.2,0.3,0.4,0.5,0.6,0.7}, eps 0.01";
  detail::StepCache cache;
  for (int k = 0; k <= 5; ++k)
    for (int k2 = 0; k2 <= 5; ++k2)
      out.runs.push_back(detail::grover_scheduling_with(inst, {SchedulingMode::Reflection, k, k2, 0, 0, 0}, cache));
  const double deltas[] = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  for (double d1 : deltas)
    for (double d2 : deltas)
      out.runs.push_back(detail::grover_scheduling_with(inst, {SchedulingMode::FixedPoint, 0, 0, d1, d2, 0.01}, cache));
  out.best = *std::max_element(out.runs.begin(), out.runs.end(), [](const auto& x, const auto& y) {
    return x.success_mass < y.success_mass;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Two-party inversion: Alice holds A, Bob holds b.

enum class CommModel { OneWayBobToAlice, TwoWay };
enum class Direction { BobToAlice, AliceToBob };

inline const char* to_string(CommModel m) { return m == CommModel::TwoWay ? "two-way" : "one-way"; }

struct CommEntry {
  int round = 0;
  Direction direction = Direction::BobToAlice;
  int qubits = 0;
};

class CommLedger {
 public:
  void send(int round, Direction d, int qubits) {
    if (round < rounds_) throw InternalConsistencyError("ledger: rounds must be nondecreasing");
    if (qubits < 0) throw InternalConsistencyError("ledger: negative message size");
    rounds_ = round;
    entries_.push_back({round, d, qubits});
    (d == Direction::BobToAlice ? bob_to_alice_ : alice_to_bob_) += qubits;
  }

  int rounds() const { return rounds_; }
  long long total() const { return bob_to_alice_ + alice_to_bob_; }
  long long bob_to_alice() const { return bob_to_alice_; }
  long long alice_to_bob() const { return alice_to_bob_; }
  const std::vector<CommEntry>& entries() const { return entries_; }

 private:
  int rounds_ = 0;
  long long bob_to_alice_ = 0, alice_to_bob_ = 0;
  std::vector<CommEntry> entries_;
};

struct DistributedInstance {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double kappa = 1.0;
  double gamma = 1.0;
  CommModel model = CommModel::OneWayBobToAlice;

  // kappa = sigma_max / sigma_min over the nonzero singular values,
  // gamma = |A A^+ b| / |b|.
  static std::pair<double, double> measure(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() == 0 || a.cols() == 0 || a.rows() != b.size()) throw ArgumentError("distributed: A and b shapes disagree");
    if (a.rows() > 16 || a.cols() > 16) throw CapacityError("distributed: A exceeds 16x16");
    if (!(b.norm() > 0)) throw ArgumentError("distributed: b must be nonzero");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0)) throw PreconditionError("distributed: infeasible, A is zero");
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > 1e-12 * s(0)) ++r;
    const Eigen::MatrixXd ur = svd.matrixU().leftCols(r);
    return {s(0) / s(r - 1), (ur * (ur.transpose() * b)).norm() / b.norm()};
  }

  static DistributedInstance make(Eigen::MatrixXd a, Eigen::VectorXd b, CommModel model) {
    const auto [k, g] = measure(a, b);
    return {std::move(a), std::move(b), k, g, model};
  }

  void validate() const {
    const auto [k, g] = measure(A, b);
    if (!(kappa >= 1.0) || !(gamma >= 0.0 && gamma <= 1.0))
      throw ArgumentError("distributed: need kappa >= 1 and 0 <= gamma <= 1");
    if (std::abs(k - kappa) > 1e-9 * std::max(1.0, kappa) || std::abs(g - gamma) > 1e-9)
      throw ArgumentError("distributed: stored kappa/gamma disagree with A and b");
  }
};

// Sweep instance: A = [diag(1, 1/kappa); 0], b = gamma e1 + sqrt(1 - gamma^2) e3.
inline DistributedInstance scaling_instance(double kappa, double gamma, CommModel model) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0 / kappa;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
  b(0) = gamma;
  b(2) = std::sqrt((1 - gamma) * (1 + gamma));
  return DistributedInstance::make(a, b, model);
}

struct InversionResult {
  CommLedger ledger;
  Eigen::VectorXcd state;           // Alice's register after a successful run, normalized
  double fidelity = 0.0;            // |<A^+ b|state>|^2 with A^+ b normalized
  double success_probability = 0.0; // per attempt
  int attempts = 1;
  int degree = 0;                   // two-way: length of the amplification program minus one
  double reflection_check = 0.0;    // conjugated-projector rotation vs U (2P - I) U^dag
};

namespace detail {

struct Dilation {
  Matrix U;             // 2k x 2k, top block is M = sigma_min A^+
  Eigen::Index k = 0;
  Vector start;         // |0>|b>
  Vector target;        // |0>|A^+ b> normalized
};

inline Dilation dilate(const DistributedInstance& inst) {
  const Eigen::Index m = inst.A.rows(), n = inst.A.cols(), k = std::max(m, n);
  const Eigen::MatrixXd a = inst.A / inst.A.jacobiSvd().singularValues()(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > 1e-12) ++r;
  const double smin = s(r - 1);
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index j = 0; j < r; ++j) pinv += svd.matrixV().col(j) * svd.matrixU().col(j).transpose() / s(j);

  Matrix mm = Matrix::Zero(k, k);
  mm.topLeftCorner(n, m) = (smin * pinv).cast<cplx>();
  const Matrix idk = Matrix::Identity(k, k);
  Dilation d;
  d.k = k;
  d.U.resize(2 * k, 2 * k);
  d.U << mm, psd_sqrt(idk - mm * mm.adjoint()), psd_sqrt(idk - mm.adjoint() * mm), -mm.adjoint();
  if (unitarity_defect(d.U) > 1e-10) throw InternalConsistencyError("distributed: dilation is not unitary");
  d.start = Vector::Zero(2 * k);
  d.start.head(m) = (inst.b / inst.b.norm()).cast<cplx>();
  d.target = Vector::Zero(2 * k);
  const Eigen::VectorXd x = pinv * inst.b;
  d.target.head(n) = (x / x.norm()).cast<cplx>();
  return d;
}

inline int register_qubits(Eigen::Index m) {
  return std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(m)) - 1e-12)));
}

}  // namespace detail

// `seed` switches the one-way repetition count from the expectation
// ceil(1/p) to a geometric sample.
inline InversionResult distributed_inversion(const DistributedInstance& inst,
                                             std::optional<std::uint64_t> seed = std::nullopt) {
  inst.validate();
  if (inst.gamma < 1e-12) throw PreconditionError("distributed: infeasible, b is orthogonal to the column space of A");
  const auto dl = detail::dilate(inst);
  const Eigen::Index dim = 2 * dl.k;
  const int q = detail::register_qubits(dl.k);
  std::vector<Eigen::Index> top(static_cast<std::size_t>(dl.k));
  for (Eigen::Index i = 0; i < dl.k; ++i) top[static_cast<std::size_t>(i)] = i;
  const Projector good = Projector::basis_states(dim, top);
  const Projector start = Projector::onto(dl.start);

  InversionResult r;
  Vector psi;
  if (inst.model == CommModel::OneWayBobToAlice) {
    psi = dl.U * dl.start;
    r.success_probability = (good.matrix() * psi).squaredNorm();
    const double p = r.success_probability;
    if (seed) {
      std::mt19937_64 rng(*seed);
      r.attempts = 1 + std::geometric_distribution<int>(p)(rng);
    } else {
      r.attempts = std::max(1, static_cast<int>(std::ceil(1.0 / p - 1e-9)));
    }
    for (int k = 1; k <= r.attempts; ++k) r.ledger.send(k, Direction::BobToAlice, q);
    r.degree = 1;
  } else {
    const double a = (good.matrix() * dl.U * dl.start).norm();
    const PhaseList phases = a >= 1.0 - 1e-12 ? PhaseList{0.0, 0.0}
                                              : step_phases(std::min(inst.gamma / inst.kappa, 0.999), 0.005).phases.phases;
    const auto form = reflection_form(phases);
    const std::size_t d = form.angles.size() - 1;
    r.degree = static_cast<int>(d);
    const Matrix ud = dl.U.adjoint();

    // Bob prepares |0>|b>; his first rotation only multiplies it by a phase.
    int round = 1;
    psi = std::polar(1.0, form.angles[d]) * dl.start;
    r.ledger.send(round, Direction::BobToAlice, q);
    for (std::size_t k = d; k-- > 0;) {
      psi = ((d - k - 1) % 2 == 0 ? dl.U : ud) * psi;  // Alice
      if ((d - k) % 2 == 0) {
        // Reflection about |0>|b>: the register travels to Bob and back.
        ++round;
        r.ledger.send(round, Direction::AliceToBob, q + 1);
        psi = projector_rotation(start, form.angles[k]) * psi;
        r.ledger.send(round, Direction::BobToAlice, q + 1);
      } else {
        psi = projector_rotation(good, form.angles[k]) * psi;  // Alice
      }
    }
    psi *= form.global;
    const Vector direct = qsvt_evaluate(QsvtProgram(phases, good, start, dl.U)) * dl.start;
    if ((direct - psi).norm() > 1e-10) throw InternalConsistencyError("distributed: message-passing run disagrees with the program");
    r.success_probability = (good.matrix() * psi).squaredNorm();
    r.reflection_check = detail::max_abs(cplx(0, -1) * projector_rotation(start.conjugated(dl.U), std::numbers::pi / 2) -
                                         dl.U * (2 * start.matrix() - Matrix::Identity(dim, dim)) * ud);
  }
  const Vector hit = good.matrix() * psi;
  r.state = hit.head(dl.k) / hit.norm();
  r.fidelity = std::norm(dl.target.head(dl.k).dot(r.state));
  return r;
}

struct ScalingRow {
  double kappa = 0.0;
  long long one_way = 0;
  long long two_way = 0;
  int one_way_rounds = 0;
  int two_way_rounds = 0;
  double two_way_success = 0.0;
};

struct ScalingSweep {
  std::vector<ScalingRow> rows;
  double one_way_slope = 0.0;  // d log(total) / d log(kappa)
  double two_way_slope = 0.0;
};

inline ScalingSweep inversion_sweep(const std::vector<double>& kappas, double gamma,
                                    std::optional<std::uint64_t> seed = std::nullopt) {
  if (kappas.size() < 2) throw ArgumentError("inversion_sweep: need at least two kappa values");
  ScalingSweep out;
  std::vector<double> lk, l1, l2;
  for (double k : kappas) {
    const auto one = distributed_inversion(scaling_instance(k, gamma, CommModel::OneWayBobToAlice), seed);
    const auto two = distributed_inversion(scaling_instance(k, gamma, CommModel::TwoWay));
    out.rows.push_back({k, one.ledger.total(), two.ledger.total(), one.ledger.rounds(), two.ledger.rounds(),
                        two.success_probability});
    lk.push_back(std::log(k));
    l1.push_back(std::log(static_cast<double>(one.ledger.total())));
    l2.push_back(std::log(static_cast<double>(two.ledger.total())));
  }
  out.one_way_slope = detail::least_squares_slope(lk, l1);
  out.two_way_slope = detail::least_squares_slope(lk, l2);
  return out;
}

}  // namespace qspsem
