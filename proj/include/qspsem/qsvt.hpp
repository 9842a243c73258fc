#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "nesting.hpp"
#include "qsp.hpp"

namespace qspsem {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Eigen::Index kMaxDimension = 64;

namespace detail {

inline void require_dimension(Eigen::Index n) {
  if (n > kMaxDimension) throw CapacityError("dimension " + std::to_string(n) + " exceeds the dense cap of 64");
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double unitarity_defect(const Matrix& u) {
  return max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

// Orthonormal basis of the column span (rank decided at 1e-10).
inline Matrix column_basis(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  Eigen::Index r = 0;
  const auto& s = svd.singularValues();
  const double scale = s.size() ? std::max(1.0, s(0)) : 1.0;
  while (r < s.size() && s(r) > 1e-10 * scale) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace detail

class Projector {
 public:
  explicit Projector(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw ArgumentError("projector must be square");
    detail::require_dimension(m_.rows());
    if (detail::max_abs(m_ - m_.adjoint()) > 1e-11) throw ArgumentError("projector is not Hermitian within 1e-11");
    if (detail::max_abs(m_ * m_ - m_) > 1e-10) throw ArgumentError("projector is not idempotent within 1e-10");
  }

  // Orthogonal projector onto the span of the given columns.
  static Projector onto(const Matrix& columns) {
    Matrix q = detail::column_basis(columns);
    return Projector(q * q.adjoint());
  }

  static Projector basis_states(Eigen::Index dim, const std::vector<Eigen::Index>& indices) {
    Matrix m = Matrix::Zero(dim, dim);
    for (auto i : indices) {
      if (i < 0 || i >= dim) throw ArgumentError("basis index out of range");
      m(i, i) = 1.0;
    }
    return Projector(m);
  }

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Eigen::Index rank() const { return static_cast<Eigen::Index>(std::lround(m_.trace().real())); }

  // Orthonormal basis of the image.
  Matrix basis() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
    const Eigen::Index r = rank();
    return es.eigenvectors().rightCols(r);
  }

  Projector conjugated(const Matrix& u) const { return Projector(Matrix(u * m_ * u.adjoint())); }

 private:
  Matrix m_;
};

// Projector onto a set of marked computational basis states.
class MarkedOracle {
 public:
  MarkedOracle(Eigen::Index dim, std::vector<Eigen::Index> marked) : dim_(dim), marked_(std::move(marked)) {
    std::sort(marked_.begin(), marked_.end());
    marked_.erase(std::unique(marked_.begin(), marked_.end()), marked_.end());
  }

  Eigen::Index dim() const { return dim_; }
  const std::vector<Eigen::Index>& marked() const { return marked_; }
  std::size_t count() const { return marked_.size(); }
  bool contains(Eigen::Index i) const { return std::binary_search(marked_.begin(), marked_.end(), i); }
  Projector projector() const { return Projector::basis_states(dim_, marked_); }

 private:
  Eigen::Index dim_;
  std::vector<Eigen::Index> marked_;
};

// e^{i phi (2 Pi - I)} = e^{i phi} Pi + e^{-i phi} (I - Pi).
inline Matrix projector_rotation(const Projector& pi, double phi) {
  const Eigen::Index n = pi.dim();
  const cplx p = std::polar(1.0, phi), m = std::polar(1.0, -phi);
  return p * pi.matrix() + m * (Matrix::Identity(n, n) - pi.matrix());
}

// Condensed program: phases in the canonical QSP convention, left projector
// (output side for odd length), right projector (input side) and an oracle
// slot that may be empty.
struct QsvtProgram {
  PhaseList phases{0.0, 0.0};
  Projector left;
  Projector right;
  std::optional<Matrix> oracle;

  QsvtProgram(PhaseList p, Projector l, Projector r, std::optional<Matrix> u = std::nullopt)
      : phases(std::move(p)), left(std::move(l)), right(std::move(r)), oracle(std::move(u)) {
    if (left.dim() != right.dim()) throw ArgumentError("program projectors differ in dimension");
    if (oracle) {
      if (oracle->rows() != left.dim() || oracle->cols() != left.dim())
        throw ArgumentError("oracle dimension differs from projectors");
      if (detail::unitarity_defect(*oracle) > 1e-11) throw ArgumentError("oracle is not unitary within 1e-11");
    }
  }

  Eigen::Index dim() const { return left.dim(); }
  QsvtProgram bound(const Matrix& u) const { return QsvtProgram(phases, left, right, u); }
};

// The QSP list {phi_0..phi_d} in the interleaved reflection form
// global * e^{i a_0 (2 P_0 - I)} V_1 e^{i a_1 (2 P_1 - I)} ... V_d e^{i a_d (2 Pi - I)}:
// a_0 = phi_0 - pi/4, a_k = phi_k - pi/2, a_d = phi_d - pi/4, global = i^d.
// The dim-2 block of U on each Jordan plane is [[s, c], [c, -s]], and
// e^{i pi/4 Z} W(s) e^{i pi/4 Z} equals i times that, which fixes the offsets.
struct ReflectionForm {
  std::vector<double> angles;  // d + 1 entries, a_d is the trailing rotation on the input projector
  cplx global{1.0, 0.0};
};

inline ReflectionForm reflection_form(const PhaseList& phi) {
  const std::size_t d = phi.size() - 1;
  ReflectionForm f;
  f.angles.resize(d + 1);
  if (d == 0) {
    f.angles[0] = phi[0];
    return f;
  }
  constexpr double q = std::numbers::pi / 4, h = std::numbers::pi / 2;
  f.angles[0] = phi[0] - q;
  for (std::size_t k = 1; k < d; ++k) f.angles[k] = phi[k] - h;
  f.angles[d] = phi[d] - q;
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  f.global = ipow[d % 4];
  return f;
}

// Product of projector rotations and oracle uses. Rotation k acts on the
// right projector when d - k is even and on the left one otherwise; the
// oracle entering from the right projector's side is U, the other is U^dag.
inline Matrix qsvt_product(const std::vector<double>& angles, const Projector& left, const Projector& right,
                           const Matrix& u) {
  const std::size_t d = angles.size() - 1;
  Matrix out = projector_rotation((d % 2 == 0) ? right : left, angles[0]);
  const Matrix ud = u.adjoint();
  for (std::size_t k = 1; k <= d; ++k) {
    const bool to_right = (d - k) % 2 == 0;
    out = out * (to_right ? u : ud) * projector_rotation(to_right ? right : left, angles[k]);
  }
  return out;
}

inline Matrix qsvt_evaluate(const QsvtProgram& prog) {
  if (!prog.oracle) throw PreconditionError("qsvt_evaluate: open slot, bind an oracle first");
  const auto f = reflection_form(prog.phases);
  return f.global * qsvt_product(f.angles, prog.left, prog.right, *prog.oracle);
}

struct SvtReport {
  double max_deviation = 0.0;
  bool pass = false;
  std::vector<double> singular_values;
  int one_dimensional = 0;  // singular values within 1e-9 of 0 or 1
};

// Compares the block of U_Phi with sum_k P(s_k) |w_k><v_k| (odd length) or
// sum_k P(s_k) |v_k><v_k| over Img(right) (even length).
inline SvtReport verify_svt(const QsvtProgram& prog, double tol = 1e-8) {
  if (!prog.oracle) throw PreconditionError("verify_svt: open slot, bind an oracle first");
  const int d = prog.phases.degree_bound();
  const auto p = extract_cheb(prog.phases).P;
  const Matrix& u = *prog.oracle;
  const Matrix vb = prog.right.basis(), wb = prog.left.basis();

  SvtReport rep;
  const Eigen::Index n = prog.dim();
  Matrix target = Matrix::Zero(n, n);
  if (vb.cols() > 0) {
    if (wb.cols() == 0) {
      // Block is identically zero: every s is 0.
      if (d % 2 == 0) target = p(0.0) * vb * vb.adjoint();
      rep.singular_values.assign(static_cast<std::size_t>(vb.cols()), 0.0);
      rep.one_dimensional = static_cast<int>(vb.cols());
    } else {
      Eigen::JacobiSVD<Matrix> svd(wb.adjoint() * u * vb, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Matrix vs = vb * svd.matrixV(), ws = wb * svd.matrixU();
      const auto& sv = svd.singularValues();
      for (Eigen::Index k = 0; k < vs.cols(); ++k) {
        const double s = k < sv.size() ? std::min(sv(k), 1.0) : 0.0;
        rep.singular_values.push_back(s);
        if (s < 1e-9 || s > 1.0 - 1e-9) ++rep.one_dimensional;
        if (d % 2 == 0) target += p(s) * vs.col(k) * vs.col(k).adjoint();
        else if (k < sv.size()) target += p(s) * ws.col(k) * vs.col(k).adjoint();
      }
    }
  }
  const Matrix up = qsvt_evaluate(prog);
  const Matrix block = (d % 2 == 0 ? prog.right.matrix() : prog.left.matrix()) * up * prog.right.matrix();
  rep.max_deviation = detail::max_abs(block - target);
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

struct JordanSubspace {
  Matrix basis;        // n x 1 or n x 2, orthonormal columns
  double s = 0.0;      // |<v|w>| for planes; 1 or 0 for lines
  bool two_dimensional() const { return basis.cols() == 2; }
};

struct JordanDecomposition {
  std::vector<JordanSubspace> subspaces;

  double max_invariance_residual(const Projector& a, const Projector& b) const {
    double worst = 0.0;
    for (const auto& sub : subspaces) {
      const Matrix ps = sub.basis * sub.basis.adjoint();
      const Matrix id = Matrix::Identity(ps.rows(), ps.cols());
      worst = std::max({worst, detail::max_abs((id - ps) * a.matrix() * ps), detail::max_abs((id - ps) * b.matrix() * ps)});
    }
    return worst;
  }
};

// Planes come from the SVD of Va^dag Vb (principal angles between the
// images); lines are the intersections and the leftover complement.
inline JordanDecomposition jordan_decompose(const Projector& a, const Projector& b) {
  if (a.dim() != b.dim()) throw ArgumentError("jordan_decompose: projector dimensions differ");
  const Eigen::Index n = a.dim();
  const Matrix va = a.basis(), vb = b.basis();
  JordanDecomposition out;
  Matrix taken(n, 0);
  auto take = [&](Matrix basis, double s) {
    Matrix t(n, taken.cols() + basis.cols());
    t << taken, basis;
    taken = std::move(t);
    out.subspaces.push_back({std::move(basis), s});
  };
  if (va.cols() > 0 && vb.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(va.adjoint() * vb, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix x = va * svd.matrixU(), y = vb * svd.matrixV();
    const auto& sv = svd.singularValues();
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double s = k < sv.size() ? std::min(sv(k), 1.0) : 0.0;
      if (s > 1.0 - 1e-9) {
        take(x.col(k), 1.0);
      } else if (s < 1e-9) {
        take(x.col(k), 0.0);
      } else {
        // Align phases so <v|w> = s > 0, then complete v to the plane.
        Vector v = x.col(k), w = y.col(k);
        const cplx ip = v.dot(w);
        w *= std::conj(ip) / std::abs(ip);
        Matrix plane(n, 2);
        plane.col(0) = v;
        plane.col(1) = (w - s * v) / std::sqrt((1 - s) * (1 + s));
        take(plane, s);
      }
    }
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      const double s = k < sv.size() ? sv(k) : 0.0;
      if (s < 1e-9) take(y.col(k), 0.0);
    }
  } else {
    for (Eigen::Index k = 0; k < va.cols(); ++k) take(va.col(k), 0.0);
    for (Eigen::Index k = 0; k < vb.cols(); ++k) take(vb.col(k), 0.0);
  }
  // Whatever is left is annihilated by both projectors.
  Matrix rest = Matrix::Identity(n, n) - taken * taken.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rest);
  for (Eigen::Index k = 0; k < n; ++k)
    if (es.eigenvalues()(k) > 0.5) take(es.eigenvectors().col(k), 0.0);
  return out;
}

namespace detail {

inline bool same_matrix(const Matrix& a, const Matrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && max_abs(a - b) <= tol;
}

}  // namespace detail

// Shared projectors and oracle slot; the phase lists are nested as QSP lists.
inline QsvtProgram flat_nest(const QsvtProgram& outer, const QsvtProgram& inner) {
  if (!detail::same_matrix(outer.left.matrix(), inner.left.matrix(), 1e-12) ||
      !detail::same_matrix(outer.right.matrix(), inner.right.matrix(), 1e-12))
    throw PreconditionError("flat nesting requires shared projectors");
  if (outer.oracle && inner.oracle && !detail::same_matrix(*outer.oracle, *inner.oracle, 1e-12))
    throw PreconditionError("flat nesting requires a shared oracle slot");
  std::optional<Matrix> u = outer.oracle ? outer.oracle : inner.oracle;
  return QsvtProgram(flatten(NestedProtocol(outer.phases, inner.phases)), outer.left, outer.right, u);
}

// Which circuit realizes a deep nest.
enum class DeepRealization {
  ConjugatedProjector,  // left projector replaced by U_outer Pi U_outer^dag
  TransformedOracle,    // oracle replaced by U_outer^dag U
};

// Deep nest of `inner` under `outer`: the outer protocol's unitary conjugates
// the inner program's left projector. Needs the outer oracle; the inner slot
// may stay open.
inline QsvtProgram deep_nest(const QsvtProgram& outer, const QsvtProgram& inner,
                             DeepRealization how = DeepRealization::ConjugatedProjector) {
  if (outer.dim() != inner.dim()) throw ArgumentError("deep_nest: dimensions differ");
  const Matrix uo = qsvt_evaluate(outer);
  if (how == DeepRealization::ConjugatedProjector)
    return QsvtProgram(inner.phases, inner.left.conjugated(uo), inner.right, inner.oracle);
  if (!inner.oracle) throw PreconditionError("deep_nest: the transformed-oracle form needs the inner oracle bound");
  return QsvtProgram(inner.phases, inner.left, inner.right, Matrix(uo.adjoint() * *inner.oracle));
}

// Two open slots: outer and inner oracles are supplied at evaluation time.
struct DeepNest {
  QsvtProgram outer;
  QsvtProgram inner;

  Matrix evaluate(const Matrix& outer_oracle, const Matrix& inner_oracle,
                  DeepRealization how = DeepRealization::ConjugatedProjector) const {
    return qsvt_evaluate(deep_nest(outer.bound(outer_oracle), inner.bound(inner_oracle), how));
  }
};

}  // namespace qspsem
