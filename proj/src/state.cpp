#include "qmeasure/state.hpp"

#include <cmath>

#include "qmeasure/errors.hpp"
#include "qmeasure/tolerances.hpp"

namespace qmeasure {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

StateVector::StateVector(SubsystemLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != layout_.total_dim()) {
    throw ShapeError("state has " + std::to_string(amps_.size()) + " amplitudes, layout needs " +
                     std::to_string(layout_.total_dim()));
  }
  if (!amps_.allFinite()) throw NormalizationError("state has non-finite amplitudes");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > tol::kConstruction) {
    throw NormalizationError("state norm deviates from 1 by " + fmt_double(norm - 1.0));
  }
}

StateVector StateVector::normalized(SubsystemLayout layout, Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NormalizationError("cannot normalize a zero vector");
  return StateVector(std::move(layout), amplitudes / norm);
}

StateVector StateVector::basis(SubsystemLayout layout, std::size_t index) {
  if (index >= layout.total_dim()) throw ShapeError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(layout), std::move(v));
}

StateVector StateVector::qubit(Complex alpha, Complex beta, std::string label) {
  Vector v(2);
  v << alpha, beta;
  return StateVector(SubsystemLayout::single(std::move(label), 2), std::move(v));
}

DensityMatrix::DensityMatrix(SubsystemLayout layout, Matrix entries)
    : layout_(std::move(layout)), rho_(std::move(entries)) {
  const auto d = static_cast<Eigen::Index>(layout_.total_dim());
  if (rho_.rows() != d || rho_.cols() != d) throw ShapeError("density matrix shape does not match layout");
  if (!all_finite(rho_)) throw NormalizationError("density matrix has non-finite entries");
  const double asym = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol::kConstruction) throw InvariantError("density matrix not Hermitian: " + fmt_double(asym));
  const double tr = rho_.trace().real();
  if (std::abs(tr - 1.0) > tol::kConstruction) {
    throw NormalizationError("density matrix trace deviates from 1 by " + fmt_double(tr - 1.0));
  }
  const double lowest = hermitian_eigenvalues(rho_)(0);
  if (lowest < -tol::kEigenSlack) {
    throw InvariantError("density matrix has negative eigenvalue " + fmt_double(lowest));
  }
}

DensityMatrix DensityMatrix::maximally_mixed(SubsystemLayout layout) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  return DensityMatrix(std::move(layout), Matrix::Identity(d, d) / static_cast<double>(d));
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

StateVector dominant_state(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.entries());
  Vector v = solver.eigenvectors().col(solver.eigenvectors().cols() - 1);
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::conj(v(k)) / std::abs(v(k));
  return StateVector::normalized(rho.layout(), std::move(v));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  SubsystemLayout layout = a.layout().concat(b.layout());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  Vector out(static_cast<Eigen::Index>(layout.total_dim()));
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    out.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  }
  // Product of unit vectors; renormalize only to shave rounding.
  return StateVector::normalized(std::move(layout), std::move(out));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  SubsystemLayout layout = a.layout().concat(b.layout());
  const auto na = a.entries().rows();
  const auto nb = b.entries().rows();
  Matrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.entries()(i, j) * b.entries();
  }
  return DensityMatrix(std::move(layout), std::move(out));
}

DensityMatrix to_density(const StateVector& psi) {
  Matrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(psi.layout(), std::move(rho));
}

DensityMatrix mix(std::span<const EnsembleMember> ensemble) {
  if (ensemble.empty()) throw NormalizationError("empty ensemble");
  const SubsystemLayout& layout = ensemble.front().state.layout();
  double total = 0.0;
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  Matrix rho = Matrix::Zero(d, d);
  for (const auto& member : ensemble) {
    if (!(member.probability >= 0.0)) throw NormalizationError("negative ensemble probability");
    if (!(member.state.layout() == layout)) throw ShapeError("ensemble states have different layouts");
    total += member.probability;
    rho += member.probability * (member.state.amplitudes() * member.state.amplitudes().adjoint());
  }
  if (std::abs(total - 1.0) > tol::kConstruction) {
    throw NormalizationError("ensemble probabilities sum to " + std::to_string(total));
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(layout, std::move(rho));
}

namespace {

void check_keep(const SubsystemLayout& layout, std::span<const std::string> keep) {
  if (keep.empty()) throw LayoutError("partial trace needs at least one kept factor");
  for (const auto& label : keep) (void)layout.position(label);
}

// Kept labels in layout order, so the output layout and index order agree.
std::vector<std::string> ordered_keep(const SubsystemLayout& layout, std::span<const std::string> keep) {
  SubsystemLayout kept = layout.select(keep);
  std::vector<std::string> out;
  for (const auto& f : kept.factors()) out.push_back(f.label);
  return out;
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  check_keep(rho.layout(), keep);
  const auto labels = ordered_keep(rho.layout(), keep);
  const FactorSplit split = split_factors(rho.layout(), labels);
  const auto dk = static_cast<Eigen::Index>(split.target_offsets.size());
  const Matrix& m = rho.entries();
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (std::size_t t : split.rest_offsets) {
        acc += m(static_cast<Eigen::Index>(split.target_offsets[i] + t),
                 static_cast<Eigen::Index>(split.target_offsets[j] + t));
      }
      out(i, j) = acc;
    }
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(rho.layout().select(labels), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep) {
  return partial_trace(rho, std::span<const std::string>(keep.begin(), keep.size()));
}

DensityMatrix reduced_state(const StateVector& psi, std::span<const std::string> keep) {
  check_keep(psi.layout(), keep);
  const auto labels = ordered_keep(psi.layout(), keep);
  const FactorSplit split = split_factors(psi.layout(), labels);
  // Reshape amplitudes into (kept x traced) and form M M^dagger.
  const auto dk = static_cast<Eigen::Index>(split.target_offsets.size());
  const auto dt = static_cast<Eigen::Index>(split.rest_offsets.size());
  Matrix block(dk, dt);
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index t = 0; t < dt; ++t) block(i, t) = psi[split.target_offsets[i] + split.rest_offsets[t]];
  }
  Matrix out = block * block.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(psi.layout().select(labels), std::move(out));
}

DensityMatrix reduced_state(const StateVector& psi, std::initializer_list<std::string> keep) {
  return reduced_state(psi, std::span<const std::string>(keep.begin(), keep.size()));
}

bool is_unitary(const Matrix& u, double tolerance) {
  if (u.rows() != u.cols() || u.rows() == 0) return false;
  const Matrix gram = u.adjoint() * u;
  return (gram - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

namespace detail {

Matrix apply_local_rows(const Matrix& m, const Matrix& op, const FactorSplit& split) {
  const auto dt = static_cast<Eigen::Index>(split.target_offsets.size());
  if (op.cols() != dt || op.rows() != dt) {
    throw ShapeError("operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                     ", target factors have dimension " + std::to_string(dt));
  }
  Matrix out(m.rows(), m.cols());
  Vector slice(dt);
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    for (std::size_t r : split.rest_offsets) {
      for (Eigen::Index t = 0; t < dt; ++t) slice(t) = m(static_cast<Eigen::Index>(r + split.target_offsets[t]), col);
      const Vector image = op * slice;
      for (Eigen::Index t = 0; t < dt; ++t) out(static_cast<Eigen::Index>(r + split.target_offsets[t]), col) = image(t);
    }
  }
  return out;
}

}  // namespace detail

namespace {

void require_unitary(const Matrix& u) {
  if (u.rows() != u.cols()) throw ShapeError("unitary must be square");
  if (!is_unitary(u, tol::kCompleteness)) throw UnitarityError("matrix is not unitary within 1e-10");
}

}  // namespace

StateVector apply_unitary(const StateVector& psi, const Matrix& u, std::span<const std::string> on) {
  require_unitary(u);
  const FactorSplit split = split_factors(psi.layout(), on);
  Matrix out = detail::apply_local_rows(psi.amplitudes(), u, split);
  return StateVector::normalized(psi.layout(), out.col(0));
}

StateVector apply_unitary(const StateVector& psi, const Matrix& u, std::initializer_list<std::string> on) {
  return apply_unitary(psi, u, std::span<const std::string>(on.begin(), on.size()));
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u, std::span<const std::string> on) {
  require_unitary(u);
  const FactorSplit split = split_factors(rho.layout(), on);
  // (U (U rho)^dagger)^dagger = U rho U^dagger
  const Matrix left = detail::apply_local_rows(rho.entries(), u, split);
  Matrix out = detail::apply_local_rows(left.adjoint(), u, split).adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(rho.layout(), std::move(out));
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u, std::initializer_list<std::string> on) {
  return apply_unitary(rho, u, std::span<const std::string>(on.begin(), on.size()));
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw ShapeError("fidelity of states with different dimensions");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (rho.dim() != psi.dim()) throw ShapeError("fidelity of states with different dimensions");
  return psi.amplitudes().dot(rho.entries() * psi.amplitudes()).real();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.layout() == b.layout())) throw ShapeError("trace distance needs identical layouts");
  const Matrix diff = a.entries() - b.entries();
  const double d = 0.5 * hermitian_eigenvalues(0.5 * (diff + diff.adjoint())).cwiseAbs().sum();
  return std::min(1.0, d);
}

}  // namespace qmeasure
