#include "qmeasure/measurement.hpp"

#include <cmath>

#include <algorithm>
#include <unsupported/Eigen/KroneckerProduct>

#include "qmeasure/errors.hpp"
#include "qmeasure/parallel.hpp"
#include "qmeasure/tolerances.hpp"

namespace qmeasure {

MeasurementBasis::MeasurementBasis(std::vector<Vector> states, std::vector<std::string> labels)
    : states_(std::move(states)), labels_(std::move(labels)) {
  if (states_.empty()) throw ShapeError("measurement basis is empty");
  const auto d = states_.front().size();
  if (static_cast<std::size_t>(d) != states_.size()) {
    throw ShapeError("measurement basis must span its factor: " + std::to_string(states_.size()) +
                     " states for dimension " + std::to_string(d));
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < states_.size(); ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != states_.size()) throw ShapeError("basis label count differs from state count");
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].size() != d) throw ShapeError("basis states differ in dimension");
    for (std::size_t j = 0; j < states_.size(); ++j) {
      const Complex ip = states_[i].dot(states_[j]);
      if (std::abs(ip - (i == j ? 1.0 : 0.0)) > tol::kCompleteness) {
        throw InvariantError("measurement basis is not orthonormal");
      }
    }
  }
}

MeasurementBasis MeasurementBasis::computational(std::size_t dim) {
  std::vector<Vector> states;
  for (std::size_t k = 0; k < dim; ++k) {
    states.push_back(Vector::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k)));
  }
  return MeasurementBasis(std::move(states), {});
}

MeasurementBasis MeasurementBasis::spin_z() {
  return MeasurementBasis({Vector::Unit(2, 0), Vector::Unit(2, 1)}, {"up", "down"});
}

MeasurementBasis MeasurementBasis::spin_x() {
  Vector plus(2), minus(2);
  plus << M_SQRT1_2, M_SQRT1_2;
  minus << M_SQRT1_2, -M_SQRT1_2;
  return MeasurementBasis({plus, minus}, {"x+", "x-"});
}

MeasurementBasis MeasurementBasis::spin_y() {
  const Complex i{0.0, 1.0};
  Vector plus(2), minus(2);
  plus << M_SQRT1_2, i * M_SQRT1_2;
  minus << M_SQRT1_2, -i * M_SQRT1_2;
  return MeasurementBasis({plus, minus}, {"y+", "y-"});
}

Matrix MeasurementBasis::matrix() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m.col(i) = states_[static_cast<std::size_t>(i)];
  return m;
}

Povm MeasurementBasis::projective_povm() const { return Povm::projective(states_, labels_); }

Matrix marking_unitary(const MeasurementBasis& basis, std::size_t marker_dim) {
  if (marker_dim < basis.size()) {
    throw CapacityError("marker dimension " + std::to_string(marker_dim) + " cannot mark " +
                        std::to_string(basis.size()) + " basis states");
  }
  const auto m = static_cast<Eigen::Index>(marker_dim);
  const auto d = static_cast<Eigen::Index>(basis.dim());
  Matrix u = Matrix::Zero(d * m, d * m);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Matrix proj = basis.state(i) * basis.state(i).adjoint();
    Matrix shift = Matrix::Zero(m, m);  // |k> -> |k + i mod m>
    for (Eigen::Index k = 0; k < m; ++k) shift((k + static_cast<Eigen::Index>(i)) % m, k) = 1.0;
    u += Eigen::kroneckerProduct(proj, shift).eval();
  }
  return u;
}

namespace {

std::vector<std::string> measured_labels(const SubsystemLayout& layout, const std::vector<std::string>& on) {
  std::vector<std::string> out;
  if (on.empty()) {
    for (const auto& f : layout.factors()) out.push_back(f.label);
    return out;
  }
  const SubsystemLayout selected = layout.select(on);
  for (const auto& f : selected.factors()) out.push_back(f.label);
  return out;
}

// Amplitudes of `joint` with the measured factors expressed in the measurement basis.
Vector amplitudes_in_basis(const MarkedState& ms) {
  const Matrix to_basis = ms.basis.matrix().adjoint();
  return detail::apply_local_rows(ms.joint.amplitudes(), to_basis, split_factors(ms.joint.layout(), ms.measured))
      .col(0);
}

void check_marked(const MarkedState& ms) {
  const Vector rotated = amplitudes_in_basis(ms);
  std::vector<std::string> pair = ms.measured;
  pair.push_back(ms.marker_label);
  const FactorSplit split = split_factors(ms.joint.layout(), pair);
  const std::size_t marker_dim = ms.joint.layout().dim(ms.marker_label);
  for (std::size_t i = 0; i < ms.basis.size(); ++i) {
    for (std::size_t m = 0; m < marker_dim; ++m) {
      if (m == ms.correspondence[i]) continue;
      for (std::size_t r : split.rest_offsets) {
        const auto idx = static_cast<Eigen::Index>(r + split.target_offsets[i * marker_dim + m]);
        if (std::abs(rotated(idx)) > tol::kCompleteness) {
          throw InvariantError("marked state has amplitude on a mismatched (basis, marker) pair");
        }
      }
    }
  }
}

}  // namespace

MarkedState mark(const StateVector& system, const MeasurementBasis& basis, const MarkOptions& options) {
  const std::size_t marker_dim = options.marker_dim == 0 ? basis.size() : options.marker_dim;
  if (marker_dim < basis.size()) {
    throw CapacityError("marker dimension " + std::to_string(marker_dim) + " cannot mark " +
                        std::to_string(basis.size()) + " basis states");
  }
  auto measured = measured_labels(system.layout(), options.on);
  const std::size_t measured_dim = system.layout().select(measured).total_dim();
  if (measured_dim != basis.dim()) {
    throw ShapeError("basis dimension " + std::to_string(basis.dim()) + " does not match measured dimension " +
                     std::to_string(measured_dim));
  }

  const auto marker0 = StateVector::basis(SubsystemLayout::single(options.marker_label, marker_dim), 0);
  std::vector<std::string> targets = measured;
  targets.push_back(options.marker_label);
  StateVector joint = apply_unitary(tensor(system, marker0), marking_unitary(basis, marker_dim), targets);

  std::vector<std::size_t> correspondence(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) correspondence[i] = i;
  MarkedState ms{std::move(joint), basis, std::move(measured), options.marker_label, std::move(correspondence)};
  check_marked(ms);
  return ms;
}

DensityMatrix reduced_marker(const MarkedState& ms) { return reduced_state(ms.joint, {ms.marker_label}); }

std::vector<double> outcome_probabilities(const MarkedState& ms) {
  const DensityMatrix rho = reduced_marker(ms);
  std::vector<double> p(ms.basis.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t m = ms.correspondence[i];
    p[i] = std::clamp(rho(m, m).real(), 0.0, 1.0);
  }
  return p;
}

DetectionRecord condition_on(const MarkedState& ms, std::size_t outcome) {
  if (outcome >= ms.basis.size()) throw ShapeError("outcome index out of range");
  const std::size_t marker_value = ms.correspondence[outcome];
  const FactorSplit split = split_factors(ms.joint.layout(), std::vector<std::string>{ms.marker_label});

  Vector projected = Vector::Zero(ms.joint.amplitudes().size());
  for (std::size_t r : split.rest_offsets) {
    const auto idx = static_cast<Eigen::Index>(r + split.target_offsets[marker_value]);
    projected(idx) = ms.joint.amplitudes()(idx);
  }
  const double probability = projected.squaredNorm();
  if (probability <= tol::kZeroProbability) {
    throw DegenerateDistributionError("outcome '" + ms.basis.label(outcome) + "' has probability <= 1e-15");
  }
  StateVector post_joint = StateVector::normalized(ms.joint.layout(), projected);

  // After detection the measured factors carry a pure state.
  const DensityMatrix measured = reduced_state(post_joint, ms.measured);
  StateVector post_system = dominant_state(measured);

  DetectionRecord rec{ms.basis.label(outcome),
                      outcome,
                      std::min(1.0, probability),
                      std::move(post_system),
                      std::move(post_joint),
                      0.0,
                      0};
  rec.fidelity = fidelity(measured, StateVector(measured.layout(), ms.basis.state(outcome)));
  return rec;
}

DetectionRecord detect(const MarkedState& ms, RngStream& rng) {
  const std::uint64_t seed = rng.seed();
  const auto probabilities = outcome_probabilities(ms);
  DetectionRecord rec = condition_on(ms, sample_index(probabilities, rng));
  rec.seed_used = seed;
  return rec;
}

DetectionRecord measure(const StateVector& system, const MeasurementBasis& basis, RngStream& rng,
                        const MarkOptions& options) {
  return detect(mark(system, basis, options), rng);
}

KnowledgeChain knowledge_chain(const StateVector& system, const MeasurementBasis& basis, RngStream& rng,
                               const MarkOptions& options) {
  MarkedState ms = mark(system, basis, options);
  DensityMatrix after_marking = reduced_state(ms.joint, ms.measured);
  const Matrix in_basis = basis.matrix().adjoint() * after_marking.entries() * basis.matrix();
  const Matrix off = in_basis - Matrix(in_basis.diagonal().asDiagonal());
  if (off.size() > 0 && off.cwiseAbs().maxCoeff() > tol::kCompleteness) {
    throw InvariantError("reduced state after marking is not diagonal in the measurement basis");
  }
  auto probabilities = outcome_probabilities(ms);
  DetectionRecord rec = detect(ms, rng);
  return KnowledgeChain{system, std::move(after_marking), std::move(rec.post_system), rec.outcome_index,
                        std::move(probabilities)};
}

ShotSummary sample_detections(const MarkedState& ms, std::size_t shots, RngStream& rng) {
  const RngStream family(rng.engine()());
  const std::size_t chunks = (shots + kShotChunk - 1) / kShotChunk;
  std::vector<ShotSummary> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    RngStream stream = family.split(c);
    ShotSummary& part = partial[c];
    part.counts.assign(ms.basis.size(), 0);
    const std::size_t n = std::min(kShotChunk, shots - c * kShotChunk);
    for (std::size_t s = 0; s < n; ++s) {
      const DetectionRecord rec = detect(ms, stream);
      ++part.counts[rec.outcome_index];
      part.min_fidelity = std::min(part.min_fidelity, rec.fidelity);
    }
    part.shots = n;
  });
  ShotSummary out;
  out.counts.assign(ms.basis.size(), 0);
  for (const auto& p : partial) {
    out.shots += p.shots;
    out.min_fidelity = std::min(out.min_fidelity, p.min_fidelity);
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += p.counts[i];
  }
  return out;
}

}  // namespace qmeasure
