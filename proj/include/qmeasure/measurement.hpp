#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmeasure/operators.hpp"
#include "qmeasure/random.hpp"
#include "qmeasure/state.hpp"

namespace qmeasure {

/// Orthonormal basis {|a_i>} spanning the measured factor(s), one label per state.
class MeasurementBasis {
 public:
  MeasurementBasis(std::vector<Vector> states, std::vector<std::string> labels);

  static MeasurementBasis computational(std::size_t dim);
  static MeasurementBasis spin_z();  // |up> = e0, |down> = e1
  static MeasurementBasis spin_x();
  static MeasurementBasis spin_y();

  std::size_t size() const { return states_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(states_.front().size()); }
  const Vector& state(std::size_t i) const { return states_[i]; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<Vector>& states() const { return states_; }
  /// Columns are the basis states.
  Matrix matrix() const;
  Povm projective_povm() const;

 private:
  std::vector<Vector> states_;
  std::vector<std::string> labels_;
};

struct MarkOptions {
  /// Marker dimension; defaults to the number of basis states.
  std::size_t marker_dim = 0;
  std::string marker_label = "marker";
  /// Factors the basis acts on; empty means the whole system. The basis indexes
  /// these factors in layout order.
  std::vector<std::string> on;
};

/// Joint state sum_i c_i |a_i>|i> produced by the marking interaction.
struct MarkedState {
  StateVector joint;
  MeasurementBasis basis;
  std::vector<std::string> measured;  // measured factor labels, layout order
  std::string marker_label;
  std::vector<std::size_t> correspondence;  // basis index -> marker value
};

struct DetectionRecord {
  std::string outcome_label;
  std::size_t outcome_index = 0;
  double probability = 0.0;
  StateVector post_system;  // state of the measured factors after detection
  StateVector post_joint;
  double fidelity = 0.0;  // <a_i| rho_measured |a_i> after detection
  std::uint64_t seed_used = 0;
};

struct KnowledgeChain {
  StateVector before;
  DensityMatrix after_marking;  // reduced state of the measured factors
  StateVector after_knowledge;
  std::size_t outcome_index = 0;
  std::vector<double> probabilities;
};

/// Controlled shift sum_i |a_i><a_i| (x) X^i, X the cyclic shift on the marker.
Matrix marking_unitary(const MeasurementBasis& basis, std::size_t marker_dim);

/// Attaches a marker in |0> and applies marking_unitary to (measured, marker).
MarkedState mark(const StateVector& system, const MeasurementBasis& basis, const MarkOptions& options = {});

DensityMatrix reduced_marker(const MarkedState& ms);

/// Diagonal of reduced_marker, indexed by basis state.
std::vector<double> outcome_probabilities(const MarkedState& ms);

/// Deterministic branch for one outcome: projection onto the matching marker value.
DetectionRecord condition_on(const MarkedState& ms, std::size_t outcome);

/// Macroscopic detection: samples a marker value from its reduced diagonal.
DetectionRecord detect(const MarkedState& ms, RngStream& rng);

DetectionRecord measure(const StateVector& system, const MeasurementBasis& basis, RngStream& rng,
                        const MarkOptions& options = {});

KnowledgeChain knowledge_chain(const StateVector& system, const MeasurementBasis& basis, RngStream& rng,
                               const MarkOptions& options = {});

struct ShotSummary {
  std::size_t shots = 0;
  std::vector<std::size_t> counts;
  double min_fidelity = 1.0;
};

/// Repeated detection on copies of `ms`, one detect() per shot.
ShotSummary sample_detections(const MarkedState& ms, std::size_t shots, RngStream& rng);

}  // namespace qmeasure
