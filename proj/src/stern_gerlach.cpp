#include "qmeasure/experiments.hpp"

namespace qmeasure {

RunReport stern_gerlach(const SternGerlachOptions& options, RngStream& rng) {
  const Complex i{0.0, 1.0};
  const StateVector spin = options.input == SpinInput::y_plus
                               ? StateVector::qubit(M_SQRT1_2, i * M_SQRT1_2, "spin")
                               : StateVector::qubit(1.0, 0.0, "spin");

  // The inhomogeneous field sends z+ to the upper path and z- to the lower one.
  const MeasurementBasis z({Vector::Unit(2, 0), Vector::Unit(2, 1)}, {"upper", "lower"});
  MarkOptions opts;
  opts.marker_label = "path";
  const MarkedState ms = mark(spin, z, opts);
  const DensityMatrix path = reduced_marker(ms);

  RunReport report;
  report.command = "sg";
  report.seed = rng.seed();
  report.config = {{"input", options.input == SpinInput::y_plus ? "y+" : "z+"}, {"shots", options.shots}};
  report.labels = {"upper", "lower"};
  report.exact_probabilities = outcome_probabilities(ms);
  report.diagnostics["reduced_path"] = matrix_to_json(path.entries());
  report.diagnostics["reduced_path_offdiag"] = std::abs(path(0, 1));
  report.diagnostics["joint_state"] = matrix_to_json(ms.joint.amplitudes());
  if (options.shots > 0) {
    const ShotSummary summary = sample_detections(ms, options.shots, rng);
    report.counts = summary.counts;
    report.frequencies = frequencies_from_counts(summary.counts);
    report.diagnostics["min_post_fidelity"] = summary.min_fidelity;
  }
  report.validate();
  return report;
}

}  // namespace qmeasure
