#include <cmath>

#include "qmeasure/experiments.hpp"

namespace qmeasure {

Matrix beam_splitter() {
  const Complex i{0.0, 1.0};
  Matrix bs(2, 2);
  bs << 1.0, i, i, 1.0;
  return bs * M_SQRT1_2;
}

StateVector mach_zehnder_path_state(bool second_mirror, double phase) {
  StateVector path = StateVector::basis(SubsystemLayout::single("path", 2), 0);
  path = apply_unitary(path, beam_splitter(), {"path"});
  Matrix shift = Matrix::Identity(2, 2);
  shift(1, 1) = std::polar(1.0, phase);
  path = apply_unitary(path, shift, {"path"});
  if (second_mirror) path = apply_unitary(path, beam_splitter(), {"path"});
  return path;
}

namespace {

// Receivers read the photon position, which is tied one-to-one to the path
// reaching them; the path itself is traced out.
MarkedState mark_receivers(const StateVector& path) {
  const MeasurementBasis ports({Vector::Unit(2, 0), Vector::Unit(2, 1)}, {"D1", "D2"});
  MarkOptions opts;
  opts.marker_label = "position";
  return mark(path, ports, opts);
}

}  // namespace

std::array<double, 2> mach_zehnder_probabilities(bool second_mirror, double phase) {
  const auto p = outcome_probabilities(mark_receivers(mach_zehnder_path_state(second_mirror, phase)));
  return {p[0], p[1]};
}

RunReport mach_zehnder(const MachZehnderOptions& options, RngStream& rng) {
  const StateVector path = mach_zehnder_path_state(options.second_mirror, options.phase);
  const MarkedState ms = mark_receivers(path);

  RunReport report;
  report.command = "mz";
  report.seed = rng.seed();
  report.config = {{"second_mirror", options.second_mirror}, {"phase", options.phase}, {"shots", options.shots}};
  report.labels = {"D1", "D2"};
  report.exact_probabilities = outcome_probabilities(ms);
  report.diagnostics["path_state"] = matrix_to_json(path.amplitudes());
  report.diagnostics["reduced_position"] = matrix_to_json(reduced_marker(ms).entries());
  if (options.second_mirror) {
    report.diagnostics["predicted"] = {std::pow(std::sin(options.phase / 2.0), 2),
                                       std::pow(std::cos(options.phase / 2.0), 2)};
  }
  if (options.shots > 0) {
    const ShotSummary summary = sample_detections(ms, options.shots, rng);
    report.counts = summary.counts;
    report.frequencies = frequencies_from_counts(summary.counts);
  }
  report.validate();
  return report;
}

}  // namespace qmeasure
