#include "qmeasure/device_runs.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "qmeasure/errors.hpp"
#include "qmeasure/parallel.hpp"

namespace qmeasure {
namespace {

struct RunResult {
  std::size_t outcome = 0;
  double coherence = 0.0;
};

// Image U_m|e> of the environment's initial basis state under the unitary
// conditioned on marker value m.
std::vector<Vector> conditioned_images(std::size_t n_markers, std::size_t env_dim, std::size_t env_state,
                                       RngStream& rng) {
  std::vector<Vector> images;
  for (std::size_t m = 0; m < n_markers; ++m) {
    if (env_dim <= kFullUnitaryEnvDim) {
      images.push_back(random_unitary(env_dim, rng).col(static_cast<Eigen::Index>(env_state)));
    } else {
      images.push_back(haar_column(env_dim, rng));
    }
  }
  return images;
}

RunResult one_run(const MarkedState& ms, std::size_t n_env_qubits, RngStream& rng) {
  const std::size_t env_dim = std::size_t{1} << n_env_qubits;
  const std::size_t marker_dim = ms.joint.layout().dim(ms.marker_label);

  StateVector evolved = ms.joint;
  if (n_env_qubits > 0) {
    const std::size_t env_state = rng.uniform_index(env_dim);
    const auto images = conditioned_images(marker_dim, env_dim, env_state, rng);
    // Controlled evolution on (marker, env): |m>|e> -> |m> U_m|e>.
    const auto& psi = ms.joint.amplitudes();
    const auto e = static_cast<Eigen::Index>(env_dim);
    const FactorSplit marker_split = split_factors(ms.joint.layout(), std::vector<std::string>{ms.marker_label});
    Vector out = Vector::Zero(psi.size() * e);
    for (std::size_t m = 0; m < marker_dim; ++m) {
      for (std::size_t r : marker_split.rest_offsets) {
        const auto idx = static_cast<Eigen::Index>(r + marker_split.target_offsets[m]);
        out.segment(idx * e, e) = psi(idx) * images[m];
      }
    }
    SubsystemLayout layout = ms.joint.layout().concat(SubsystemLayout::single("env", env_dim));
    evolved = StateVector::normalized(std::move(layout), std::move(out));
  }

  // Pointer reading.
  const DensityMatrix pointer = reduced_state(evolved, {ms.marker_label});
  std::vector<double> p(ms.basis.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = pointer(ms.correspondence[i], ms.correspondence[i]).real();
  RunResult result;
  result.outcome = sample_index(p, rng);

  // Record coherence with the environment traced out.
  std::vector<std::string> keep = ms.measured;
  keep.push_back(ms.marker_label);
  const DensityMatrix record = reduced_state(evolved, keep);
  const auto b = static_cast<Eigen::Index>(ms.basis.dim());
  const Matrix to_basis = Eigen::kroneckerProduct(ms.basis.matrix(), Matrix::Identity(static_cast<Eigen::Index>(marker_dim), static_cast<Eigen::Index>(marker_dim)));
  const Matrix rotated = to_basis.adjoint() * record.entries() * to_basis;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      if (i == j) continue;
      const auto ri = i * static_cast<Eigen::Index>(marker_dim) + static_cast<Eigen::Index>(ms.correspondence[i]);
      const auto rj = j * static_cast<Eigen::Index>(marker_dim) + static_cast<Eigen::Index>(ms.correspondence[j]);
      sum += std::abs(rotated(ri, rj));
      ++pairs;
    }
  }
  result.coherence = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
  return result;
}

}  // namespace

DeviceRunReport simulate_device_runs(const StateVector& system, const MeasurementBasis& basis,
                                     std::size_t n_env_qubits, std::size_t n_runs, RngStream& rng) {
  if (n_env_qubits > kMaxEnvQubits) {
    throw ResourceError("environment of " + std::to_string(n_env_qubits) + " qubits exceeds the limit of " +
                        std::to_string(kMaxEnvQubits));
  }
  if (n_runs == 0) throw ShapeError("n_runs must be positive");

  const MarkedState ms = mark(system, basis);
  const RngStream family(rng.engine()());
  std::vector<RunResult> runs(n_runs);
  parallel_for(n_runs, [&](std::size_t r) {
    RngStream stream = family.split(r);
    runs[r] = one_run(ms, n_env_qubits, stream);
  });

  DeviceRunReport report;
  report.n_env_qubits = n_env_qubits;
  report.n_runs = n_runs;
  report.born = outcome_probabilities(ms);
  report.counts.assign(basis.size(), 0);
  for (std::size_t i = 0; i < basis.size(); ++i) report.labels.push_back(basis.label(i));
  for (const auto& run : runs) {
    ++report.counts[run.outcome];
    report.outcomes.push_back(run.outcome);
    report.run_coherence.push_back(run.coherence);
    report.mean_coherence += run.coherence;
  }
  report.mean_coherence /= static_cast<double>(n_runs);
  for (auto c : report.counts) report.frequencies.push_back(static_cast<double>(c) / static_cast<double>(n_runs));
  return report;
}

}  // namespace qmeasure
