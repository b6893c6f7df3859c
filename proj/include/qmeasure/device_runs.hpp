#pragma once

#include <cstddef>
#include <vector>

#include "qmeasure/measurement.hpp"

namespace qmeasure {

inline constexpr std::size_t kMaxEnvQubits = 12;
/// Environments up to this dimension get a full Haar unitary per marker value;
/// larger ones sample the image of the initial basis state directly.
inline constexpr std::size_t kFullUnitaryEnvDim = 64;

struct DeviceRunReport {
  std::size_t n_env_qubits = 0;
  std::size_t n_runs = 0;
  std::vector<std::string> labels;
  std::vector<double> born;
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;
  std::vector<std::size_t> outcomes;   // one pointer reading per run
  std::vector<double> run_coherence;   // per-run coherence statistic
  double mean_coherence = 0.0;
};

/// Per run: mark the system, attach an environment in a random basis state, let
/// each marker value drive its own fresh Haar unitary on the environment, then
/// read the pointer. The coherence statistic of a run is the mean magnitude of
/// the (system, marker) reduced matrix entries <a_i, i| rho |a_j, j>, i != j,
/// after tracing out the environment.
DeviceRunReport simulate_device_runs(const StateVector& system, const MeasurementBasis& basis,
                                     std::size_t n_env_qubits, std::size_t n_runs, RngStream& rng);

}  // namespace qmeasure
