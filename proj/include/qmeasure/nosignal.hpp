#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qmeasure/measurement.hpp"
#include "qmeasure/operators.hpp"
#include "qmeasure/random.hpp"

namespace qmeasure {

/// (|up,up> + |down,down>)/sqrt(2) over factors "alice" and "bob".
StateVector bell_phi();

struct ProtocolConfig {
  std::size_t n_pairs_per_group = 200;
  std::size_t n_groups = 50;
  std::size_t process_pool_size = 20;
  std::uint64_t seed = 7;
  /// Bob observes exact outcome probabilities instead of sampled outcomes.
  bool exact = false;

  void validate() const;
};

enum class PreparationKind { reduced, mixed };

/// Bob's single-electron description after Alice's choice.
struct BobPreparation {
  PreparationKind kind = PreparationKind::reduced;
  DensityMatrix state;
  /// Definite Bob states behind a mixed preparation (empty for `reduced`).
  std::vector<EnsembleMember> ensemble;
};

struct AliceOptions {
  /// Shared two-qubit pure state over "alice" and "bob"; defaults to bell_phi().
  std::optional<StateVector> pair;
  /// Pairs Alice actually measures; 0 uses the exact Born-weighted ensemble.
  std::size_t n_pairs = 0;
};

/// Bit 0: Alice does nothing and Bob holds the reduced state of the pair.
/// Bit 1: Alice measures her electron in the z basis through mark + detect, and
/// Bob holds the resulting ensemble of definite states.
BobPreparation alice_prepare(int bit, RngStream& rng, const AliceOptions& options = {});

/// A candidate distinguishing process: CPTP channel followed by a POVM.
struct Process {
  QuantumChannel channel;
  Povm povm;
};

std::vector<Process> sample_process_pool(std::size_t size, RngStream& rng);

std::vector<double> bob_probabilities(const BobPreparation& prep, const Process& process);

/// Channel then POVM sampled `shots` times; returns outcome frequencies.
std::vector<double> bob_statistics(const BobPreparation& prep, const QuantumChannel& ch, const Povm& m,
                                   std::size_t shots, RngStream& rng);

struct DistinguishReport {
  std::vector<double> trace_distances;  // per process, after the channel
  std::vector<std::vector<double>> probabilities_reduced;
  std::vector<std::vector<double>> probabilities_mixed;
  /// Pooled sampled frequencies over groups with bit 0 / bit 1 (sampled mode only).
  std::vector<std::vector<double>> frequencies_bit0;
  std::vector<std::vector<double>> frequencies_bit1;
  double max_exact_separation = 0.0;    // max |p_reduced - p_mixed| over processes and outcomes
  double max_sampled_separation = 0.0;  // max |f_bit0 - f_bit1|
  std::vector<int> decoded;             // -1 marks an exact tie (exact mode)
  double accuracy = 0.0;
};

/// Runs the protocol over `message` (one bit per group). Bob sends the pairs of a
/// group round-robin through the process pool and decodes each group with a
/// maximum-likelihood test between the two preparation hypotheses. Ties are
/// broken by a fair coin in sampled mode and scored as half a correct bit in
/// exact mode.
DistinguishReport run_protocol(const ProtocolConfig& cfg, std::span<const int> message);

}  // namespace qmeasure
