#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qmeasure/operators.hpp"
#include "qmeasure/state.hpp"

namespace qmeasure {

/// Seeded random stream. Streams are exclusive-use; concurrent work gets one
/// `split(i)` child per trial so results do not depend on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  /// Independent child stream, a pure function of (seed, index).
  RngStream split(std::uint64_t index) const;

  double uniform();  // [0, 1)
  double normal();   // standard normal
  std::size_t uniform_index(std::size_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Haar unitary: QR of a complex Ginibre matrix with R's diagonal phases folded into Q.
Matrix random_unitary(std::size_t dim, RngStream& rng);

/// Unit vector distributed as one column of a Haar unitary.
Vector haar_column(std::size_t dim, RngStream& rng);

StateVector random_state(const SubsystemLayout& layout, RngStream& rng);

/// Effects U D_k U^dagger where the diagonal D_k form a random positive partition
/// of identity. With `projective` (requires n_outcomes == dim) each D_k is a single
/// basis projector.
Povm random_povm(std::size_t dim, std::size_t n_outcomes, RngStream& rng, bool projective = false);

/// Kraus operators taken as blocks of a Haar isometry (Stinespring dilation).
QuantumChannel random_channel(std::size_t dim, std::size_t n_kraus, RngStream& rng);

/// Index drawn from `probabilities`; indices with p <= 1e-15 are never returned.
std::size_t sample_index(std::span<const double> probabilities, RngStream& rng);

/// Outcome counts for `shots` independent draws. Shots are processed in fixed
/// chunks, each on its own split stream.
std::vector<std::size_t> sample_counts(std::span<const double> probabilities, std::size_t shots,
                                       RngStream& rng);

inline constexpr std::size_t kShotChunk = 4096;

}  // namespace qmeasure
