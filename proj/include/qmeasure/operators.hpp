#pragma once

#include <span>
#include <string>
#include <vector>

#include "qmeasure/state.hpp"

namespace qmeasure {

/// Operator-sum map rho -> sum_k K_k rho K_k^dagger with sum_k K_k^dagger K_k = I.
class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<Matrix> kraus);

  static QuantumChannel identity(std::size_t dim);
  static QuantumChannel unitary(const Matrix& u);
  /// rho -> (1-p) rho + p I/2 on a qubit, via the four Pauli Kraus operators.
  static QuantumChannel depolarizing(double p);
  /// Kraus {sqrt(1-p) I, sqrt(p) Z}.
  static QuantumChannel dephasing(double p);

  const std::vector<Matrix>& kraus() const { return kraus_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(kraus_.front().cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(kraus_.front().rows()); }

 private:
  std::vector<Matrix> kraus_;
};

/// Positive effects summing to identity, one label per effect.
class Povm {
 public:
  Povm(std::vector<Matrix> effects, std::vector<std::string> labels);

  /// Rank-1 projectors onto the given orthonormal vectors.
  static Povm projective(std::span<const Vector> basis, std::vector<std::string> labels);
  static Povm computational(std::size_t dim);

  const std::vector<Matrix>& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return effects_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(effects_.front().rows()); }

 private:
  std::vector<Matrix> effects_;
  std::vector<std::string> labels_;
};

/// Joint measurement with effects E_i (x) F_j, ordered i-major; labels "a,b".
Povm tensor(const Povm& a, const Povm& b);

DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch,
                            std::span<const std::string> on);
DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch,
                            std::initializer_list<std::string> on);
/// Channel on the whole state (requires a square channel matching the total dimension).
DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch);

/// p_i = Tr(E_i rho), clamped to [0, 1] after a 1e-10 range check.
std::vector<double> born_probabilities(const DensityMatrix& rho, const Povm& m);

}  // namespace qmeasure
