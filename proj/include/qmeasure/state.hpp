#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmeasure/layout.hpp"

namespace qmeasure {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Normalized pure state over a SubsystemLayout.
class StateVector {
 public:
  /// Validates length, finiteness and |norm - 1| <= 1e-12.
  StateVector(SubsystemLayout layout, Vector amplitudes);

  /// Rescales `amplitudes` to unit norm; zero vectors are rejected.
  static StateVector normalized(SubsystemLayout layout, Vector amplitudes);
  static StateVector basis(SubsystemLayout layout, std::size_t index);
  /// alpha|0> + beta|1> on a single qubit factor (normalized by the caller).
  static StateVector qubit(Complex alpha, Complex beta, std::string label = "q");

  const SubsystemLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amps_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

 private:
  SubsystemLayout layout_;
  Vector amps_;
};

/// Hermitian, unit-trace, positive-semidefinite matrix over a SubsystemLayout.
class DensityMatrix {
 public:
  /// Validates Hermiticity and trace within 1e-12 and eigenvalues >= -1e-10.
  DensityMatrix(SubsystemLayout layout, Matrix entries);

  static DensityMatrix maximally_mixed(SubsystemLayout layout);

  const SubsystemLayout& layout() const { return layout_; }
  const Matrix& entries() const { return rho_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  Complex operator()(std::size_t i, std::size_t j) const {
    return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  SubsystemLayout layout_;
  Matrix rho_;
};

struct EnsembleMember {
  double probability = 0.0;
  StateVector state;
};

StateVector tensor(const StateVector& a, const StateVector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

DensityMatrix to_density(const StateVector& psi);

/// Sum of p_i |psi_i><psi_i|. Probabilities must be >= 0 and sum to 1 within 1e-12.
DensityMatrix mix(std::span<const EnsembleMember> ensemble);

/// Reduced state on the `keep` factors (output keeps the original factor order).
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep);

/// partial_trace(to_density(psi), keep) without forming the full projector.
DensityMatrix reduced_state(const StateVector& psi, std::span<const std::string> keep);
DensityMatrix reduced_state(const StateVector& psi, std::initializer_list<std::string> keep);

bool is_unitary(const Matrix& u, double tolerance);

/// Applies `u` to the factors named in `on` (in that order) and identity elsewhere.
StateVector apply_unitary(const StateVector& psi, const Matrix& u, std::span<const std::string> on);
StateVector apply_unitary(const StateVector& psi, const Matrix& u, std::initializer_list<std::string> on);
DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u, std::span<const std::string> on);
DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u, std::initializer_list<std::string> on);

/// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);
/// <psi|rho|psi>
double fidelity(const DensityMatrix& rho, const StateVector& psi);

/// Half the sum of absolute eigenvalues of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Eigenvector of the largest eigenvalue, phase-fixed so its largest entry is real
/// and positive. For a rank-1 density matrix this is the underlying pure state.
StateVector dominant_state(const DensityMatrix& rho);

/// Hermitian eigenvalues in ascending order.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);

namespace detail {
// Applies `op` to the target indices of every column of `m` (rows are joint indices).
Matrix apply_local_rows(const Matrix& m, const Matrix& op, const FactorSplit& split);
}  // namespace detail

}  // namespace qmeasure
