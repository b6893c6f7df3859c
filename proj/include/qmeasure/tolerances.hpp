#pragma once

namespace qmeasure::tol {

inline constexpr double kConstruction = 1e-12;  // norms, traces, Hermiticity
inline constexpr double kCompleteness = 1e-10;  // Kraus / POVM sums, unitarity
inline constexpr double kEigenSlack = 1e-10;    // smallest admissible eigenvalue is -kEigenSlack
inline constexpr double kProbabilitySum = 1e-9;
inline constexpr double kZeroProbability = 1e-15;

}  // namespace qmeasure::tol
