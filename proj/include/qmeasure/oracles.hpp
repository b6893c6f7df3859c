#pragma once

// Reference computations used only for verification. They work on raw index
// arithmetic and share no code path with the library routines they check.

#include <cstddef>
#include <vector>

#include "qmeasure/state.hpp"

namespace qmeasure::oracle {

/// Partial trace by decoding every (row, col) pair into per-factor digits and
/// summing entries whose traced digits agree. `keep[k]` selects factor k.
Matrix partial_trace(const Matrix& rho, const std::vector<std::size_t>& dims, const std::vector<bool>& keep);

/// Kronecker product of two vectors by explicit double loop.
Vector kron(const Vector& a, const Vector& b);

/// Binomial check: |count/n - p| <= sigmas * sqrt(p (1-p) / n).
bool within_binomial(std::size_t count, std::size_t n, double p, double sigmas = 3.0);

/// Pearson chi-square statistic of observed counts against expected probabilities.
double chi_square(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities);

/// Upper tail P(X >= x) of a chi-square distribution with one degree of freedom.
double chi_square_1dof_pvalue(double x);

}  // namespace qmeasure::oracle
