#include "qmeasure/oracles.hpp"

#include <cmath>

namespace qmeasure::oracle {

namespace {

std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
  return out;
}

}  // namespace

Matrix partial_trace(const Matrix& rho, const std::vector<std::size_t>& dims, const std::vector<bool>& keep) {
  std::size_t kept_dim = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (keep[k]) kept_dim *= dims[k];
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(kept_dim));
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    const auto dr = digits(static_cast<std::size_t>(r), dims);
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      const auto dc = digits(static_cast<std::size_t>(c), dims);
      bool traced_match = true;
      std::size_t kr = 0, kc = 0;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (keep[k]) {
          kr = kr * dims[k] + dr[k];
          kc = kc * dims[k] + dc[k];
        } else if (dr[k] != dc[k]) {
          traced_match = false;
        }
      }
      if (traced_match) out(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(kc)) += rho(r, c);
    }
  }
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i * b.size() + j) = a(i) * b(j);
  }
  return out;
}

bool within_binomial(std::size_t count, std::size_t n, double p, double sigmas) {
  const double freq = static_cast<double>(count) / static_cast<double>(n);
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return std::abs(freq - p) <= sigmas * sigma + 1e-15;
}

double chi_square(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities) {
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = n * probabilities[i];
    if (expected <= 0.0) continue;
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

double chi_square_1dof_pvalue(double x) { return std::erfc(std::sqrt(std::max(0.0, x) / 2.0)); }

}  // namespace qmeasure::oracle
