#include "qmeasure/random.hpp"

#include <cmath>

#include "qmeasure/errors.hpp"
#include "qmeasure/parallel.hpp"
#include "qmeasure/tolerances.hpp"

namespace qmeasure {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u = 1.0 - uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw ShapeError("uniform_index over an empty range");
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

Matrix random_unitary(std::size_t dim, RngStream& rng) {
  if (dim == 0) throw ShapeError("unitary dimension must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = Complex(rng.normal(), rng.normal()) * M_SQRT1_2;
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const auto r_diag = qr.matrixQR().diagonal();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double mag = std::abs(r_diag(k));
    if (mag > 0.0) q.col(k) *= r_diag(k) / mag;
  }
  return q;
}

Vector haar_column(std::size_t dim, RngStream& rng) {
  if (dim == 0) throw ShapeError("vector dimension must be positive");
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(rng.normal(), rng.normal());
  return v / v.norm();
}

StateVector random_state(const SubsystemLayout& layout, RngStream& rng) {
  return StateVector(layout, haar_column(layout.total_dim(), rng));
}

Povm random_povm(std::size_t dim, std::size_t n_outcomes, RngStream& rng, bool projective) {
  if (n_outcomes < 2) throw ShapeError("a POVM needs at least two outcomes");
  if (projective && n_outcomes != dim) throw ShapeError("projective POVM needs n_outcomes == dim");
  const auto d = static_cast<Eigen::Index>(dim);
  const Matrix u = random_unitary(dim, rng);

  // weights(k, j): share of basis direction j assigned to outcome k; columns sum to 1.
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_outcomes), d);
  if (projective) {
    weights.setIdentity();
  } else {
    for (Eigen::Index j = 0; j < d; ++j) {
      double total = 0.0;
      for (Eigen::Index k = 0; k < weights.rows(); ++k) {
        weights(k, j) = -std::log(1.0 - rng.uniform());
        total += weights(k, j);
      }
      weights.col(j) /= total;
    }
  }

  std::vector<Matrix> effects;
  for (Eigen::Index k = 0; k < weights.rows(); ++k) {
    const Vector diag = weights.row(k).transpose().cast<Complex>();
    Matrix e = u * diag.asDiagonal() * u.adjoint();
    effects.push_back(0.5 * (e + e.adjoint()));
  }
  return Povm(std::move(effects), {});
}

QuantumChannel random_channel(std::size_t dim, std::size_t n_kraus, RngStream& rng) {
  if (n_kraus == 0) throw ChannelError("a channel needs at least one Kraus operator");
  const auto d = static_cast<Eigen::Index>(dim);
  const Matrix v = random_unitary(dim * n_kraus, rng);
  std::vector<Matrix> kraus;
  for (std::size_t k = 0; k < n_kraus; ++k) kraus.push_back(v.block(static_cast<Eigen::Index>(k) * d, 0, d, d));
  return QuantumChannel(std::move(kraus));
}

std::size_t sample_index(std::span<const double> probabilities, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_nonzero = probabilities.size();
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= tol::kZeroProbability) continue;
    last_nonzero = i;
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // Only reachable when rounding leaves the cumulative sum just below u.
  if (last_nonzero == probabilities.size()) {
    throw DegenerateDistributionError("every outcome has probability <= 1e-15");
  }
  return last_nonzero;
}

std::vector<std::size_t> sample_counts(std::span<const double> probabilities, std::size_t shots, RngStream& rng) {
  const RngStream family(rng.engine()());
  const std::size_t chunks = (shots + kShotChunk - 1) / kShotChunk;
  std::vector<std::vector<std::size_t>> partial(chunks, std::vector<std::size_t>(probabilities.size(), 0));
  parallel_for(chunks, [&](std::size_t c) {
    RngStream stream = family.split(c);
    const std::size_t n = std::min(kShotChunk, shots - c * kShotChunk);
    for (std::size_t s = 0; s < n; ++s) ++partial[c][sample_index(probabilities, stream)];
  });
  std::vector<std::size_t> counts(probabilities.size(), 0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];
  }
  return counts;
}

}  // namespace qmeasure
