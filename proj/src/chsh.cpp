#include <cmath>

#include "qmeasure/errors.hpp"
#include "qmeasure/experiments.hpp"

namespace qmeasure {

Matrix spin_observable(double theta) {
  Matrix a(2, 2);
  a << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
  return a;
}

Povm spin_povm(double theta) {
  const Matrix a = spin_observable(theta);
  const Matrix id = Matrix::Identity(2, 2);
  return Povm({0.5 * (id + a), 0.5 * (id - a)}, {"+1", "-1"});
}

namespace {

// Outcome order of tensor(spin_povm(a), spin_povm(b)): ++, +-, -+, --.
constexpr std::array<double, 4> kParity{1.0, -1.0, -1.0, 1.0};

std::vector<double> joint_probabilities(const DensityMatrix& rho, double a, double b) {
  return born_probabilities(rho, tensor(spin_povm(a), spin_povm(b)));
}

}  // namespace

double correlator(const DensityMatrix& rho, double a, double b) {
  const auto p = joint_probabilities(rho, a, b);
  double e = 0.0;
  for (std::size_t k = 0; k < 4; ++k) e += kParity[k] * p[k];
  return e;
}

ChshResult chsh(const ChshSetting& setting, const StateVector& state, std::size_t shots, RngStream& rng) {
  const auto dims = state.layout().dims();
  if (dims.size() != 2 || dims[0] != 2 || dims[1] != 2) throw ShapeError("CHSH needs a two-qubit state");
  for (double angle : {setting.a, setting.a_prime, setting.b, setting.b_prime}) {
    if (!std::isfinite(angle)) throw ShapeError("CHSH angles must be finite");
  }
  const DensityMatrix rho = to_density(state);
  const std::array<std::pair<double, double>, 4> pairs{{{setting.a, setting.b},
                                                        {setting.a, setting.b_prime},
                                                        {setting.a_prime, setting.b},
                                                        {setting.a_prime, setting.b_prime}}};
  constexpr std::array<double, 4> kSign{1.0, -1.0, 1.0, 1.0};

  ChshResult result;
  for (std::size_t k = 0; k < 4; ++k) {
    result.correlators[k] = correlator(rho, pairs[k].first, pairs[k].second);
    result.s += kSign[k] * result.correlators[k];
  }
  if (shots > 0) {
    result.shots = shots;
    double s = 0.0, var = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto p = joint_probabilities(rho, pairs[k].first, pairs[k].second);
      const auto counts = sample_counts(p, shots, rng);
      double e = 0.0;
      for (std::size_t o = 0; o < 4; ++o) e += kParity[o] * static_cast<double>(counts[o]);
      e /= static_cast<double>(shots);
      result.sampled_correlators[k] = e;
      s += kSign[k] * e;
      const double exact_e = result.correlators[k];
      var += (1.0 - exact_e * exact_e) / static_cast<double>(shots);
    }
    result.s_sampled = s;
    result.sampled_sigma = std::sqrt(var);
  }
  return result;
}

}  // namespace qmeasure
