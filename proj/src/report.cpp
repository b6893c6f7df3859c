#include "qmeasure/report.hpp"

#include <cmath>
#include <numeric>

#include "qmeasure/errors.hpp"
#include "qmeasure/tolerances.hpp"

namespace qmeasure {

namespace {

void check_sum(const std::vector<double>& v, const char* what) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (std::abs(total - 1.0) > tol::kProbabilitySum) {
    throw InvariantError(std::string(what) + " sum to " + std::to_string(total));
  }
}

}  // namespace

void RunReport::validate() const {
  if (exact_probabilities) check_sum(*exact_probabilities, "exact probabilities");
  if (frequencies) check_sum(*frequencies, "frequencies");
}

Json RunReport::to_json() const {
  Json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["labels"] = labels;
  j["exact_probabilities"] = exact_probabilities ? Json(*exact_probabilities) : Json(nullptr);
  j["counts"] = counts ? Json(*counts) : Json(nullptr);
  j["frequencies"] = frequencies ? Json(*frequencies) : Json(nullptr);
  j["diagnostics"] = diagnostics;
  j["wall_time_seconds"] = wall_time_seconds;
  return j;
}

std::vector<double> frequencies_from_counts(const std::vector<std::size_t>& counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<double> f;
  for (auto c : counts) f.push_back(n > 0.0 ? static_cast<double>(c) / n : 0.0);
  return f;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qmeasure
