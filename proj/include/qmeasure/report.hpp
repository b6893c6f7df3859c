#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmeasure/state.hpp"

namespace qmeasure {

using Json = nlohmann::ordered_json;

/// Machine-readable result of one experiment or protocol run.
struct RunReport {
  std::string command;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> labels;
  std::optional<std::vector<double>> exact_probabilities;
  std::optional<std::vector<std::size_t>> counts;
  std::optional<std::vector<double>> frequencies;
  Json diagnostics = Json::object();
  double wall_time_seconds = 0.0;

  /// Throws InvariantError if frequencies or exact probabilities do not sum to 1 within 1e-9.
  void validate() const;
  Json to_json() const;
};

std::vector<double> frequencies_from_counts(const std::vector<std::size_t>& counts);

/// Row-major list of [re, im] pairs.
Json matrix_to_json(const Matrix& m);

}  // namespace qmeasure
