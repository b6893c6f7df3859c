#include "qmeasure/nosignal.hpp"

#include <algorithm>
#include <cmath>

#include "qmeasure/errors.hpp"
#include "qmeasure/parallel.hpp"

namespace qmeasure {

namespace {

const std::string kAlice = "alice";
const std::string kBob = "bob";

MarkOptions alice_marking() {
  MarkOptions opts;
  opts.on = {kAlice};
  opts.marker_label = "alice_marker";
  return opts;
}

StateVector bob_state_after(const DetectionRecord& rec) {
  return dominant_state(reduced_state(rec.post_joint, {kBob}));
}

double log_likelihood(const std::vector<std::vector<double>>& observed,
                      const std::vector<std::vector<double>>& model) {
  double ll = 0.0;
  for (std::size_t p = 0; p < observed.size(); ++p) {
    for (std::size_t o = 0; o < observed[p].size(); ++o) {
      if (observed[p][o] <= 0.0) continue;
      ll += observed[p][o] * std::log(std::max(model[p][o], 1e-300));
    }
  }
  return ll;
}

}  // namespace

StateVector bell_phi() {
  Vector v = Vector::Zero(4);
  v(0) = M_SQRT1_2;
  v(3) = M_SQRT1_2;
  return StateVector(SubsystemLayout({{kAlice, 2}, {kBob, 2}}), std::move(v));
}

void ProtocolConfig::validate() const {
  if (n_pairs_per_group == 0 || n_groups == 0 || process_pool_size == 0) {
    throw ShapeError("protocol sizes must all be positive");
  }
}

BobPreparation alice_prepare(int bit, RngStream& rng, const AliceOptions& options) {
  if (bit != 0 && bit != 1) throw ShapeError("message bits must be 0 or 1");
  const StateVector pair = options.pair.value_or(bell_phi());
  if (!pair.layout().contains(kAlice) || !pair.layout().contains(kBob) || pair.layout().size() != 2) {
    throw LayoutError("the shared pair must have exactly the factors 'alice' and 'bob'");
  }
  if (bit == 0) return BobPreparation{PreparationKind::reduced, reduced_state(pair, {kBob}), {}};

  const MarkedState ms = mark(pair, MeasurementBasis::spin_z(), alice_marking());
  std::vector<EnsembleMember> ensemble;
  if (options.n_pairs == 0) {
    const auto p = outcome_probabilities(ms);
    const double total = p[0] + p[1];
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 1e-15) continue;
      ensemble.push_back({p[i] / total, bob_state_after(condition_on(ms, i))});
    }
  } else {
    const double w = 1.0 / static_cast<double>(options.n_pairs);
    for (std::size_t k = 0; k < options.n_pairs; ++k) ensemble.push_back({w, bob_state_after(detect(ms, rng))});
    // Fold the remaining rounding of sum(w) into the last weight.
    double total = 0.0;
    for (const auto& e : ensemble) total += e.probability;
    ensemble.back().probability += 1.0 - total;
  }
  DensityMatrix state = mix(ensemble);
  return BobPreparation{PreparationKind::mixed, std::move(state), std::move(ensemble)};
}

std::vector<Process> sample_process_pool(std::size_t size, RngStream& rng) {
  std::vector<Process> pool;
  pool.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t n_kraus = 1 + rng.uniform_index(4);
    QuantumChannel ch = random_channel(2, n_kraus, rng);
    const bool projective = rng.uniform() < 0.25;
    Povm m = projective ? random_povm(2, 2, rng, true) : random_povm(2, 2 + rng.uniform_index(3), rng);
    pool.push_back(Process{std::move(ch), std::move(m)});
  }
  return pool;
}

std::vector<double> bob_probabilities(const BobPreparation& prep, const Process& process) {
  return born_probabilities(apply_channel(prep.state, process.channel), process.povm);
}

std::vector<double> bob_statistics(const BobPreparation& prep, const QuantumChannel& ch, const Povm& m,
                                   std::size_t shots, RngStream& rng) {
  if (shots == 0) throw ShapeError("shots must be positive");
  const auto p = born_probabilities(apply_channel(prep.state, ch), m);
  const auto counts = sample_counts(p, shots, rng);
  std::vector<double> freq;
  for (auto c : counts) freq.push_back(static_cast<double>(c) / static_cast<double>(shots));
  return freq;
}

DistinguishReport run_protocol(const ProtocolConfig& cfg, std::span<const int> message) {
  cfg.validate();
  if (message.size() != cfg.n_groups) {
    throw ShapeError("message has " + std::to_string(message.size()) + " bits for " +
                     std::to_string(cfg.n_groups) + " groups");
  }
  RngStream root(cfg.seed);
  RngStream pool_rng = root.split(0);
  const auto pool = sample_process_pool(cfg.process_pool_size, pool_rng);

  // Bob's hypotheses, computed from the exact preparations.
  RngStream unused = root.split(1);
  const BobPreparation reduced = alice_prepare(0, unused);
  const BobPreparation mixed = alice_prepare(1, unused);

  DistinguishReport report;
  for (const auto& process : pool) {
    const DensityMatrix a = apply_channel(reduced.state, process.channel);
    const DensityMatrix b = apply_channel(mixed.state, process.channel);
    report.trace_distances.push_back(trace_distance(a, b));
    report.probabilities_reduced.push_back(born_probabilities(a, process.povm));
    report.probabilities_mixed.push_back(born_probabilities(b, process.povm));
    for (std::size_t o = 0; o < process.povm.size(); ++o) {
      report.max_exact_separation = std::max(
          report.max_exact_separation,
          std::abs(report.probabilities_reduced.back()[o] - report.probabilities_mixed.back()[o]));
    }
  }

  const StateVector pair = bell_phi();
  const MarkedState alice_marked = mark(pair, MeasurementBasis::spin_z(), alice_marking());
  const DensityMatrix bob_reduced = reduced_state(pair, {kBob});

  // observed[g][process][outcome]: counts (sampled) or probabilities (exact).
  std::vector<std::vector<std::vector<double>>> observed(cfg.n_groups);
  std::vector<double> credit(cfg.n_groups, 0.0);
  report.decoded.assign(cfg.n_groups, -1);
  const RngStream groups = root.split(2);

  parallel_for(cfg.n_groups, [&](std::size_t g) {
    RngStream rng = groups.split(g);
    auto& obs = observed[g];
    obs.resize(pool.size());
    for (std::size_t p = 0; p < pool.size(); ++p) obs[p].assign(pool[p].povm.size(), 0.0);

    if (cfg.exact) {
      const BobPreparation& prep = message[g] == 0 ? reduced : mixed;
      for (std::size_t p = 0; p < pool.size(); ++p) obs[p] = bob_probabilities(prep, pool[p]);
    } else {
      for (std::size_t k = 0; k < cfg.n_pairs_per_group; ++k) {
        // Bob's electron: the reduced state of an untouched pair, or the definite
        // state left by Alice's measurement of this pair.
        const DensityMatrix bob = message[g] == 0
                                      ? bob_reduced
                                      : to_density(bob_state_after(detect(alice_marked, rng)));
        const Process& process = pool[k % pool.size()];
        const auto probs = born_probabilities(apply_channel(bob, process.channel), process.povm);
        obs[k % pool.size()][sample_index(probs, rng)] += 1.0;
      }
    }

    const double ll0 = log_likelihood(obs, report.probabilities_reduced);
    const double ll1 = log_likelihood(obs, report.probabilities_mixed);
    const double scale = 1.0 + std::max(std::abs(ll0), std::abs(ll1));
    if (std::abs(ll0 - ll1) <= 1e-9 * scale) {
      if (cfg.exact) {
        credit[g] = 0.5;
        return;
      }
      report.decoded[g] = rng.uniform() < 0.5 ? 0 : 1;
    } else {
      report.decoded[g] = ll1 > ll0 ? 1 : 0;
    }
    credit[g] = report.decoded[g] == message[g] ? 1.0 : 0.0;
  });

  double correct = 0.0;
  for (double c : credit) correct += c;
  report.accuracy = correct / static_cast<double>(cfg.n_groups);

  if (!cfg.exact) {
    auto pooled = [&](int bit) {
      std::vector<std::vector<double>> f(pool.size());
      for (std::size_t p = 0; p < pool.size(); ++p) {
        f[p].assign(pool[p].povm.size(), 0.0);
        double total = 0.0;
        for (std::size_t g = 0; g < cfg.n_groups; ++g) {
          if (message[g] != bit) continue;
          for (std::size_t o = 0; o < f[p].size(); ++o) {
            f[p][o] += observed[g][p][o];
            total += observed[g][p][o];
          }
        }
        if (total > 0.0) {
          for (auto& v : f[p]) v /= total;
        }
      }
      return f;
    };
    report.frequencies_bit0 = pooled(0);
    report.frequencies_bit1 = pooled(1);
    const bool both = std::count(message.begin(), message.end(), 0) > 0 &&
                      std::count(message.begin(), message.end(), 1) > 0;
    if (both) {
      for (std::size_t p = 0; p < pool.size(); ++p) {
        for (std::size_t o = 0; o < report.frequencies_bit0[p].size(); ++o) {
          report.max_sampled_separation = std::max(
              report.max_sampled_separation, std::abs(report.frequencies_bit0[p][o] - report.frequencies_bit1[p][o]));
        }
      }
    }
  }
  return report;
}

}  // namespace qmeasure
