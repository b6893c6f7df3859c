#include "qmeasure/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>

#include <unistd.h>

#include "qmeasure/device_runs.hpp"
#include "qmeasure/experiments.hpp"
#include "qmeasure/nosignal.hpp"
#include "qmeasure/oracles.hpp"

namespace qmeasure::acceptance {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

const Matrix& half_identity() {
  static const Matrix m = 0.5 * Matrix::Identity(2, 2);
  return m;
}

std::vector<int> random_message(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<int> bits(n);
  for (auto& b : bits) b = rng.uniform() < 0.5 ? 0 : 1;
  return bits;
}

SlitGeometry slit_geometry(double lambda, double d, double l) {
  SlitGeometry g;
  g.wavelength = lambda;
  g.slit_separation = d;
  g.slit_width = d / 20.0;
  g.screen_distance = l;
  g.x_min = -5.0 * g.fringe_period();
  g.x_max = 5.0 * g.fringe_period();
  g.n_points = 2001;
  return g;
}

// --- acceptance criteria -----------------------------------------------------

std::string ac1_reduced_identity() {
  const DensityMatrix rho = to_density(bell_phi());
  double worst = 0.0;
  for (const std::string label : {"alice", "bob"}) {
    worst = std::max(worst, max_abs(partial_trace(rho, {label}).entries() - half_identity()));
  }
  require(worst <= 1e-12, fmt("max deviation from I/2 is %.3e", worst));
  return fmt("max |rho_k - I/2| = %.3e", worst);
}

std::string ac2_equivalence() {
  RngStream rng(2024);
  std::vector<StateVector> pairs{bell_phi()};
  const SubsystemLayout layout({{"alice", 2}, {"bob", 2}});
  for (int k = 0; k < 20; ++k) pairs.push_back(random_state(layout, rng));
  const auto pool = sample_process_pool(100, rng);

  double worst_distance = 0.0, worst_probability = 0.0;
  for (const auto& pair : pairs) {
    AliceOptions opts;
    opts.pair = pair;
    const BobPreparation reduced = alice_prepare(0, rng, opts);
    const BobPreparation mixed = alice_prepare(1, rng, opts);
    worst_distance = std::max(worst_distance, trace_distance(reduced.state, mixed.state));
    for (const auto& process : pool) {
      const auto a = bob_probabilities(reduced, process);
      const auto b = bob_probabilities(mixed, process);
      for (std::size_t i = 0; i < a.size(); ++i) worst_probability = std::max(worst_probability, std::abs(a[i] - b[i]));
    }
  }
  require(worst_distance <= 1e-12, fmt("trace distance %.3e exceeds 1e-12", worst_distance));
  require(worst_probability <= 1e-12, fmt("outcome probabilities differ by %.3e", worst_probability));
  return fmt("21 states x 100 processes: max trace distance %.3e, max |dp| %.3e", worst_distance, worst_probability);
}

std::string ac3_no_signaling() {
  const double sigma = std::sqrt(0.25 / 50.0);
  std::string detail = "accuracies:";
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ProtocolConfig cfg;
    cfg.n_pairs_per_group = 200;
    cfg.n_groups = 50;
    cfg.process_pool_size = 20;
    cfg.seed = seed;
    const auto report = run_protocol(cfg, random_message(cfg.n_groups, 1000 + seed));
    require(std::abs(report.accuracy - 0.5) <= 3.0 * sigma,
            fmt("seed %.0f: accuracy %.3f outside 0.5 +/- %.3f", static_cast<double>(seed), report.accuracy,
                3.0 * sigma));
    require(report.max_exact_separation <= 1e-12, "exact separation above 1e-12");
    detail += fmt(" %.2f", report.accuracy);
  }
  return detail;
}

std::string ac4_measurement_postulate() {
  RngStream rng(4);
  const MarkedState ms = mark(StateVector::qubit(0.6, 0.8, "spin"), MeasurementBasis::spin_z());
  const std::size_t shots = 100000;
  const ShotSummary summary = sample_detections(ms, shots, rng);
  const double freq = static_cast<double>(summary.counts[0]) / static_cast<double>(shots);
  require(oracle::within_binomial(summary.counts[0], shots, 0.36), fmt("outcome-0 frequency %.5f", freq));
  require(summary.min_fidelity >= 1.0 - 1e-10, fmt("post-system fidelity dropped to %.12f", summary.min_fidelity));
  return fmt("f0 = %.5f (3 sigma = %.5f), min fidelity %.15f", freq, 3.0 * std::sqrt(0.36 * 0.64 / shots),
             summary.min_fidelity);
}

std::string ac5_stern_gerlach() {
  RngStream rng(5);
  SternGerlachOptions opts;
  opts.shots = 0;
  const RunReport report = stern_gerlach(opts, rng);
  const auto& p = *report.exact_probabilities;
  const double dev = std::max(std::abs(p[0] - 0.5), std::abs(p[1] - 0.5));
  require(dev <= 1e-12, fmt("path probabilities deviate by %.3e", dev));
  const double off = report.diagnostics["reduced_path_offdiag"].get<double>();
  require(off <= 1e-12, fmt("reduced path off-diagonal %.3e", off));
  return fmt("(%.15f, %.15f)", p[0], p[1]);
}

std::string ac6_mach_zehnder() {
  const auto open = mach_zehnder_probabilities(false, 0.0);
  const double dev = std::max(std::abs(open[0] - 0.5), std::abs(open[1] - 0.5));
  require(dev <= 1e-12, fmt("no-second-mirror probabilities deviate by %.3e", dev));
  double worst = 0.0;
  for (int k = 0; k < 32; ++k) {
    const double phi = 2.0 * M_PI * k / 32.0;
    const auto p = mach_zehnder_probabilities(true, phi);
    worst = std::max({worst, std::abs(p[0] - std::pow(std::sin(phi / 2), 2)),
                      std::abs(p[1] - std::pow(std::cos(phi / 2), 2))});
  }
  require(worst <= 1e-10, fmt("phase sweep deviates by %.3e", worst));
  return fmt("open-path deviation %.3e, sweep deviation %.3e", dev, worst);
}

std::string ac7_double_slit() {
  const auto dir = std::filesystem::temp_directory_path() / ("qmeasure_ac7_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string detail;
  const SlitGeometry geometries[] = {slit_geometry(500e-9, 50e-6, 1.0), slit_geometry(633e-9, 100e-6, 2.0),
                                     slit_geometry(400e-9, 40e-6, 0.5)};
  try {
    for (std::size_t g = 0; g < 3; ++g) {
      const auto& geom = geometries[g];
      const auto path = dir / ("profile" + std::to_string(g) + ".csv");
      emit_csv(double_slit(geom, {true, true}), path);
      const IntensityProfile emitted = read_csv(path);
      const double integral = std::accumulate(emitted.bin_probability.begin(), emitted.bin_probability.end(), 0.0);
      require(std::abs(integral - 1.0) <= 1e-9, fmt("emitted profile integrates to %.12f", integral));
      const auto spacing = fringe_spacing(emitted);
      require(spacing.has_value(), "no fringes found");
      require(std::abs(*spacing - geom.fringe_period()) <= geom.grid_step(),
              fmt("fringe spacing %.6e vs lambda L / d = %.6e", *spacing, geom.fringe_period()));
      for (std::array<bool, 2> one : {std::array<bool, 2>{true, false}, std::array<bool, 2>{false, true}}) {
        const auto maxima = local_maxima(double_slit(geom, one)).size();
        require(maxima == 1, fmt("single-slit profile has %.0f maxima", static_cast<double>(maxima)));
      }
      detail += fmt("spacing %.5e/%.5e; ", *spacing, geom.fringe_period());
    }
  } catch (...) {
    std::filesystem::remove_all(dir);
    throw;
  }
  std::filesystem::remove_all(dir);
  return detail;
}

std::string ac8_bell() {
  RngStream rng(8);
  const ChshSetting optimal;
  const double s = chsh(optimal, bell_phi(), 0, rng).s;
  require(std::abs(s - 2.0 * std::sqrt(2.0)) <= 1e-9, fmt("S(Phi) = %.12f", s));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto a = random_state(SubsystemLayout::single("a", 2), rng);
    const auto b = random_state(SubsystemLayout::single("b", 2), rng);
    worst = std::max(worst, std::abs(chsh(optimal, tensor(a, b), 0, rng).s));
  }
  require(worst <= 2.0 + 1e-9, fmt("product state reached |S| = %.12f", worst));
  return fmt("S(Phi) = %.12f, max |S| over product states = %.6f", s, worst);
}

std::string ac9_device_runs() {
  const StateVector plus = StateVector::qubit(M_SQRT1_2, M_SQRT1_2, "spin");
  const auto basis = MeasurementBasis::spin_z();
  double coherence[2] = {0.0, 0.0};
  const std::size_t envs[2] = {2, 8};
  for (int k = 0; k < 2; ++k) {
    RngStream rng(900 + static_cast<std::uint64_t>(envs[k]));
    const auto report = simulate_device_runs(plus, basis, envs[k], 1000, rng);
    require(report.outcomes.size() == 1000, "a run did not produce exactly one pointer reading");
    for (std::size_t i = 0; i < report.born.size(); ++i) {
      require(oracle::within_binomial(report.counts[i], 1000, report.born[i]),
              fmt("n_env %.0f: frequency %.4f vs Born %.4f", static_cast<double>(envs[k]), report.frequencies[i],
                  report.born[i]));
    }
    coherence[k] = report.mean_coherence;
  }
  require(coherence[1] < coherence[0], fmt("coherence at n_env=8 (%.4f) not below n_env=2 (%.4f)", coherence[1], coherence[0]));
  return fmt("mean coherence n_env=2: %.4f, n_env=8: %.4f", coherence[0], coherence[1]);
}

std::string ac10_oracle_equivalence() {
  RngStream rng(10);
  std::size_t layouts = 0, comparisons = 0;
  double worst = 0.0;
  auto check_layout = [&](const std::vector<std::size_t>& dims) {
    std::vector<Factor> factors;
    for (std::size_t k = 0; k < dims.size(); ++k) factors.push_back({"f" + std::to_string(k), dims[k]});
    const SubsystemLayout layout(factors);
    std::vector<EnsembleMember> ens{{0.25, random_state(layout, rng)}, {0.75, random_state(layout, rng)}};
    const DensityMatrix rho = mix(ens);
    for (std::size_t mask = 1; mask < (std::size_t{1} << dims.size()); ++mask) {
      std::vector<bool> keep(dims.size());
      std::vector<std::string> labels;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        keep[k] = (mask >> k) & 1U;
        if (keep[k]) labels.push_back(factors[k].label);
      }
      const Matrix expected = oracle::partial_trace(rho.entries(), dims, keep);
      worst = std::max(worst, max_abs(partial_trace(rho, labels).entries() - expected));
      ++comparisons;
    }
    ++layouts;
  };
  // Every layout of 1-4 factors with dims in 1..4 and total dimension <= 64.
  std::vector<std::size_t> dims;
  std::function<void(std::size_t)> enumerate = [&](std::size_t product) {
    if (!dims.empty()) check_layout(dims);
    if (dims.size() == 4) return;
    for (std::size_t d = 1; d <= 4; ++d) {
      if (product * d > 64) continue;
      dims.push_back(d);
      enumerate(product * d);
      dims.pop_back();
    }
  };
  enumerate(1);
  // Plus random layouts with larger factors.
  for (int trial = 0; trial < 100; ++trial) {
    dims.clear();
    std::size_t product = 1;
    const std::size_t n = 1 + rng.uniform_index(3);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t d = 1 + rng.uniform_index(16);
      if (product * d > 64) break;
      product *= d;
      dims.push_back(d);
    }
    if (dims.empty()) dims.push_back(64);
    check_layout(dims);
  }
  require(worst <= 1e-12, fmt("max entrywise deviation %.3e", worst));
  return fmt("%.0f layouts, %.0f partial traces, max deviation %.3e", static_cast<double>(layouts),
             static_cast<double>(comparisons), worst);
}

// --- module invariants -------------------------------------------------------

std::string inv_core_states() {
  RngStream rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_state(SubsystemLayout({{"a", 2}, {"b", 3}}), rng);
    const auto b = random_state(SubsystemLayout::single("c", 2), rng);
    const auto joint = tensor(a, b);
    require(std::abs(joint.amplitudes().norm() - 1.0) <= 1e-12, "tensor broke the norm");
    const auto evolved = apply_unitary(joint, random_unitary(6, rng), {"b", "c"});
    require(std::abs(evolved.amplitudes().norm() - 1.0) <= 1e-12, "apply_unitary broke the norm");
    const auto reduced = partial_trace(to_density(joint), {"a", "b"});
    require(max_abs(reduced.entries() - to_density(a).entries()) <= 1e-12, "product state did not factorize");
  }
  return "norms, factorization ok on 50 random products";
}

std::string inv_channels_and_povms() {
  RngStream rng(102);
  double worst_trace = 0.0, worst_sum = 0.0, worst_linearity = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(3);
    const SubsystemLayout layout = SubsystemLayout::single("s", d);
    const auto ch = random_channel(d, 1 + rng.uniform_index(4), rng);
    const auto out = apply_channel(to_density(random_state(layout, rng)), ch);
    worst_trace = std::max(worst_trace, std::abs(out.entries().trace().real() - 1.0));
    const auto m = random_povm(d, 2 + rng.uniform_index(4), rng);
    std::vector<EnsembleMember> ens{{0.3, random_state(layout, rng)}, {0.7, random_state(layout, rng)}};
    const auto p = born_probabilities(mix(ens), m);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    const auto p0 = born_probabilities(to_density(ens[0].state), m);
    const auto p1 = born_probabilities(to_density(ens[1].state), m);
    for (std::size_t i = 0; i < p.size(); ++i) {
      worst_linearity = std::max(worst_linearity, std::abs(p[i] - 0.3 * p0[i] - 0.7 * p1[i]));
    }
  }
  require(worst_trace <= 1e-10, fmt("channel trace deviation %.3e", worst_trace));
  require(worst_sum <= 1e-9, fmt("Born sum deviation %.3e", worst_sum));
  require(worst_linearity <= 1e-10, fmt("Born linearity deviation %.3e", worst_linearity));
  return fmt("trace %.1e, sum %.1e, linearity %.1e", worst_trace, worst_sum, worst_linearity);
}

std::string inv_trace_distance() {
  RngStream rng(103);
  const SubsystemLayout layout = SubsystemLayout::single("s", 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = to_density(random_state(layout, rng));
    const auto b = to_density(random_state(layout, rng));
    const auto c = to_density(random_state(layout, rng));
    require(trace_distance(a, a) <= 1e-10, "d(a, a) > 0");
    require(trace_distance(a, b) > 1e-10, "distinct states at distance 0");
    require(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9, "triangle inequality");
  }
  return "identity and triangle inequality on 50 triples";
}

std::string inv_marking() {
  for (const auto& basis : {MeasurementBasis::spin_z(), MeasurementBasis::spin_x(), MeasurementBasis::spin_y()}) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const StateVector a(SubsystemLayout::single("s", 2), basis.state(i));
      const auto ms = mark(a, basis);
      const auto product = tensor(a, StateVector::basis(SubsystemLayout::single("marker", 2), i));
      require(fidelity(ms.joint, product) >= 1.0 - 1e-12, "marking a basis state did not give |a_i>|i>");
    }
  }
  return "basis states map to |a_i>|i> for z, x, y";
}

std::string inv_measure_chi_square() {
  RngStream rng(104);
  const auto basis = MeasurementBasis::spin_z();
  double lowest = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto psi = random_state(SubsystemLayout::single("spin", 2), rng);
    const auto born = born_probabilities(to_density(psi), basis.projective_povm());
    std::vector<std::size_t> counts(2, 0);
    for (int s = 0; s < 2000; ++s) ++counts[measure(psi, basis, rng).outcome_index];
    lowest = std::min(lowest, oracle::chi_square_1dof_pvalue(oracle::chi_square(counts, born)));
  }
  require(lowest > 0.001, fmt("chi-square p-value %.2e", lowest));
  return fmt("min p-value over 50 states: %.4f", lowest);
}

std::string inv_knowledge_chain() {
  RngStream rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = random_state(SubsystemLayout::single("spin", 2), rng);
    const auto basis = trial % 2 == 0 ? MeasurementBasis::spin_z() : MeasurementBasis::spin_x();
    const auto chain = knowledge_chain(psi, basis, rng);
    const Matrix in_basis = basis.matrix().adjoint() * chain.after_marking.entries() * basis.matrix();
    worst = std::max(worst, std::abs(in_basis(0, 1)));
    const auto& target = basis.state(chain.outcome_index);
    require(fidelity(chain.after_knowledge, StateVector(chain.after_knowledge.layout(), target)) >= 1.0 - 1e-10,
            "post-knowledge state is not the outcome basis state");
  }
  require(worst <= 1e-12, fmt("off-diagonal %.3e after marking", worst));
  return fmt("max off-diagonal %.3e", worst);
}

std::string inv_sampled_vs_exact() {
  RngStream rng(106);
  SternGerlachOptions sg;
  const auto sg_report = stern_gerlach(sg, rng);
  require(oracle::within_binomial((*sg_report.counts)[0], sg.shots, 0.5), "Stern-Gerlach sampling off by > 3 sigma");
  MachZehnderOptions mz;
  mz.second_mirror = true;
  mz.phase = 2.0;
  const auto mz_report = mach_zehnder(mz, rng);
  require(oracle::within_binomial((*mz_report.counts)[0], mz.shots, (*mz_report.exact_probabilities)[0]),
          "Mach-Zehnder sampling off by > 3 sigma");
  const auto c = chsh(ChshSetting{}, bell_phi(), 100000, rng);
  require(std::abs(*c.s_sampled - c.s) <= 3.0 * c.sampled_sigma, "CHSH sampling off by > 3 sigma");
  return fmt("SG f0 %.4f, MZ f0 %.4f, S sampled %.4f", *sg_report.frequencies->begin(),
             *mz_report.frequencies->begin(), *c.s_sampled);
}

std::string inv_double_slit_visibility() {
  const auto profile = double_slit(slit_geometry(500e-9, 50e-6, 1.0), {true, true});
  const double v = fringe_visibility(profile);
  require(v >= 0.99, fmt("visibility %.4f", v));
  const double integral = std::accumulate(profile.bin_probability.begin(), profile.bin_probability.end(), 0.0);
  require(std::abs(integral - 1.0) <= 1e-9, "profile not normalized");
  return fmt("visibility %.6f", v);
}

}  // namespace

std::vector<Check> acceptance_checks() {
  return {
      {"AC1", "reduced state of Phi is I/2 on either factor", 1e-3, ac1_reduced_identity},
      {"AC2", "reduced state equals post-measurement ensemble; 100 processes agree", 1.0, ac2_equivalence},
      {"AC3", "no-signaling protocol decodes at chance (10 seeds)", 30.0, ac3_no_signaling},
      {"AC4", "mark + detect reproduces Born statistics and matching post-states", 5.0, ac4_measurement_postulate},
      {"AC5", "Stern-Gerlach exact path probabilities (0.5, 0.5)", 0.0, ac5_stern_gerlach},
      {"AC6", "Mach-Zehnder with and without the second mirror", 0.0, ac6_mach_zehnder},
      {"AC7", "double-slit normalization, fringe spacing, single-slit envelope", 0.0, ac7_double_slit},
      {"AC8", "CHSH: 2 sqrt 2 for Phi, |S| <= 2 for product states", 0.0, ac8_bell},
      {"AC9", "device runs: Born frequencies and shrinking coherence", 60.0, ac9_device_runs},
      {"AC10", "partial trace equals index-sum oracle up to dimension 64", 0.0, ac10_oracle_equivalence},
  };
}

std::vector<Check> invariant_checks() {
  return {
      {"INV-core-states", "norm preservation and product factorization", 0.0, inv_core_states},
      {"INV-core-channels", "channel trace, Born sums and linearity", 0.0, inv_channels_and_povms},
      {"INV-core-distance", "trace distance identity and triangle inequality", 0.0, inv_trace_distance},
      {"INV-mm-marking", "marking maps basis states to products", 0.0, inv_marking},
      {"INV-mm-measure", "measure matches Born for 50 random states (chi-square)", 0.0, inv_measure_chi_square},
      {"INV-mm-chain", "knowledge chain is diagonal after marking", 0.0, inv_knowledge_chain},
      {"INV-exp-sampling", "sampled modes agree with exact modes at 1e5 shots", 0.0, inv_sampled_vs_exact},
      {"INV-exp-visibility", "double-slit visibility >= 0.99 for equal slits", 0.0, inv_double_slit_visibility},
  };
}

CheckOutcome run_check(const Check& check) {
  CheckOutcome out{check.id, check.name, false, "", 0.0, check.time_limit_seconds};
  const auto start = std::chrono::steady_clock::now();
  try {
    out.detail = check.body();
    out.passed = true;
  } catch (const std::exception& e) {
    out.detail = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.passed && check.time_limit_seconds > 0.0 && out.seconds > check.time_limit_seconds) {
    out.passed = false;
    out.detail += fmt(" [runtime %.3gs exceeds limit %.3gs]", out.seconds, check.time_limit_seconds);
  }
  return out;
}

}  // namespace qmeasure::acceptance
