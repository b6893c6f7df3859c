#include "qmeasure/cli.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "qmeasure/acceptance.hpp"
#include "qmeasure/device_runs.hpp"
#include "qmeasure/errors.hpp"
#include "qmeasure/experiments.hpp"
#include "qmeasure/nosignal.hpp"

namespace qmeasure::cli {

namespace {

struct Flags {
  std::uint64_t seed = 1;
  std::size_t shots = 0;
  bool exact = false;

  // measure / device-runs
  double alpha = 0.6;
  double beta = 0.8;
  double beta_phase = 0.0;
  std::string basis = "z";
  std::size_t n_env = 8;
  std::size_t runs = 1000;

  // sg
  std::string input = "y+";

  // mz
  bool second_mirror = false;
  double phase = 0.0;

  // double-slit
  SlitGeometry geometry;
  std::string slits = "both";
  std::string csv;

  // chsh
  ChshSetting angles;
  std::string state = "phi";

  // nosignal
  ProtocolConfig protocol;
  std::string message;
};

StateVector qubit_from_flags(const Flags& f) {
  Vector v(2);
  v << f.alpha, std::polar(f.beta, f.beta_phase);
  return StateVector::normalized(SubsystemLayout::single("spin", 2), v);
}

MeasurementBasis basis_from_flag(const std::string& name) {
  if (name == "x") return MeasurementBasis::spin_x();
  if (name == "y") return MeasurementBasis::spin_y();
  return MeasurementBasis::spin_z();
}

std::size_t effective_shots(const Flags& f) { return f.exact ? 0 : f.shots; }

RunReport cmd_measure(const Flags& f, RngStream& rng) {
  const StateVector psi = qubit_from_flags(f);
  const MeasurementBasis basis = basis_from_flag(f.basis);
  const MarkedState ms = mark(psi, basis);
  RunReport r;
  r.command = "measure";
  r.config = {{"alpha", f.alpha}, {"beta", f.beta}, {"beta_phase", f.beta_phase}, {"basis", f.basis},
              {"shots", effective_shots(f)}};
  for (std::size_t i = 0; i < basis.size(); ++i) r.labels.push_back(basis.label(i));
  r.exact_probabilities = outcome_probabilities(ms);
  r.diagnostics["ready_state"] = matrix_to_json(ms.joint.amplitudes());
  r.diagnostics["reduced_marker"] = matrix_to_json(reduced_marker(ms).entries());
  r.diagnostics["reduced_system"] = matrix_to_json(reduced_state(ms.joint, ms.measured).entries());
  if (effective_shots(f) > 0) {
    const ShotSummary s = sample_detections(ms, effective_shots(f), rng);
    r.counts = s.counts;
    r.frequencies = frequencies_from_counts(s.counts);
    r.diagnostics["min_post_fidelity"] = s.min_fidelity;
  }
  return r;
}

RunReport cmd_sg(const Flags& f, RngStream& rng) {
  SternGerlachOptions opts;
  opts.shots = effective_shots(f);
  opts.input = f.input == "z+" ? SpinInput::z_plus : SpinInput::y_plus;
  return stern_gerlach(opts, rng);
}

RunReport cmd_mz(const Flags& f, RngStream& rng) {
  MachZehnderOptions opts;
  opts.shots = effective_shots(f);
  opts.second_mirror = f.second_mirror;
  opts.phase = f.phase;
  return mach_zehnder(opts, rng);
}

RunReport cmd_double_slit(const Flags& f, RngStream&) {
  const std::array<bool, 2> open{f.slits != "lower", f.slits != "upper"};
  const IntensityProfile profile = double_slit(f.geometry, open);
  const auto& g = f.geometry;
  RunReport r;
  r.command = "double-slit";
  r.config = {{"wavelength", g.wavelength}, {"slit_separation", g.slit_separation}, {"slit_width", g.slit_width},
              {"screen_distance", g.screen_distance}, {"x_min", g.x_min}, {"x_max", g.x_max},
              {"n_points", g.n_points}, {"slits", f.slits}, {"csv", f.csv}};
  double integral = 0.0;
  for (double p : profile.bin_probability) integral += p;
  const auto spacing = fringe_spacing(profile);
  r.diagnostics["integral"] = integral;
  r.diagnostics["fringe_period_expected"] = g.fringe_period();
  r.diagnostics["fringe_spacing_measured"] = spacing ? Json(*spacing) : Json(nullptr);
  r.diagnostics["grid_step"] = g.grid_step();
  r.diagnostics["local_maxima"] = local_maxima(profile).size();
  r.diagnostics["visibility"] = fringe_visibility(profile);
  r.diagnostics["far_field"] = g.far_field();
  if (!f.csv.empty()) emit_csv(profile, f.csv);
  return r;
}

RunReport cmd_chsh(const Flags& f, RngStream& rng) {
  const StateVector state = f.state == "up-up"
                                ? tensor(StateVector::qubit(1.0, 0.0, "alice"), StateVector::qubit(1.0, 0.0, "bob"))
                                : bell_phi();
  const ChshResult res = chsh(f.angles, state, effective_shots(f), rng);
  RunReport r;
  r.command = "chsh";
  r.config = {{"state", f.state}, {"a", f.angles.a}, {"a_prime", f.angles.a_prime}, {"b", f.angles.b},
              {"b_prime", f.angles.b_prime}, {"shots", effective_shots(f)}};
  r.diagnostics["S"] = res.s;
  r.diagnostics["correlators"] = res.correlators;
  r.diagnostics["classical_bound_violated"] = std::abs(res.s) > 2.0 + 1e-9;
  if (res.s_sampled) {
    r.diagnostics["S_sampled"] = *res.s_sampled;
    r.diagnostics["S_sampled_sigma"] = res.sampled_sigma;
    r.diagnostics["correlators_sampled"] = res.sampled_correlators;
  }
  return r;
}

RunReport cmd_nosignal(const Flags& f, RngStream& rng) {
  ProtocolConfig cfg = f.protocol;
  cfg.exact = f.exact;
  cfg.seed = rng.seed();
  std::vector<int> bits;
  if (f.message.empty()) {
    RngStream msg = rng.split(0xA11CE);
    for (std::size_t g = 0; g < cfg.n_groups; ++g) bits.push_back(msg.uniform() < 0.5 ? 0 : 1);
  } else {
    for (char c : f.message) {
      if (c != '0' && c != '1') throw ShapeError("--message must contain only 0 and 1");
      bits.push_back(c - '0');
    }
    cfg.n_groups = bits.size();
  }
  const DistinguishReport rep = run_protocol(cfg, bits);
  RunReport r;
  r.command = "nosignal";
  r.config = {{"pairs_per_group", cfg.n_pairs_per_group}, {"groups", cfg.n_groups},
              {"pool", cfg.process_pool_size}, {"exact", cfg.exact}};
  r.diagnostics["message"] = bits;
  r.diagnostics["decoded"] = rep.decoded;
  r.diagnostics["accuracy"] = rep.accuracy;
  r.diagnostics["chance_sigma"] = std::sqrt(0.25 / static_cast<double>(cfg.n_groups));
  r.diagnostics["trace_distances"] = rep.trace_distances;
  r.diagnostics["max_trace_distance"] =
      rep.trace_distances.empty() ? 0.0 : *std::max_element(rep.trace_distances.begin(), rep.trace_distances.end());
  r.diagnostics["max_exact_separation"] = rep.max_exact_separation;
  if (!cfg.exact) r.diagnostics["max_sampled_separation"] = rep.max_sampled_separation;
  return r;
}

RunReport cmd_device_runs(const Flags& f, RngStream& rng) {
  const DeviceRunReport rep = simulate_device_runs(qubit_from_flags(f), basis_from_flag(f.basis), f.n_env, f.runs, rng);
  RunReport r;
  r.command = "device-runs";
  r.config = {{"alpha", f.alpha}, {"beta", f.beta}, {"beta_phase", f.beta_phase}, {"basis", f.basis},
              {"n_env", f.n_env}, {"runs", f.runs}};
  r.labels = rep.labels;
  r.exact_probabilities = rep.born;
  r.counts = rep.counts;
  r.frequencies = rep.frequencies;
  r.diagnostics["mean_coherence"] = rep.mean_coherence;
  r.diagnostics["single_reading_per_run"] = rep.outcomes.size() == rep.n_runs;
  return r;
}

// Runs invariant checks then acceptance criteria, stopping at the first failure.
int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err) {
  using namespace acceptance;
  const auto start = std::chrono::steady_clock::now();
  Json checks = Json::array();
  bool ok = true;
  std::vector<Check> all = invariant_checks();
  for (auto& c : acceptance_checks()) all.push_back(std::move(c));
  for (const auto& check : all) {
    const CheckOutcome r = run_check(check);
    checks.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
    err << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << '\n';
    if (!r.passed) {
      err << "verification failed at " << r.id << ": " << r.detail << '\n';
      ok = false;
      break;
    }
  }
  Json j;
  j["command"] = "verify";
  j["seed"] = seed;
  j["passed"] = ok;
  j["checks"] = checks;
  j["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << j.dump(2) << '\n';
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Two-step quantum measurement simulations"};
  app.name("qmeasure");
  app.require_subcommand(1);
  app.add_option("--seed", f.seed, "64-bit seed (env QMEASURE_SEED)")->envname("QMEASURE_SEED")->capture_default_str();

  auto* measure = app.add_subcommand("measure", "mark + detect a qubit in a spin basis");
  measure->add_option("--alpha", f.alpha, "amplitude of |up>")->capture_default_str();
  measure->add_option("--beta", f.beta, "modulus of the |down> amplitude")->capture_default_str();
  measure->add_option("--beta-phase", f.beta_phase, "phase of the |down> amplitude (radians)")->capture_default_str();
  measure->add_option("--basis", f.basis, "measurement basis")->check(CLI::IsMember({"z", "x", "y"}))->capture_default_str();
  measure->add_option("--shots", f.shots, "number of sampled shots (0: exact only)")->default_val(100000);
  measure->add_flag("--exact", f.exact, "report exact probabilities only, no sampling");

  auto* sg = app.add_subcommand("sg", "Stern-Gerlach: z-spin marked by path");
  sg->add_option("--input", f.input, "prepared spin state")->check(CLI::IsMember({"y+", "z+"}))->capture_default_str();
  sg->add_option("--shots", f.shots, "number of sampled shots (0: exact only)")->default_val(100000);
  sg->add_flag("--exact", f.exact, "report exact probabilities only, no sampling");

  auto* mz = app.add_subcommand("mz", "Mach-Zehnder interferometer");
  mz->add_flag("--second-mirror", f.second_mirror, "insert the second half-silvered mirror");
  mz->add_option("--phase", f.phase, "extra phase on the lower arm (radians)")->capture_default_str();
  mz->add_option("--shots", f.shots, "number of sampled shots (0: exact only)")->default_val(100000);
  mz->add_flag("--exact", f.exact, "report exact probabilities only, no sampling");

  auto* ds = app.add_subcommand("double-slit", "two-slit screen profile |w1 + w2|^2");
  ds->add_option("--wavelength", f.geometry.wavelength, "wavelength (m)")->check(CLI::PositiveNumber)->capture_default_str();
  ds->add_option("--separation", f.geometry.slit_separation, "slit separation d (m)")->check(CLI::PositiveNumber)->capture_default_str();
  ds->add_option("--width", f.geometry.slit_width, "slit width w (m)")->check(CLI::PositiveNumber)->capture_default_str();
  ds->add_option("--distance", f.geometry.screen_distance, "screen distance L (m)")->check(CLI::PositiveNumber)->capture_default_str();
  ds->add_option("--x-min", f.geometry.x_min, "screen start (m)")->capture_default_str();
  ds->add_option("--x-max", f.geometry.x_max, "screen end (m)")->capture_default_str();
  ds->add_option("--points", f.geometry.n_points, "grid points (>= 64)")->check(CLI::Range(std::size_t{64}, std::size_t{1} << 24))->capture_default_str();
  ds->add_option("--slits", f.slits, "open slits")->check(CLI::IsMember({"both", "upper", "lower"}))->capture_default_str();
  ds->add_option("--csv", f.csv, "write x,density rows to this file");

  auto* ch = app.add_subcommand("chsh", "CHSH value of a two-qubit state");
  ch->add_option("--a", f.angles.a, "Alice angle a (radians)")->capture_default_str();
  ch->add_option("--a-prime", f.angles.a_prime, "Alice angle a' (radians)")->capture_default_str();
  ch->add_option("--b", f.angles.b, "Bob angle b (radians)")->capture_default_str();
  ch->add_option("--b-prime", f.angles.b_prime, "Bob angle b' (radians)")->capture_default_str();
  ch->add_option("--state", f.state, "two-qubit state")->check(CLI::IsMember({"phi", "up-up"}))->capture_default_str();
  ch->add_option("--shots", f.shots, "shots per setting pair (0: exact only)")->default_val(100000);
  ch->add_flag("--exact", f.exact, "report exact values only, no sampling");

  auto* ns = app.add_subcommand("nosignal", "Alice/Bob reduced-vs-mixed distinguishing protocol");
  ns->add_option("--pairs", f.protocol.n_pairs_per_group, "pairs per group")->check(CLI::PositiveNumber)->capture_default_str();
  ns->add_option("--groups", f.protocol.n_groups, "groups (one message bit each)")->check(CLI::PositiveNumber)->capture_default_str();
  ns->add_option("--pool", f.protocol.process_pool_size, "random (channel, POVM) processes")->check(CLI::PositiveNumber)->capture_default_str();
  ns->add_option("--message", f.message, "bit string sent by Alice (default: random from the seed)");
  ns->add_flag("--exact", f.exact, "Bob sees exact outcome probabilities");

  auto* dr = app.add_subcommand("device-runs", "per-run random device evolutions");
  dr->add_option("--alpha", f.alpha, "amplitude of |up>")->capture_default_str();
  dr->add_option("--beta", f.beta, "modulus of the |down> amplitude")->capture_default_str();
  dr->add_option("--beta-phase", f.beta_phase, "phase of the |down> amplitude (radians)")->capture_default_str();
  dr->add_option("--basis", f.basis, "measurement basis")->check(CLI::IsMember({"z", "x", "y"}))->capture_default_str();
  dr->add_option("--n-env", f.n_env, "environment qubits (0-12)")->check(CLI::Range(0, 12))->capture_default_str();
  dr->add_option("--runs", f.runs, "number of runs")->check(CLI::PositiveNumber)->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the invariant and acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run 'qmeasure --help' for usage\n";
    return kExitUsage;
  }

  if (verify->parsed()) return cmd_verify(f.seed, out, err);

  const std::map<CLI::App*, std::function<RunReport(const Flags&, RngStream&)>> commands{
      {measure, cmd_measure}, {sg, cmd_sg},      {mz, cmd_mz},           {ds, cmd_double_slit},
      {ch, cmd_chsh},         {ns, cmd_nosignal}, {dr, cmd_device_runs}};
  try {
    for (const auto& [sub, fn] : commands) {
      if (!sub->parsed()) continue;
      const auto start = std::chrono::steady_clock::now();
      RngStream rng(f.seed);
      RunReport report = fn(f, rng);
      report.seed = f.seed;
      report.validate();
      report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out << report.to_json().dump(2) << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << "no subcommand\n";
  return kExitUsage;
}

}  // namespace qmeasure::cli
