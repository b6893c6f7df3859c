#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "qmeasure/errors.hpp"
#include "qmeasure/experiments.hpp"
#include "qmeasure/nosignal.hpp"
#include "qmeasure/oracles.hpp"

using namespace qmeasure;

TEST_CASE("stern_gerlach") {
  RngStream rng(1);
  SternGerlachOptions exact;
  exact.shots = 0;
  auto rep = stern_gerlach(exact, rng);
  REQUIRE(rep.exact_probabilities);
  CHECK(std::abs((*rep.exact_probabilities)[0] - 0.5) <= 1e-12);
  CHECK(std::abs((*rep.exact_probabilities)[1] - 0.5) <= 1e-12);
  CHECK(rep.diagnostics["reduced_path_offdiag"].get<double>() <= 1e-12);
  CHECK(!rep.frequencies);

  SUBCASE("joint state is (|z+>|upper> + i|z->|lower>)/sqrt 2") {
    const auto& j = rep.diagnostics["joint_state"];
    // Column vector: one [re, im] pair per row; order (spin, path).
    CHECK(std::abs(j[0][0][0].get<double>() - M_SQRT1_2) <= 1e-12);
    CHECK(std::abs(j[3][0][1].get<double>() - M_SQRT1_2) <= 1e-12);
    CHECK(std::hypot(j[1][0][0].get<double>(), j[1][0][1].get<double>()) <= 1e-12);
    CHECK(std::hypot(j[2][0][0].get<double>(), j[2][0][1].get<double>()) <= 1e-12);
  }
  SUBCASE("z+ input passes the upper path only") {
    SternGerlachOptions z;
    z.shots = 1000;
    z.input = SpinInput::z_plus;
    auto r = stern_gerlach(z, rng);
    CHECK((*r.exact_probabilities)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((*r.counts)[0] == 1000);
  }
  SUBCASE("1e5 shots, seed 1") {
    RngStream seeded(1);
    SternGerlachOptions sampled;
    sampled.shots = 100000;
    auto r = stern_gerlach(sampled, seeded);
    CHECK(oracle::within_binomial((*r.counts)[0], 100000, 0.5));
    CHECK(r.diagnostics["min_post_fidelity"].get<double>() >= 1.0 - 1e-10);
  }
}

namespace {

// Closed form for the interferometer: BS * diag(1, e^{i phi}) * BS * e0.
std::array<double, 2> mz_oracle(double phi) {
  const Complex i{0.0, 1.0};
  const Complex e = std::polar(1.0, phi);
  const Complex d1 = 0.5 * (1.0 + i * i * e);
  const Complex d2 = 0.5 * (i + i * e);
  return {std::norm(d1), std::norm(d2)};
}

}  // namespace

TEST_CASE("mach_zehnder") {
  auto open = mach_zehnder_probabilities(false, 0.0);
  CHECK(std::abs(open[0] - 0.5) <= 1e-12);
  CHECK(std::abs(open[1] - 0.5) <= 1e-12);
  auto closed = mach_zehnder_probabilities(true, 0.0);
  CHECK(std::abs(closed[0]) <= 1e-12);
  CHECK(std::abs(closed[1] - 1.0) <= 1e-12);
  auto flipped = mach_zehnder_probabilities(true, M_PI);
  CHECK(std::abs(flipped[0] - 1.0) <= 1e-12);
  CHECK(std::abs(flipped[1]) <= 1e-12);

  SUBCASE("phase sweep on 32 points") {
    for (int k = 0; k < 32; ++k) {
      const double phi = 2.0 * M_PI * k / 32.0;
      const auto p = mach_zehnder_probabilities(true, phi);
      const auto expected = mz_oracle(phi);
      CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
      CHECK(std::abs(p[0] - expected[0]) <= 1e-10);
      CHECK(std::abs(p[1] - expected[1]) <= 1e-10);
      CHECK(std::abs(p[0] - std::pow(std::sin(phi / 2), 2)) <= 1e-10);
      // Without the second mirror the phase never matters.
      const auto q = mach_zehnder_probabilities(false, phi);
      CHECK(std::abs(q[0] - 0.5) <= 1e-12);
    }
  }
  SUBCASE("sampled run agrees with exact within 3 sigma") {
    RngStream rng(2);
    MachZehnderOptions opts;
    opts.second_mirror = true;
    opts.phase = 1.0;
    auto rep = mach_zehnder(opts, rng);
    const double p0 = std::pow(std::sin(0.5), 2);
    CHECK(oracle::within_binomial((*rep.counts)[0], opts.shots, p0));
  }
}

namespace {

SlitGeometry geometry(double lambda, double d, double l) {
  SlitGeometry g;
  g.wavelength = lambda;
  g.slit_separation = d;
  g.slit_width = d / 20.0;
  g.screen_distance = l;
  const double period = lambda * l / d;
  g.x_min = -5.0 * period;
  g.x_max = 5.0 * period;
  g.n_points = 2001;
  return g;
}

}  // namespace

TEST_CASE("double_slit") {
  SlitGeometry g = geometry(500e-9, 50e-6, 1.0);
  auto both = double_slit(g, {true, true});
  REQUIRE(both.x.size() == 2001);
  const double integral = std::accumulate(both.bin_probability.begin(), both.bin_probability.end(), 0.0);
  CHECK(std::abs(integral - 1.0) <= 1e-9);
  for (double d : both.density) CHECK(d >= 0.0);

  SUBCASE("symmetric and maximal at the centre") {
    const std::size_t n = both.x.size();
    double asym = 0.0;
    for (std::size_t k = 0; k < n; ++k) asym = std::max(asym, std::abs(both.density[k] - both.density[n - 1 - k]));
    CHECK(asym <= 1e-9);
    const auto peak = std::max_element(both.density.begin(), both.density.end()) - both.density.begin();
    CHECK(std::abs(both.x[static_cast<std::size_t>(peak)]) <= 1e-12);
  }
  SUBCASE("one slit: envelope only") {
    CHECK(local_maxima(double_slit(g, {true, false})).size() == 1);
    CHECK(local_maxima(double_slit(g, {false, true})).size() == 1);
    CHECK(local_maxima(both).size() > 5);
  }
  SUBCASE("fringe spacing equals lambda L / d within one grid step") {
    for (auto geom : {geometry(500e-9, 50e-6, 1.0), geometry(633e-9, 100e-6, 2.0), geometry(400e-9, 40e-6, 0.5)}) {
      const auto spacing = fringe_spacing(double_slit(geom, {true, true}));
      REQUIRE(spacing);
      CHECK(std::abs(*spacing - geom.fringe_period()) <= geom.grid_step());
    }
    CHECK(std::abs(g.fringe_period() - 0.01) <= 1e-15);
  }
  SUBCASE("visibility near the centre") { CHECK(fringe_visibility(both) >= 0.99); }
  SUBCASE("analytic intensity") {
    // |w1 + w2|^2 = e1^2 + e2^2 + 2 e1 e2 cos(2 pi x d / (lambda L)) before normalization.
    const double scale = both.density[1000] / std::norm(slit_amplitude(g, 0, 0.0) + slit_amplitude(g, 1, 0.0));
    for (std::size_t k = 0; k < both.x.size(); k += 97) {
      const double x = both.x[k];
      const double e1 = std::abs(slit_amplitude(g, 0, x));
      const double e2 = std::abs(slit_amplitude(g, 1, x));
      const double expected = e1 * e1 + e2 * e2 + 2 * e1 * e2 * std::cos(2 * M_PI * x / g.fringe_period());
      CHECK(std::abs(both.density[k] - scale * expected) <= 1e-9 * both.density[1000]);
    }
  }
  SUBCASE("errors and flags") {
    CHECK_THROWS_AS(double_slit(g, {false, false}), GeometryError);
    SlitGeometry coarse = g;
    coarse.n_points = 10;
    CHECK_THROWS_AS(double_slit(coarse, {true, true}), GeometryError);
    SlitGeometry bad = g;
    bad.wavelength = -1.0;
    CHECK_THROWS_AS(bad.validate(), GeometryError);
    CHECK(g.far_field());
  }
  SUBCASE("unequal weights lower the visibility") {
    SlitGeometry w = g;
    w.weights = {1.0, 0.5};
    CHECK(fringe_visibility(double_slit(w, {true, true})) < 0.9);
  }
}

TEST_CASE("csv output") {
  const auto dir = std::filesystem::temp_directory_path() / "qmeasure_test_csv";
  std::filesystem::create_directories(dir);
  SlitGeometry g;
  g.n_points = 64;
  auto profile = double_slit(g, {true, true});
  const auto path = dir / "profile.csv";
  emit_csv(profile, path);

  std::ifstream in(path);
  std::size_t lines = 0;
  std::string line, header;
  std::getline(in, header);
  ++lines;
  while (std::getline(in, line)) ++lines;
  CHECK(header == "x,density");
  CHECK(lines == 65);

  auto back = read_csv(path);
  REQUIRE(back.x.size() == 64);
  for (std::size_t k = 0; k < 64; ++k) {
    CHECK(back.x[k] == profile.x[k]);
    CHECK(back.density[k] == profile.density[k]);
    CHECK(back.density[k] >= 0.0);
  }
  double riemann = 0.0;
  for (double d : back.density) riemann += d * back.dx;
  CHECK(std::abs(riemann - 1.0) <= 1e-9);

  CHECK_THROWS_AS(emit_csv(profile, dir / "missing_dir" / "x.csv"), Error);
  std::filesystem::remove_all(dir);
}

namespace {

// Product-state correlator: E(a,b) = <A(a)>_1 <A(b)>_2 with <A(t)> = cos t <Z> + sin t <X>.
double product_correlator(const Vector& s1, const Vector& s2, double a, double b) {
  auto expect = [](const Vector& s, double t) {
    const double z = std::norm(s(0)) - std::norm(s(1));
    const double x = 2.0 * (std::conj(s(0)) * s(1)).real();
    return std::cos(t) * z + std::sin(t) * x;
  };
  return expect(s1, a) * expect(s2, b);
}

}  // namespace

TEST_CASE("chsh") {
  RngStream rng(3);
  const ChshSetting optimal;
  auto phi = bell_phi();
  auto r = chsh(optimal, phi, 0, rng);
  CHECK(std::abs(r.s - 2.0 * std::sqrt(2.0)) <= 1e-9);
  // For Phi, E(a,b) = cos(a - b).
  CHECK(std::abs(r.correlators[0] - std::cos(optimal.a - optimal.b)) <= 1e-12);
  CHECK(std::abs(r.correlators[1] - std::cos(optimal.a - optimal.b_prime)) <= 1e-12);
  CHECK(std::abs(r.correlators[2] - std::cos(optimal.a_prime - optimal.b)) <= 1e-12);
  CHECK(std::abs(r.correlators[3] - std::cos(optimal.a_prime - optimal.b_prime)) <= 1e-12);

  CHECK(std::abs(correlator(to_density(phi), 0.7, 0.7) - 1.0) <= 1e-12);

  SUBCASE("product states respect the classical bound") {
    const SubsystemLayout q1 = SubsystemLayout::single("a", 2), q2 = SubsystemLayout::single("b", 2);
    for (int trial = 0; trial < 100; ++trial) {
      auto s1 = random_state(q1, rng);
      auto s2 = random_state(q2, rng);
      auto res = chsh(optimal, tensor(s1, s2), 0, rng);
      CHECK(std::abs(res.s) <= 2.0 + 1e-9);
      CHECK(std::abs(res.correlators[0] - product_correlator(s1.amplitudes(), s2.amplitudes(), optimal.a, optimal.b)) <=
            1e-12);
    }
    auto up_up = tensor(StateVector::qubit(1, 0, "a"), StateVector::qubit(1, 0, "b"));
    CHECK(std::abs(chsh(optimal, up_up, 0, rng).s) <= 2.0 + 1e-9);
  }
  SUBCASE("sampled S within 3 sigma of exact") {
    auto res = chsh(optimal, phi, 100000, rng);
    REQUIRE(res.s_sampled);
    CHECK(std::abs(*res.s_sampled - res.s) <= 3.0 * res.sampled_sigma);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(chsh(optimal, StateVector::qubit(1, 0), 0, rng), ShapeError);
    ChshSetting nan_setting;
    nan_setting.a = std::nan("");
    CHECK_THROWS_AS(chsh(nan_setting, phi, 0, rng), ShapeError);
  }
}
