#include <cmath>

#include "doctest.h"
#include "qmeasure/errors.hpp"
#include "qmeasure/operators.hpp"
#include "qmeasure/oracles.hpp"
#include "qmeasure/random.hpp"
#include "qmeasure/state.hpp"

#include <unsupported/Eigen/KroneckerProduct>

using namespace qmeasure;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector up(const std::string& label = "s") { return StateVector::qubit(1.0, 0.0, label); }
StateVector down(const std::string& label = "s") { return StateVector::qubit(0.0, 1.0, label); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

DensityMatrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return DensityMatrix(SubsystemLayout::single("s", 2), m);
}

StateVector bell_phi() {
  Vector v = Vector::Zero(4);
  v(0) = kInvSqrt2;
  v(3) = kInvSqrt2;
  return StateVector(SubsystemLayout({{"a", 2}, {"b", 2}}), v);
}

void check_density_invariants(const DensityMatrix& rho) {
  const Matrix& m = rho.entries();
  CHECK(max_abs(m - m.adjoint()) <= 1e-12);
  CHECK(std::abs(m.trace().real() - 1.0) <= 1e-12);
  CHECK(hermitian_eigenvalues(m)(0) >= -1e-10);
}

}  // namespace

TEST_CASE("layout validates labels and dimensions") {
  CHECK_THROWS_AS(SubsystemLayout({{"a", 2}, {"a", 3}}), LayoutError);
  CHECK_THROWS_AS(SubsystemLayout({{"a", 0}}), LayoutError);
  SubsystemLayout l({{"sys", 2}, {"marker", 3}, {"env", 4}});
  CHECK(l.total_dim() == 24);
  CHECK(l.position("env") == 2);
  CHECK_THROWS_AS(l.position("nope"), LayoutError);
}

TEST_CASE("state construction enforces the unit norm") {
  Vector v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(StateVector(SubsystemLayout::single("s", 2), v), NormalizationError);
  v << 0.6, 0.8 + 1e-11;
  CHECK_THROWS_AS(StateVector(SubsystemLayout::single("s", 2), v), NormalizationError);
  v << std::nan(""), 0.0;
  CHECK_THROWS_AS(StateVector(SubsystemLayout::single("s", 2), v), NormalizationError);
  CHECK_THROWS_AS(StateVector(SubsystemLayout::single("s", 3), Vector::Unit(2, 0)), ShapeError);
}

TEST_CASE("tensor") {
  SUBCASE("basis product") {
    StateVector e = tensor(up("a"), up("b"));
    CHECK(e[0] == Complex(1.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(e[i]) == 0.0);
  }
  SUBCASE("dimension product") {
    auto q = StateVector::basis(SubsystemLayout::single("a", 2), 0);
    auto t = StateVector::basis(SubsystemLayout::single("b", 3), 1);
    CHECK(tensor(q, t).dim() == 6);
    CHECK(tensor(q, t).layout().factors().size() == 2);
  }
  SUBCASE("superposition times marker zero") {
    auto s = StateVector::qubit(kInvSqrt2, kInvSqrt2, "s");
    auto m = StateVector::basis(SubsystemLayout::single("m", 2), 0);
    auto j = tensor(s, m);
    CHECK(std::abs(j[0] - kInvSqrt2) < 1e-15);
    CHECK(std::abs(j[1]) == 0.0);
    CHECK(std::abs(j[2] - kInvSqrt2) < 1e-15);
    CHECK(std::abs(j[3]) == 0.0);
  }
  SUBCASE("label collision") { CHECK_THROWS_AS(tensor(up("a"), up("a")), LayoutError); }
  SUBCASE("matches explicit Kronecker oracle") {
    RngStream rng(3);
    auto a = random_state(SubsystemLayout({{"a", 3}, {"b", 2}}), rng);
    auto b = random_state(SubsystemLayout::single("c", 5), rng);
    const Vector expected = oracle::kron(a.amplitudes(), b.amplitudes());
    CHECK((tensor(a, b).amplitudes() - expected).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(std::abs(tensor(a, b).amplitudes().norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("to_density") {
  CHECK(max_abs(to_density(up()).entries() - diag2(1, 0).entries()) == 0.0);
  auto plus = StateVector::qubit(kInvSqrt2, kInvSqrt2);
  CHECK(max_abs(to_density(plus).entries() - Matrix::Constant(2, 2, 0.5)) <= 1e-15);
  auto r = to_density(StateVector::qubit(0.6, 0.8));
  CHECK(std::abs(r(0, 0).real() - 0.36) <= 1e-15);
  CHECK(std::abs(r(1, 1).real() - 0.64) <= 1e-15);
  CHECK(hermitian_eigenvalues(r.entries())(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(hermitian_eigenvalues(r.entries())(0)) <= 1e-12);
}

TEST_CASE("mix") {
  std::vector<EnsembleMember> half{{0.5, up()}, {0.5, down()}};
  CHECK(max_abs(mix(half).entries() - Matrix::Identity(2, 2) * 0.5) == 0.0);

  auto psi = StateVector::qubit(0.6, Complex(0.0, 0.8));
  std::vector<EnsembleMember> single{{1.0, psi}};
  CHECK(max_abs(mix(single).entries() - to_density(psi).entries()) <= 1e-15);

  std::vector<EnsembleMember> weighted{{0.36, up()}, {0.64, down()}};
  CHECK(max_abs(mix(weighted).entries() - diag2(0.36, 0.64).entries()) <= 1e-15);

  std::vector<EnsembleMember> bad{{0.5, up()}, {0.6, down()}};
  CHECK_THROWS_AS(mix(bad), NormalizationError);
  std::vector<EnsembleMember> negative{{1.5, up()}, {-0.5, down()}};
  CHECK_THROWS_AS(mix(negative), NormalizationError);
}

TEST_CASE("partial_trace") {
  SUBCASE("Bell pair reduces to half identity on either side") {
    auto rho = to_density(bell_phi());
    CHECK(max_abs(partial_trace(rho, {"a"}).entries() - 0.5 * Matrix::Identity(2, 2)) <= 1e-12);
    CHECK(max_abs(partial_trace(rho, {"b"}).entries() - 0.5 * Matrix::Identity(2, 2)) <= 1e-12);
  }
  SUBCASE("product state factorizes") {
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_state(SubsystemLayout::single("a", 3), rng);
      auto b = random_state(SubsystemLayout({{"b", 2}, {"c", 2}}), rng);
      auto reduced = partial_trace(to_density(tensor(a, b)), {"a"});
      CHECK(max_abs(reduced.entries() - to_density(a).entries()) <= 1e-12);
      auto reduced_b = partial_trace(to_density(tensor(a, b)), {"b", "c"});
      CHECK(max_abs(reduced_b.entries() - to_density(b).entries()) <= 1e-12);
    }
  }
  SUBCASE("dims (2,3) keep the 3-dim factor against the index-sum oracle") {
    RngStream rng(5);
    auto psi = random_state(SubsystemLayout({{"a", 2}, {"b", 3}}), rng);
    auto rho = to_density(psi);
    auto got = partial_trace(rho, {"b"});
    CHECK(got.layout() == SubsystemLayout::single("b", 3));
    CHECK(max_abs(got.entries() - oracle::partial_trace(rho.entries(), {2, 3}, {false, true})) <= 1e-12);
  }
  SUBCASE("output keeps original factor order") {
    RngStream rng(8);
    auto rho = to_density(random_state(SubsystemLayout({{"a", 2}, {"b", 3}, {"c", 2}}), rng));
    auto got = partial_trace(rho, {"c", "a"});
    CHECK(got.layout().factors()[0].label == "a");
    CHECK(max_abs(got.entries() - oracle::partial_trace(rho.entries(), {2, 3, 2}, {true, false, true})) <= 1e-12);
  }
  SUBCASE("errors") {
    auto rho = to_density(bell_phi());
    CHECK_THROWS_AS(partial_trace(rho, {"zzz"}), LayoutError);
    CHECK_THROWS_AS(partial_trace(rho, std::span<const std::string>{}), LayoutError);
  }
  SUBCASE("reduced_state agrees with partial_trace of the projector") {
    RngStream rng(21);
    auto psi = random_state(SubsystemLayout({{"a", 3}, {"b", 2}, {"c", 4}}), rng);
    for (const auto& keep : std::vector<std::vector<std::string>>{{"a"}, {"b"}, {"a", "c"}, {"b", "c"}}) {
      CHECK(max_abs(reduced_state(psi, keep).entries() - partial_trace(to_density(psi), keep).entries()) <= 1e-12);
    }
  }
}

TEST_CASE("partial_trace matches the oracle on random layouts up to dimension 64") {
  RngStream rng(64);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Factor> factors;
    std::size_t total = 1;
    const std::size_t n_factors = 1 + rng.uniform_index(4);
    for (std::size_t k = 0; k < n_factors; ++k) {
      const std::size_t d = 1 + rng.uniform_index(4);
      if (total * d > 64) break;
      total *= d;
      factors.push_back({"f" + std::to_string(k), d});
    }
    SubsystemLayout layout(factors);
    // Mixed input: random ensemble of three pure states.
    std::vector<EnsembleMember> ens{{0.2, random_state(layout, rng)},
                                    {0.3, random_state(layout, rng)},
                                    {0.5, random_state(layout, rng)}};
    auto rho = mix(ens);
    std::vector<bool> keep(factors.size());
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      keep[k] = rng.uniform() < 0.5;
      if (keep[k]) labels.push_back(factors[k].label);
    }
    if (labels.empty()) {
      keep[0] = true;
      labels.push_back(factors[0].label);
    }
    auto got = partial_trace(rho, labels);
    CHECK(max_abs(got.entries() - oracle::partial_trace(rho.entries(), layout.dims(), keep)) <= 1e-12);
    check_density_invariants(got);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("apply_unitary") {
  Matrix x(2, 2), h(2, 2);
  x << 0, 1, 1, 0;
  h << 1, 1, 1, -1;
  h *= kInvSqrt2;
  RngStream rng(2);
  auto psi = random_state(SubsystemLayout({{"a", 2}, {"b", 3}}), rng);
  CHECK((apply_unitary(psi, Matrix::Identity(6, 6), {"a", "b"}).amplitudes() - psi.amplitudes()).norm() <= 1e-15);
  CHECK(fidelity(apply_unitary(up(), x, {"s"}), down()) == doctest::Approx(1.0).epsilon(1e-15));
  auto plus = apply_unitary(up(), h, {"s"});
  CHECK(std::abs(plus[0] - kInvSqrt2) <= 1e-15);
  CHECK(std::abs(plus[1] - kInvSqrt2) <= 1e-15);

  SUBCASE("embedding matches explicit Kronecker embedding") {
    Matrix u = random_unitary(3, rng);
    auto got = apply_unitary(psi, u, {"b"});
    Matrix full = Eigen::kroneckerProduct(Matrix::Identity(2, 2), u);
    CHECK((got.amplitudes() - full * psi.amplitudes()).norm() <= 1e-12);
    auto rho = to_density(psi);
    auto got_rho = apply_unitary(rho, u, {"b"});
    CHECK(max_abs(got_rho.entries() - full * rho.entries() * full.adjoint()) <= 1e-12);
    check_density_invariants(got_rho);
  }
  SUBCASE("reordered targets") {
    Matrix u = random_unitary(6, rng);
    auto got = apply_unitary(psi, u, {"b", "a"});
    // Permutation P maps (a,b) ordering to (b,a) ordering.
    Matrix p = Matrix::Zero(6, 6);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 3; ++b) p(b * 2 + a, a * 3 + b) = 1.0;
    CHECK((got.amplitudes() - p.transpose() * u * p * psi.amplitudes()).norm() <= 1e-12);
  }
  SUBCASE("errors") {
    Matrix not_unitary = Matrix::Identity(2, 2) * 1.1;
    CHECK_THROWS_AS(apply_unitary(up(), not_unitary, {"s"}), UnitarityError);
    CHECK_THROWS_AS(apply_unitary(up(), Matrix::Identity(3, 3), {"s"}), ShapeError);
  }
}

TEST_CASE("apply_channel") {
  RngStream rng(4);
  auto rho = to_density(random_state(SubsystemLayout::single("s", 2), rng));
  CHECK(max_abs(apply_channel(rho, QuantumChannel::identity(2), {"s"}).entries() - rho.entries()) <= 1e-15);
  CHECK(max_abs(apply_channel(rho, QuantumChannel::depolarizing(1.0)).entries() - 0.5 * Matrix::Identity(2, 2)) <= 1e-15);

  auto all_half = to_density(StateVector::qubit(kInvSqrt2, kInvSqrt2, "s"));
  auto dephased = apply_channel(all_half, QuantumChannel::dephasing(0.5), {"s"});
  CHECK(max_abs(dephased.entries() - 0.5 * Matrix::Identity(2, 2)) <= 1e-15);

  std::vector<Matrix> leaky{Matrix::Identity(2, 2) * 0.9};
  CHECK_THROWS_AS(QuantumChannel{leaky}, ChannelError);

  SUBCASE("random channels on a factor preserve trace and positivity") {
    for (int trial = 0; trial < 30; ++trial) {
      auto joint = to_density(random_state(SubsystemLayout({{"a", 2}, {"b", 3}}), rng));
      auto ch = random_channel(3, 1 + rng.uniform_index(4), rng);
      auto out = apply_channel(joint, ch, {"b"});
      CHECK(std::abs(out.entries().trace().real() - 1.0) <= 1e-10);
      check_density_invariants(out);
      // Local channel on b leaves a's reduced state alone.
      CHECK(max_abs(partial_trace(out, {"a"}).entries() - partial_trace(joint, {"a"}).entries()) <= 1e-12);
    }
  }
}

TEST_CASE("born_probabilities") {
  auto z = Povm::computational(2);
  auto p = born_probabilities(DensityMatrix::maximally_mixed(SubsystemLayout::single("s", 2)), z);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  p = born_probabilities(to_density(up()), z);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  p = born_probabilities(diag2(0.36, 0.64), z);
  CHECK(std::abs(p[0] - 0.36) <= 1e-15);
  CHECK(std::abs(p[1] - 0.64) <= 1e-15);
  CHECK_THROWS_AS(born_probabilities(to_density(bell_phi()), z), ShapeError);

  SUBCASE("random states and POVMs sum to one; linear in the ensemble") {
    RngStream rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t d = 2 + rng.uniform_index(4);
      SubsystemLayout layout = SubsystemLayout::single("s", d);
      auto m = random_povm(d, 2 + rng.uniform_index(4), rng);
      std::vector<EnsembleMember> ens;
      double remaining = 1.0;
      for (int k = 0; k < 3; ++k) {
        const double w = k == 2 ? remaining : remaining * rng.uniform();
        remaining -= w;
        ens.push_back({w, random_state(layout, rng)});
      }
      const auto mixed = born_probabilities(mix(ens), m);
      double total = 0.0;
      for (double v : mixed) total += v;
      CHECK(std::abs(total - 1.0) <= 1e-9);
      std::vector<double> weighted(m.size(), 0.0);
      for (const auto& e : ens) {
        const auto pe = born_probabilities(to_density(e.state), m);
        for (std::size_t i = 0; i < m.size(); ++i) weighted[i] += e.probability * pe[i];
      }
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(mixed[i] - weighted[i]) <= 1e-10);
    }
  }
}

TEST_CASE("trace_distance") {
  RngStream rng(12);
  auto rho = to_density(random_state(SubsystemLayout::single("s", 2), rng));
  CHECK(trace_distance(rho, rho) <= 1e-15);
  CHECK(trace_distance(to_density(up()), to_density(down())) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(trace_distance(DensityMatrix::maximally_mixed(SubsystemLayout::single("s", 2)), diag2(0.75, 0.25)) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(trace_distance(rho, to_density(bell_phi())), ShapeError);

  SUBCASE("symmetry and triangle inequality") {
    SubsystemLayout layout = SubsystemLayout::single("s", 3);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<EnsembleMember> e1{{0.5, random_state(layout, rng)}, {0.5, random_state(layout, rng)}};
      auto a = mix(e1);
      auto b = to_density(random_state(layout, rng));
      auto c = to_density(random_state(layout, rng));
      CHECK(std::abs(trace_distance(a, b) - trace_distance(b, a)) <= 1e-12);
      CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9);
      CHECK(trace_distance(a, b) > 1e-10);
    }
  }
}

TEST_CASE("random_unitary") {
  RngStream rng(1);
  auto u1 = random_unitary(1, rng);
  CHECK(std::abs(std::abs(u1(0, 0)) - 1.0) <= 1e-15);
  for (std::size_t d : {2, 3, 8, 17}) CHECK(is_unitary(random_unitary(d, rng), 1e-10));

  RngStream a(42), b(42);
  const Matrix ua = random_unitary(2, a);
  const Matrix ub = random_unitary(2, b);
  CHECK((ua.array() == ub.array()).all());

  SUBCASE("second moment E|U_00|^2 = 1/d") {
    // Haar moments: E|U_ij|^2 = 1/d, E|U_ij|^4 = 2/(d(d+1)).
    RngStream r(77);
    const int n = 20000;
    const std::size_t d = 3;
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = std::norm(random_unitary(d, r)(1, 2));
      m2 += v;
      m4 += v * v;
    }
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(m2 - 1.0 / 3.0) < 5.0 * std::sqrt((2.0 / 12.0 - 1.0 / 9.0) / n));
    CHECK(std::abs(m4 - 2.0 / 12.0) < 0.01);
  }
  SUBCASE("phase fix makes the diagonal phase uniform") {
    // Without the R-diagonal correction arg(U_00) is biased; with it, E[U_00] = 0.
    RngStream r(78);
    Complex mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += random_unitary(2, r)(0, 0);
    CHECK(std::abs(mean / static_cast<double>(n)) < 0.02);
  }
}

TEST_CASE("random_povm") {
  RngStream rng(6);
  auto proj = random_povm(3, 3, rng, true);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto ev = hermitian_eigenvalues(proj.effects()[i]);
    CHECK(std::abs(ev(2) - 1.0) <= 1e-10);
    CHECK(std::abs(ev(1)) <= 1e-10);
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) CHECK(max_abs(proj.effects()[i] * proj.effects()[j]) <= 1e-10);
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_povm(4, 5, rng);
    Matrix sum = Matrix::Zero(4, 4);
    for (const auto& e : m.effects()) sum += e;
    CHECK(max_abs(sum - Matrix::Identity(4, 4)) <= 1e-10);
  }
  RngStream a(5), b(5);
  auto ma = random_povm(3, 4, a);
  auto mb = random_povm(3, 4, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK((ma.effects()[i].array() == mb.effects()[i].array()).all());
  CHECK_THROWS_AS(random_povm(3, 1, rng), ShapeError);
}

TEST_CASE("rng streams") {
  RngStream root(100);
  CHECK(root.split(3).seed() == RngStream(100).split(3).seed());
  CHECK(root.split(3).seed() != root.split(4).seed());
  std::vector<double> p{0.0, 0.25, 0.75};
  RngStream r(1);
  auto counts = sample_counts(p, 100000, r);
  CHECK(counts[0] == 0);
  CHECK(counts[1] + counts[2] == 100000);
  CHECK(oracle::within_binomial(counts[1], 100000, 0.25));
  RngStream r2(1);
  CHECK(sample_counts(p, 100000, r2) == counts);
  std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(sample_index(zeros, r), DegenerateDistributionError);
}
