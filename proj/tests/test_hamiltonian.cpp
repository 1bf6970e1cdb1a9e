#include <cmath>
#include <random>

#include "doctest.h"
#include "kamlab/error.hpp"
#include "kamlab/hamiltonian.hpp"
#include "support.hpp"

using namespace kamlab;

namespace {

const ModeSet kModes;
const std::vector<double> kZeroV(kModes.size(), 0.0);

HamiltonianPoly monomial(const MultiIndex& a, const MultiIndex& b, Complex c, int cap = 8) {
  PolyBuilder pb(kModes, cap);
  pb.add({a, b}, c);
  return pb.build(PruneRule{0.0, 0.0});
}

double rel_diff(const HamiltonianPoly& a, const HamiltonianPoly& b) {
  const HamiltonianPoly d = a - b;
  const double scale = std::max({a.max_abs_coefficient(), b.max_abs_coefficient(), 1e-300});
  return d.max_abs_coefficient() / scale;
}

std::vector<Complex> random_field(std::mt19937_64& rng, const std::vector<Mode>& support, double scale) {
  std::vector<Complex> u(kModes.size());
  std::normal_distribution<double> g(0.0, scale);
  for (Mode j : support) u[kModes.slot(j)] = {g(rng), g(rng)};
  return u;
}

}  // namespace

TEST_CASE("builder rejects inadmissible monomials") {
  PolyBuilder pb(kModes, 6);
  CHECK_THROWS_AS(pb.add({MultiIndex{{1, 1}}, MultiIndex{{2, 1}}}, 1.0), DomainError);
  CHECK_THROWS_AS(pb.add({MultiIndex{{1, 1}}, MultiIndex{{1, 2}}}, 1.0), DomainError);
  pb.add({MultiIndex{{1, 1}, {3, 1}}, MultiIndex{{2, 2}}}, 1.0);
  pb.add({MultiIndex{{1, 4}}, MultiIndex{{1, 4}}}, 1.0);  // above cap, discarded
  const HamiltonianPoly h = pb.build();
  CHECK(h.size() == 1);
}

TEST_CASE("pruning is relative to the largest coefficient") {
  PolyBuilder pb(kModes, 4);
  pb.add({MultiIndex{{1, 1}}, MultiIndex{{1, 1}}}, 1.0);
  pb.add({MultiIndex{{2, 1}}, MultiIndex{{2, 1}}}, 1e-15);
  pb.add({MultiIndex{{3, 1}}, MultiIndex{{3, 1}}}, 1e-13);
  const HamiltonianPoly h = pb.build();
  CHECK(h.size() == 2);
  CHECK(pb.dropped_mass() == doctest::Approx(1e-15));
  CHECK(h.prune_eps() == doctest::Approx(1e-14));
}

TEST_CASE("reality enforcement averages conjugate pairs") {
  PolyBuilder pb(kModes, 4);
  const MultiIndex a{{1, 1}, {3, 1}};
  const MultiIndex b{{2, 2}};
  pb.add({a, b}, Complex{1.0, 2.0});
  pb.add({a, a}, Complex{3.0, 1.0});
  const HamiltonianPoly h = pb.build(PruneRule{}, true);
  CHECK(h.coefficient(a, b) == Complex{0.5, 1.0});
  CHECK(h.coefficient(b, a) == Complex{0.5, -1.0});
  CHECK(h.coefficient(a, a) == Complex{3.0, 0.0});
  CHECK(h.reality_defect() == 0.0);
}

TEST_CASE("build_nls coefficients") {
  SUBCASE("f = 0, V = 0 leaves the quadratic part") {
    const HamiltonianPoly h = build_nls({{}, 1.0}, kZeroV, kModes, 4);
    CHECK(h.size() == 32);  // j = 0 has zero coefficient
    for (const auto& t : h.terms()) {
      CHECK(t.key.degree() == 2);
      const Mode j = t.key.alpha.entries()[0].first;
      CHECK(t.coeff == Complex(double(j) * j));
    }
  }
  SUBCASE("f(y) = y") {
    const HamiltonianPoly h = build_nls({{1.0}, 1.0}, kZeroV, kModes, 4);
    CHECK(h.coefficient(MultiIndex{{5, 2}}, MultiIndex{{5, 2}}) == Complex(0.5));
    CHECK(h.coefficient(MultiIndex{{5, 1}, {-2, 1}}, MultiIndex{{5, 1}, {-2, 1}}) == Complex(2.0));
    CHECK(h.coefficient(MultiIndex{{1, 1}, {3, 1}}, MultiIndex{{2, 2}}) == Complex(1.0));
    CHECK(h.reality_defect() == 0.0);
    for (const auto& t : h.terms()) CHECK(is_admissible_pair(t.key.alpha, t.key.beta));
  }
  SUBCASE("domain checks") {
    std::vector<double> bad(kModes.size(), 0.0);
    bad[3] = 0.6;
    CHECK_THROWS_AS(build_nls({{1.0}, 1.0}, bad, kModes, 4), DomainError);
    CHECK_THROWS_AS(build_nls({{1.0}, 1.0}, kZeroV, kModes, 5), DomainError);
    CHECK_THROWS_AS(build_nls({{1.0}, 1.0}, kZeroV, kModes, 2), DomainError);
  }
}

TEST_CASE("NLS evaluation agrees with x-space quadrature") {
  std::mt19937_64 rng(2024);
  const std::vector<std::vector<Mode>> supports{{1, 2, 3}, {-3, 0, 4}, {1, 2, 4, 8, -5}};
  for (const auto& model : {NonlinearityModel{{1.0}, 1.0}, NonlinearityModel{{1.0, -1.0}, 1.0}}) {
    const int cap = 2 * (static_cast<int>(model.coeffs.size()) + 1);
    std::vector<double> v(kModes.size());
    std::uniform_real_distribution<double> uv(-0.5, 0.5);
    for (double& x : v) x = uv(rng);
    const HamiltonianPoly h = build_nls(model, v, kModes, cap);
    for (const auto& s : supports) {
      const auto u = random_field(rng, s, 0.3);
      const double oracle = testing::nls_quadrature(model, v, kModes, u, 256);
      const Complex val = evaluate(h, u);
      CHECK(std::abs(val.imag()) < 1e-12);
      CHECK(std::abs(val.real() - oracle) <= 1e-10 * std::abs(oracle));
    }
  }
}

TEST_CASE("bracket eigenrelation with the frequency Hamiltonian") {
  std::mt19937_64 rng(3);
  std::vector<double> w;
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  for (Mode j : kModes.all()) w.push_back(double(j) * j + off(rng));
  const FrequencyVector omega(kModes, w);
  const HamiltonianPoly d = frequency_hamiltonian(omega, 6);
  const HamiltonianPoly h = testing::random_hamiltonian(rng, kModes, 40, 6);
  const HamiltonianPoly lh = poisson_bracket(d, h);
  for (const auto& t : h.terms()) {
    const Complex expected = Complex{0.0, omega.dot(t.key.alpha, t.key.beta)} * t.coeff;
    CHECK(std::abs(lh.coefficient(t.key.alpha, t.key.beta) - expected) <= 1e-12 * std::abs(expected) + 1e-300);
  }
}

TEST_CASE("bracket by hand differentiation") {
  // {|u_1|², u_1 ū_2 u_3 ū_2}: only j = 1 contributes,
  // i(∂_{ū_1}|u_1|² ∂_{u_1}G − ∂_{u_1}|u_1|² ∂_{ū_1}G) = i u_1 ū_2² u_3.
  const HamiltonianPoly f = monomial(MultiIndex{{1, 1}}, MultiIndex{{1, 1}}, 1.0);
  const HamiltonianPoly g = monomial(MultiIndex{{1, 1}, {3, 1}}, MultiIndex{{2, 2}}, 1.0);
  const HamiltonianPoly fg = poisson_bracket(f, g);
  REQUIRE(fg.size() == 1);
  CHECK(fg.coefficient(MultiIndex{{1, 1}, {3, 1}}, MultiIndex{{2, 2}}) == Complex(0.0, 1.0));

  // {u_1 ū_2, u_2 ū_1} = i(ū_2·ū_1·0 ...) computed by hand: i(|u_2|² − |u_1|²)... with our sign:
  // ∂_{ū_2}F ∂_{u_2}G = u_1·ū_1, ∂_{u_1}F ∂_{ū_1}G = ū_2·u_2 → i(|u_1|² − |u_2|²).
  // (Not momentum conserving modes, so use 1 → -1 pairs on mass only via a kernel check instead.)
  const HamiltonianPoly p = monomial(MultiIndex{{3, 1}, {1, 1}}, MultiIndex{{2, 2}}, 2.0);
  const HamiltonianPoly q = monomial(MultiIndex{{2, 2}}, MultiIndex{{3, 1}, {1, 1}}, 1.0);
  const HamiltonianPoly pq = poisson_bracket(p, q);
  // ∂_{ū_2}P ∂_{u_2}Q = 2·2u_1u_3ū_2 · 2u_2 ū_1ū_3 → 8 |u_1|²|u_2|²|u_3|² (times i)
  // ∂_{u_1}P ∂_{ū_1}Q = 2u_3ū_2² · u_2²ū_3 → 2|u_2|⁴|u_3|²; same for j = 3 with |u_1|²
  const MultiIndex k123{{1, 1}, {2, 1}, {3, 1}};
  CHECK(pq.coefficient(k123, k123) == Complex(0.0, 8.0));
  CHECK(pq.coefficient(MultiIndex{{2, 2}, {3, 1}}, MultiIndex{{2, 2}, {3, 1}}) == Complex(0.0, -2.0));
  CHECK(pq.coefficient(MultiIndex{{2, 2}, {1, 1}}, MultiIndex{{2, 2}, {1, 1}}) == Complex(0.0, -2.0));
  CHECK(pq.size() == 3);
}

TEST_CASE("bracket algebra on random Hamiltonians") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    // Degrees 2..4 each; with cap 12 no triple bracket is truncated.
    const HamiltonianPoly f = testing::random_hamiltonian(rng, kModes, 6, 4, kModes.all(), 12);
    const HamiltonianPoly g = testing::random_hamiltonian(rng, kModes, 6, 4, kModes.all(), 12);
    const HamiltonianPoly h = testing::random_hamiltonian(rng, kModes, 6, 4, kModes.all(), 12);

    CHECK(poisson_bracket(f, f).max_abs_coefficient() <= 1e-12 * (1 + f.max_abs_coefficient()));

    const HamiltonianPoly fg = poisson_bracket(f, g);
    const HamiltonianPoly gf = poisson_bracket(g, f);
    CHECK((fg + gf).max_abs_coefficient() <= 1e-12 * std::max(1.0, fg.max_abs_coefficient()));
    CHECK(fg.reality_defect() <= 1e-12 * std::max(1.0, fg.max_abs_coefficient()));
    for (const auto& t : fg.terms()) CHECK(is_admissible_pair(t.key.alpha, t.key.beta));

    const HamiltonianPoly j1 = poisson_bracket(f, poisson_bracket(g, h));
    const HamiltonianPoly j2 = poisson_bracket(g, poisson_bracket(h, f));
    const HamiltonianPoly j3 = poisson_bracket(h, poisson_bracket(f, g));
    const double scale = std::max({j1.max_abs_coefficient(), j2.max_abs_coefficient(), j3.max_abs_coefficient(), 1.0});
    CHECK((j1 + j2 + j3).max_abs_coefficient() <= 1e-10 * scale);
  }
}

TEST_CASE("bracket matches the Leibniz rule on evaluated fields") {
  // {F,G}(u) = i Σ_j (∂_ū F ∂_u G − ∂_u F ∂_ū G); with field_j = −i∂_{ū_j}H and
  // real H, ∂_{u_j}H = conj(∂_{ū_j}H). Hence {F,G} = i Σ (iF_j conj(iG_j) − conj(iF_j) iG_j)
  // where F_j = field_j(F).
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const HamiltonianPoly f = testing::random_hamiltonian(rng, kModes, 8, 4, kModes.all(), 8);
    const HamiltonianPoly g = testing::random_hamiltonian(rng, kModes, 8, 4, kModes.all(), 8);
    const auto u = random_field(rng, kModes.all(), 0.2);
    const Evaluation ef = evaluate_and_field(f, u);
    const Evaluation eg = evaluate_and_field(g, u);
    Complex oracle{};
    for (std::size_t s = 0; s < u.size(); ++s) {
      const Complex dfb = Complex{0, 1} * ef.field[s];  // ∂_ū F
      const Complex dgb = Complex{0, 1} * eg.field[s];
      oracle += Complex{0, 1} * (dfb * std::conj(dgb) - std::conj(dfb) * dgb);
    }
    const Complex val = evaluate(poisson_bracket(f, g), u);
    CHECK(std::abs(val - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("weighted norm") {
  const NormParams np{1.0, 1.0};
  CHECK(weighted_norm(HamiltonianPoly(kModes, 4), np) == 0.0);
  CHECK(weighted_norm(monomial(MultiIndex{{1, 1}, {3, 1}}, MultiIndex{{2, 2}}, 1.0), np) ==
        doctest::Approx(3.0 / 16.0).epsilon(1e-15));

  PolyBuilder pb(kModes, 4);
  std::vector<double> lam{0.3, -2.5, 1.25, 0.0, 0.7};
  const std::vector<Mode> ms{-7, 0, 2, 9, 16};
  for (std::size_t i = 0; i < ms.size(); ++i) pb.add({MultiIndex::unit(ms[i]), MultiIndex::unit(ms[i])}, lam[i]);
  const HamiltonianPoly h = pb.build().with_constant(100.0);
  for (const NormParams q : {NormParams{0.1, 1.1}, NormParams{3.0, 2.5}}) {
    CHECK(weighted_norm(h, q) == doctest::Approx(2.5).epsilon(1e-15));
  }
}

TEST_CASE("norm monotone in r and p") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> ur(0.05, 2.0), up(1.01, 3.0), ud(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const HamiltonianPoly h = testing::random_hamiltonian(rng, kModes, 10, 6);
    const double r = ur(rng), p = up(rng), rho = ud(rng), delta = ud(rng);
    CHECK(weighted_norm(h, {r, p + delta}) <= weighted_norm(h, {r + rho, p}) * (1 + 1e-14));
  }
}

TEST_CASE("lipschitz norm") {
  const FrequencyVector w0 = FrequencyVector::integer_squares(kModes);
  const std::vector<FrequencyVector> samples{w0, w0.with(3, 9.2), w0.with(3, 8.9).with(5, 25.3)};
  const NormParams np{1.0, 1.5};
  const double gamma = 0.01;

  auto constant = [&](const FrequencyVector&) { return monomial(MultiIndex{{2, 1}}, MultiIndex{{2, 1}}, 2.0); };
  CHECK(lipschitz_norm(constant, samples, gamma, np) == doctest::Approx(2.0));

  auto linear = [&](const FrequencyVector& w) { return monomial(MultiIndex{{3, 1}}, MultiIndex{{3, 1}}, w[3]); };
  CHECK(lipschitz_norm(linear, samples, gamma, np) == doctest::Approx(9.2 + gamma));

  auto empty = [&](const FrequencyVector&) { return HamiltonianPoly(kModes, 4); };
  CHECK(lipschitz_norm(empty, samples, gamma, np) == 0.0);

  CHECK_THROWS_AS(lipschitz_norm(empty, std::span(samples).first(1), gamma, np), DegenerateInputError);
}

TEST_CASE("evaluation and field") {
  const HamiltonianPoly h = monomial(MultiIndex{{1, 1}}, MultiIndex{{1, 1}}, 1.0);
  std::vector<Complex> u(kModes.size());
  u[kModes.slot(1)] = 2.0;
  const Evaluation e = evaluate_and_field(h, u);
  CHECK(e.value == Complex(4.0));
  CHECK(e.field[kModes.slot(1)] == Complex(0.0, -2.0));

  const HamiltonianPoly nls = build_nls({{1.0}, 1.0}, kZeroV, kModes, 4);
  const Evaluation z = evaluate_and_field(nls, std::vector<Complex>(kModes.size()));
  CHECK(z.value == Complex{});
  for (const auto& f : z.field) CHECK(f == Complex{});

  // Field against central differences of the real function H(u):
  // ∂H/∂ū_j = (∂_x + i∂_y)H / 2 for u_j = x + iy.
  std::mt19937_64 rng(4);
  const auto v = random_field(rng, {1, 2, 3, -2}, 0.3);
  const Evaluation ev = evaluate_and_field(nls, v);
  for (Mode j : {1, 2, 3, -2}) {
    const double hstep = 1e-6;
    auto at = [&](Complex d) {
      auto w = v;
      w[kModes.slot(j)] += d;
      return evaluate(nls, w).real();
    };
    const double dx = (at(hstep) - at(-hstep)) / (2 * hstep);
    const double dy = (at(Complex{0, hstep}) - at(Complex{0, -hstep})) / (2 * hstep);
    const Complex dubar = 0.5 * Complex{dx, dy};
    CHECK(std::abs(ev.field[kModes.slot(j)] - Complex{0, -1} * dubar) < 1e-6);
  }
}

TEST_CASE("majorant and smallness") {
  CHECK(f_majorant({{1.0}, 1.0}) == 1.0);
  CHECK(f_majorant({{1.0, -1.0}, 0.5}) == doctest::Approx(0.75));
  CHECK(f_majorant({{}, 1.0}) == 0.0);
  CHECK(smallness_parameter({{1.0}, 2.0}, 0.01, 0.1) == doctest::Approx(2.0 / (0.01 * 2.0) * 0.01));
}
