#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "kamlab/error.hpp"
#include "kamlab/small_divisors.hpp"

using namespace kamlab;

namespace {

const ModeSet kModes;

// Independent oracle: every ℓ over the window with |ℓ| ≤ l_max satisfying the
// constraints, found by walking all integer vectors.
std::set<SignedIndexVector> brute_force(const ModeSet& modes, int l_max, int max_normal, QuadFilter f) {
  std::set<SignedIndexVector> out;
  const auto all = modes.all();
  std::vector<int> v(all.size(), 0);
  auto rec = [&](auto&& self, std::size_t i, int budget) -> void {
    if (i == all.size()) {
      std::vector<std::pair<Mode, int>> e;
      int normal = 0;
      for (std::size_t s = 0; s < all.size(); ++s) {
        if (v[s] == 0) continue;
        e.emplace_back(all[s], v[s]);
        if (!modes.is_tangential(all[s])) normal += std::abs(v[s]);
      }
      const SignedIndexVector l(e);
      if (l.is_zero() || normal > max_normal || mass(l) != 0 || momentum(l) != 0) return;
      const long d = std::abs(quad_moment(l));
      if (f == QuadFilter::Strict && d >= l.l1()) return;
      if (f == QuadFilter::Relaxed && d > 2 * l.l1()) return;
      out.insert(l);
      return;
    }
    for (int x = -budget; x <= budget; ++x) {
      v[i] = x;
      self(self, i + 1, budget - std::abs(x));
    }
    v[i] = 0;
  };
  rec(rec, 0, l_max);
  return out;
}

FrequencyVector random_omega(std::mt19937_64& rng, const ModeSet& modes) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> w;
  for (Mode j : modes.all()) w.push_back(double(j) * j + 0.98 * u(rng));
  return FrequencyVector(modes, w);
}

}  // namespace

TEST_CASE("dioph weight") {
  const DiophParams p{0.01, 2.0};
  CHECK(dioph_weight(SignedIndexVector{{3, 1}, {5, 1}, {4, -2}}, kModes, p) == doctest::Approx(0.01 / 289.0));
  CHECK(dioph_weight(SignedIndexVector{{3, 1}, {5, 1}, {-3, -1}, {11, -1}}, kModes, p) == 0.01);
  CHECK_THROWS_AS(dioph_weight(SignedIndexVector{{3, 1}, {3, -1}}, kModes, p), DomainError);
  // ⟨log₂ 1⟩ = 1 under the max convention, √2 under the sqrt one
  CHECK(dioph_weight(SignedIndexVector{{1, 1}}, kModes, p) == doctest::Approx(0.01 / 4.0));
  CHECK(dioph_weight(SignedIndexVector{{2, 1}}, kModes, p) == doctest::Approx(0.01 / 4.0));
  const DiophParams ps{0.01, 2.0, BracketConvention::Sqrt};
  CHECK(dioph_weight(SignedIndexVector{{1, 1}}, kModes, ps) == doctest::Approx(0.01 / 4.0));
  CHECK(dioph_weight(SignedIndexVector{{2, 1}}, kModes, ps) == doctest::Approx(0.01 / 9.0));
  CHECK_THROWS_AS((DiophParams{0.6, 2.0}).validate(), DomainError);
  CHECK_THROWS_AS((DiophParams{0.01, 1.0}).validate(), DomainError);
}

TEST_CASE("weights never exceed gamma") {
  const DiophParams p{0.05, 2.5};
  for (const auto& r : enumerate_resonant_indices(kModes, {8, 2, QuadFilter::Strict})) {
    const double w = dioph_weight(r.l, kModes, p);
    bool has_tangential = false;
    for (const auto& [j, v] : r.l.entries()) has_tangential = has_tangential || kModes.is_tangential(j);
    CHECK(w <= p.gamma);
    CHECK((w == p.gamma) == !has_tangential);
  }
}

TEST_CASE("enumeration examples") {
  CHECK(enumerate_resonant_indices(kModes, {2, 2, QuadFilter::None}).empty());
  CHECK(enumerate_resonant_indices(kModes, {4, 0, QuadFilter::None}).empty());
  const auto full = enumerate_resonant_indices(kModes, {4, 2, QuadFilter::Strict});
  const SignedIndexVector target{{3, 1}, {5, 1}, {4, -2}};
  CHECK(std::any_of(full.begin(), full.end(), [&](const Resonance& r) { return r.l == target; }));
}

TEST_CASE("enumeration matches brute force on a small window") {
  const ModeSet small(2, 6);
  for (QuadFilter f : {QuadFilter::None, QuadFilter::Strict, QuadFilter::Relaxed}) {
    for (int nmax : {0, 1, 2}) {
      EnumerationStats st;
      const auto res = enumerate_resonant_indices(small, {6, nmax, f}, &st);
      const auto oracle = brute_force(small, 6, nmax, f);
      std::set<SignedIndexVector> got;
      for (const auto& r : res) {
        CHECK(r.recombined() == r.l);
        got.insert(r.l);
      }
      CHECK(got.size() == res.size());  // each ℓ exactly once
      CHECK(got == oracle);
      CHECK(st.parity_ok);
    }
  }
}

TEST_CASE("resonance combinatorics at default budget") {
  EnumerationStats st;
  const auto res = enumerate_resonant_indices(kModes, {8, 2, QuadFilter::Strict}, &st);
  CHECK(st.count == res.size());
  CHECK(st.parity_ok);
  CHECK(st.completion_violations == 0);
  CHECK(st.worst_completion_ratio <= 1.0);
  for (const auto& r : res) {
    CHECK(r.l.l1() % 2 == 0);
    CHECK(r.l.l1() >= 4);
    CHECK(std::abs(quad_moment(r.l)) < r.l.l1());
  }
}

TEST_CASE("verify_dc") {
  const FrequencyVector sq = FrequencyVector::integer_squares(kModes);
  const DiophParams p{0.01, 2.0};
  // For ω_j = j² every divisor is the integer 𝚍(ℓ).
  const auto res = enumerate_resonant_indices(kModes, {4, 2, QuadFilter::None});
  for (const auto& r : res) {
    if (r.l == SignedIndexVector{{3, 1}, {5, 1}, {4, -2}}) {
      CHECK(std::abs(sq.dot(r.l)) == 2.0);
      CHECK(std::abs(sq.dot(r.l)) >= dioph_weight(r.l, kModes, p));
    }
  }
  const DcReport rep = verify_dc(sq, p, res);
  CHECK(rep.prefiltered + rep.checked == res.size());
  CHECK(rep.prefiltered > 0);
  // The ℓ with 𝚍(ℓ) = |ℓ| = 6 is prefiltered
  const SignedIndexVector pre{{1, 2}, {4, 1}, {2, -3}};
  CHECK(std::abs(quad_moment(pre)) >= pre.l1());
  CHECK(verify_dc(sq, p, std::span<const Resonance>{}).ok);

  std::vector<double> bad(kModes.size(), 0.0);
  for (Mode j : kModes.all()) bad[kModes.slot(j)] = double(j) * j;
  bad[kModes.slot(3)] = 9.6;
  CHECK_THROWS_AS(verify_dc(FrequencyVector(kModes, bad), p, res), DomainError);
}

TEST_CASE("prefilter is sound inside the box") {
  std::mt19937_64 rng(41);
  const auto res = enumerate_resonant_indices(kModes, {8, 2, QuadFilter::None});
  for (int t = 0; t < 5; ++t) {
    const FrequencyVector w = random_omega(rng, kModes);
    for (const auto& r : res) {
      if (std::abs(quad_moment(r.l)) >= r.l.l1()) CHECK(std::abs(w.dot(r.l)) >= 0.5 * r.l.l1() - 1e-9);
    }
  }
}

TEST_CASE("k0 supremum") {
  std::mt19937_64 rng(43);
  const DiophParams p{0.01, 2.0};
  FrequencyVector w = random_omega(rng, kModes);
  while (!verify_dc(w, p, ResonanceBudget{8, 2, QuadFilter::None}).ok) w = random_omega(rng, kModes);

  SUBCASE("witness recomputes") {
    const K0Audit a = k0_supremum(0.5, p, {8, 2, QuadFilter::Relaxed}, w);
    REQUIRE_FALSE(a.empty);
    CHECK(k0_value(a.witness.alpha, a.witness.beta, a.witness.q, 0.5, w, p.gamma) ==
          doctest::Approx(a.measured_sup).epsilon(1e-14));
    CHECK(a.witness.alpha != a.witness.beta);
  }
  SUBCASE("tangential-only witness") {
    const MultiIndex alpha{{1, 2}, {4, 1}};
    const MultiIndex beta{{2, 3}};
    const double v = k0_value(alpha, beta, 4, 0.99, w, p.gamma);
    const double expected = std::pow(16.0 / (2 * 2 * 4 * 8), 0.99) * p.gamma / std::abs(w.dot(alpha, beta));
    CHECK(v == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("monotone in delta") {
    const ResonanceBudget b{8, 2, QuadFilter::Relaxed};
    const double k25 = k0_supremum(0.25, p, b, w).measured_sup;
    const double k50 = k0_supremum(0.5, p, b, w).measured_sup;
    CHECK(k50 <= k25);
  }
  SUBCASE("common parts never raise the supremum") {
    const ResonanceBudget b{8, 2, QuadFilter::Relaxed};
    CHECK(k0_supremum(0.3, p, b, w, 1).measured_sup == k0_supremum(0.3, p, b, w, 0).measured_sup);
  }
  SUBCASE("empty budget") {
    const K0Audit a = k0_supremum(0.5, p, {2, 2, QuadFilter::Relaxed}, w);
    CHECK(a.empty);
    CHECK(a.candidates == 0);
  }
}

TEST_CASE("k0 curve fit dominates") {
  std::vector<K0Audit> audits(3);
  audits[0].delta = 0.1, audits[0].measured_sup = std::exp(400.0), audits[0].empty = false;
  audits[1].delta = 0.4, audits[1].measured_sup = 8.0, audits[1].empty = false;
  audits[2].delta = 0.8, audits[2].measured_sup = 0.5, audits[2].empty = false;
  const K0Curve c = fit_k0_curve(audits);
  for (std::size_t i = 0; i < audits.size(); ++i) CHECK(std::log(audits[i].measured_sup) <= c.log_bound[i] + 1e-12);
  // minimality: a slightly smaller c fails somewhere
  const double c2 = c.c * (1 - 1e-6);
  bool fails = false;
  for (const auto& a : audits) fails = fails || std::log(a.measured_sup) > std::log(c2) + c2 * k0_bound_exponent(a.delta);
  CHECK(fails);
}

TEST_CASE("box sum probability against sampling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> a{1.0, 2.0, 4.0};
  for (auto [lo, hi] : {std::pair{0.5, 1.5}, std::pair{3.2, 3.6}, std::pair{-1.0, 8.0}, std::pair{6.9, 7.1}}) {
    std::size_t hit = 0;
    const std::size_t n = 400000;
    for (std::size_t t = 0; t < n; ++t) {
      const double s = a[0] * u(rng) + a[1] * u(rng) + a[2] * u(rng);
      hit += s >= lo && s <= hi;
    }
    const double p = box_sum_probability(a, lo, hi);
    const double se = std::sqrt(std::max(p * (1 - p), 1e-6) / n);
    CHECK(std::abs(p - double(hit) / n) <= 5 * se);
  }
  const std::vector<double> one{1.0};
  CHECK(box_sum_probability(one, 0.25, 0.5) == doctest::Approx(0.25));
  CHECK(box_sum_probability(a, -1.0, 8.0) == doctest::Approx(1.0));
  // thin slab: probability ≈ width × density; density of a·y at 3.5 (the centre) is 1/4
  CHECK(box_sum_probability(a, 3.5 - 1e-7, 3.5 + 1e-7) == doctest::Approx(2e-7 / 4.0).epsilon(1e-6));
}

TEST_CASE("measure estimate") {
  std::vector<double> wv(kModes.size(), 0.0);
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for (Mode j : kModes.normal()) wv[kModes.slot(j)] = u(rng);
  const auto map = NormalFrequencyMap::shifted_squares(kModes, wv);
  const ResonanceBudget b{8, 2, QuadFilter::Strict};

  CHECK_THROWS_AS(measure_estimate(kModes, {0.01, 2.0}, b, 0, 1, map), DomainError);

  const MeasureReport r1 = measure_estimate(kModes, {0.1, 2.0}, b, 3000, 7, map, 1);
  const MeasureReport r4 = measure_estimate(kModes, {0.1, 2.0}, b, 3000, 7, map, 3);
  CHECK(r1.excluded == r4.excluded);
  REQUIRE(r1.importance);
  REQUIRE(r4.importance);
  CHECK(r1.importance->fraction == r4.importance->fraction);
  CHECK(r1.ci_low <= r1.excluded_fraction);
  CHECK(r1.excluded_fraction <= r1.ci_high);
  CHECK(r1.analytic_bound > 0.0);
  CHECK(std::isfinite(r1.analytic_bound));
  // union ≤ sum of slabs
  CHECK(r1.importance->fraction <= r1.importance->slab_volume_sum * (1 + 1e-12));
  CHECK(r1.importance->fraction > 0.0);

  // Naive and importance estimates agree when the naive one has enough events:
  // a large γ makes the slabs wide enough to hit.
  const MeasureReport big = measure_estimate(kModes, {0.5, 1.5}, b, 20000, 3, map, 1);
  REQUIRE(big.importance);
  const double se = std::sqrt(big.excluded_fraction * (1 - big.excluded_fraction) / 20000.0);
  CHECK(big.excluded > 10);
  CHECK(std::abs(big.excluded_fraction - big.importance->fraction) <= 4 * (se + big.importance->std_error));

  // The ν-dependent interface gives the same naive counts and no importance estimate.
  NormalFrequencyMap slow = map;
  slow.depends_on_nu = true;
  const MeasureReport rs = measure_estimate(kModes, {0.1, 2.0}, b, 1000, 7, slow, 1);
  const MeasureReport rf = measure_estimate(kModes, {0.1, 2.0}, b, 1000, 7, map, 1);
  CHECK(rs.excluded == rf.excluded);
  CHECK_FALSE(rs.importance);

  const MeasureReport half = measure_estimate(kModes, {0.05, 2.0}, b, 3000, 7, map, 1);
  CHECK(half.importance->slab_volume_sum < r1.importance->slab_volume_sum);

  const MeasureReport none = measure_estimate(kModes, {0.1, 2.0}, {2, 2, QuadFilter::Strict}, 100, 7, map, 1);
  CHECK(none.excluded == 0);
  CHECK(none.n_resonances == 0);
  CHECK(none.importance->fraction == 0.0);
}

TEST_CASE("wilson interval") {
  const auto [lo, hi] = wilson_interval(0, 100);
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx(0.037).epsilon(0.02));
  const auto [lo2, hi2] = wilson_interval(50, 100);
  CHECK(lo2 == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(hi2 == doctest::Approx(0.5962).epsilon(1e-3));
}

TEST_CASE("auxiliary inequalities") {
  // N = 1: x/x^{1/2} = √x ≤ √x + 4/√x
  for (double x : {2.0, 5.0, 1e6}) {
    const double v[] = {x};
    CHECK(sum_over_product(v, 0.5) <= std::sqrt(x) + 4.0 / std::sqrt(x));
  }
  const double delta = std::exp(-4.0);
  const double y = 4.0 * std::exp(4.0) * 4.0;
  CHECK(-delta * y + std::log1p(y * y) <= 0.0);

  const AuxReport rep = aux_lemma_validators(20000, 99);
  CHECK(rep.trials == 20000);
  CHECK(rep.log_growth_violations == 0);
  CHECK(rep.sum_product_half_violations == 0);
  CHECK(rep.ok_at_half());

  // For small a the sum-product inequality fails: N = 2, x₁ = x₂ = 1000, a = 0.01.
  const double x[] = {1000.0, 1000.0};
  const double a = 0.01;
  CHECK(sum_over_product(x, a) > std::pow(1000.0, 1 - a) + 2.0 / (a * std::pow(1000.0, a)));
  if (rep.sum_product_violations > 0) {
    REQUIRE(rep.first_counterexample.size() >= 2);
    const double ca = rep.first_counterexample[0];
    const std::span<const double> cx(rep.first_counterexample.data() + 1, rep.first_counterexample.size() - 1);
    CHECK(sum_over_product(cx, ca) > std::pow(cx[0], 1 - ca) + 2.0 / (ca * std::pow(cx[0], ca)));
  }
}
