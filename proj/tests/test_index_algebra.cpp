#include <random>

#include "doctest.h"
#include "kamlab/error.hpp"
#include "kamlab/index_algebra.hpp"

using namespace kamlab;

TEST_CASE("mode set split") {
  const ModeSet m;
  CHECK(m.h_max() == 4);
  CHECK(m.cutoff() == 16);
  CHECK(m.tangential() == std::vector<Mode>{1, 2, 4, 8, 16});
  CHECK(m.normal().size() == 33 - 5);
  for (Mode j : m.normal()) CHECK_FALSE(m.is_tangential(j));
  CHECK(m.is_normal(0));
  CHECK(m.is_normal(-1));
  CHECK_THROWS_AS(ModeSet(5, 16), DomainError);
  CHECK_THROWS_AS(ModeSet(5, 40), DomainError);
}

TEST_CASE("multi-index basics") {
  const MultiIndex a{{3, 2}, {-1, 1}};
  CHECK(a.total() == 3);
  CHECK(a.exponent(3) == 2);
  CHECK(a.exponent(-1) == 1);
  CHECK(a.exponent(0) == 0);
  CHECK(a.entries() == std::vector<std::pair<Mode, int>>{{-1, 1}, {3, 2}});
  CHECK(a.remove(3) == MultiIndex{{3, 1}, {-1, 1}});
  CHECK(a.add(0) == MultiIndex{{3, 2}, {-1, 1}, {0, 1}});
  CHECK(MultiIndex{{1, 1}}.precedes(a) == false);
  CHECK(MultiIndex{{3, 1}}.precedes(a));
  CHECK(MultiIndex::common(a, MultiIndex{{3, 1}, {5, 1}}) == MultiIndex{{3, 1}});
  CHECK_THROWS_AS(a.remove(3, 3), DomainError);
  CHECK_THROWS_AS(MultiIndex::unit(32), DomainError);
  CHECK_THROWS_AS(MultiIndex::unit(1, 11), DomainError);
  // structural equality regardless of construction order
  CHECK(MultiIndex{{3, 1}, {1, 1}} == MultiIndex{{1, 1}, {3, 1}});
}

TEST_CASE("mass") {
  CHECK(mass(SignedIndexVector{}) == 0);
  CHECK(mass(SignedIndexVector{{1, 2}, {4, 1}, {2, -3}}) == 0);
  CHECK(mass(SignedIndexVector{{3, 1}, {5, 1}, {4, -2}}) == 0);
}

TEST_CASE("momentum") {
  CHECK(momentum(SignedIndexVector{{7, 1}, {7, -1}}) == 0);
  CHECK(SignedIndexVector{{7, 1}, {7, -1}}.is_zero());
  CHECK(momentum(SignedIndexVector{{1, 2}, {4, 1}, {2, -3}}) == 0);
  CHECK(momentum(SignedIndexVector{{1, 1}, {2, -1}}) == -1);
}

TEST_CASE("quadratic moment") {
  CHECK(quad_moment(SignedIndexVector{{3, 1}, {5, 1}, {4, -2}}) == 2);
  CHECK(quad_moment(SignedIndexVector{{1, 2}, {4, 1}, {2, -3}}) == 6);
  CHECK(quad_moment(SignedIndexVector{}) == 0);
}

TEST_CASE("admissible pairs") {
  CHECK(is_admissible_pair(MultiIndex{{1, 1}, {3, 1}}, MultiIndex{{2, 2}}));
  CHECK_FALSE(is_admissible_pair(MultiIndex{{1, 1}}, MultiIndex{{2, 1}}));
  const MultiIndex a{{-4, 1}, {9, 3}};
  CHECK(is_admissible_pair(a, a));
  CHECK_FALSE(is_admissible_pair(MultiIndex{{1, 2}}, MultiIndex{{2, 1}}));
}

TEST_CASE("functionals are linear on random sparse vectors") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> mode(-16, 16), val(-3, 3), len(0, 6);
  auto random_vec = [&] {
    std::vector<std::pair<Mode, int>> e;
    for (int n = len(rng), i = 0; i < n; ++i) e.emplace_back(mode(rng), val(rng));
    return SignedIndexVector(e);
  };
  for (int t = 0; t < 500; ++t) {
    const auto x = random_vec();
    const auto y = random_vec();
    CHECK(mass(x + y) == mass(x) + mass(y));
    CHECK(momentum(x + y) == momentum(x) + momentum(y));
    CHECK(quad_moment(x + y) == quad_moment(x) + quad_moment(y));
    CHECK(momentum(x - y) == momentum(x) - momentum(y));
  }
}

TEST_CASE("positive and negative parts") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> mode(-16, 16), val(-3, 3), len(0, 3);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::pair<Mode, int>> e;
    for (int n = len(rng), i = 0; i < n; ++i) e.emplace_back(mode(rng), val(rng));
    const SignedIndexVector l(e);
    const MultiIndex p = l.positive_part();
    const MultiIndex q = l.negative_part();
    CHECK(MultiIndex::common(p, q).empty());
    CHECK(l.l1() == p.total() + q.total());
    CHECK(SignedIndexVector::difference(p, q) == l);
  }
}
