#include "doctest.h"

#include <cmath>
#include <set>

#include "cpc/combinatorics.hpp"
#include "oracles.hpp"

using namespace cpc;

TEST_CASE("composition parsing and validation") {
  const auto c = Composition::parse("3,2,2");
  CHECK(c.parts() == std::vector<int>{3, 2, 2});
  CHECK(c.size() == 3);
  CHECK(c.dimension() == 7);
  CHECK(c.to_string() == "3,2,2");
  CHECK(Composition::parse(" 4 ").parts() == std::vector<int>{4});
  CHECK_THROWS_AS(Composition::parse("3,0,2"), std::invalid_argument);
  CHECK_THROWS_AS(Composition::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Composition::parse("3,x"), std::invalid_argument);
  CHECK_THROWS_AS(Composition(std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(Composition({2, -1}), std::invalid_argument);
}

TEST_CASE("index groups partition 0..n-1 in order") {
  const auto g = index_groups(Composition{3, 1, 2});
  REQUIRE(g.size() == 3);
  CHECK(g[0].first == 0);
  CHECK(g[0].last == 3);
  CHECK(g[1].first == 3);
  CHECK(g[1].last == 4);
  CHECK(g[2].first == 4);
  CHECK(g[2].last == 6);
}

TEST_CASE("multinomial sizes") {
  CHECK(multinomial_size(Composition{3, 2, 2}) == 210);
  CHECK(multinomial_size(Composition{4, 1, 1, 1}) == 210);
  CHECK(multinomial_size(Composition{7}) == 1);
  CHECK(multinomial_size(Composition{1, 1, 1, 1, 1, 1, 1}) == 5040);
  // 40!/(20!20!)
  CHECK(multinomial_size(Composition{20, 20}).str() == "137846528820");
  CHECK(log2_exact(BigInt(210)) == doctest::Approx(std::log2(210.0)).epsilon(1e-15));
  BigInt big = BigInt(1) << 300;
  CHECK(log2_exact(big) == doctest::Approx(300.0).epsilon(1e-15));
}

TEST_CASE("multinomial sizes agree with the factorial formula on random compositions") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const auto c = oracle::random_composition(rng, n);
    CHECK(multinomial_size(c) == oracle::multinomial_by_factorials(c.parts()));
  }
}

TEST_CASE("variant II sizes include the sign factor") {
  const Composition c{3, 2, 2};
  CHECK(variant2_size(c, 7) == 210 * 128);
  CHECK(variant2_size(c, 5) == 210 * 32);
  CHECK_THROWS_AS(variant2_size(c, 6), std::invalid_argument);
}

TEST_CASE("composition enumeration") {
  for (int n = 1; n <= 12; ++n) {
    std::set<std::vector<int>> seen;
    for_each_composition(n, CompositionFilter::none, [&](const Composition& c) {
      CHECK(c.dimension() == n);
      seen.insert(c.parts());
    });
    CHECK(seen.size() == (std::size_t{1} << (n - 1)));
  }
  std::vector<std::vector<int>> mono;
  for (const auto& c : enumerate_compositions(4, CompositionFilter::variant2_monotone)) mono.push_back(c.parts());
  std::set<std::vector<int>> got(mono.begin(), mono.end());
  std::set<std::vector<int>> want{{4}, {1, 3}, {2, 2}, {1, 1, 2}, {1, 1, 1, 1}};
  CHECK(mono.size() == 5);
  CHECK(got == want);
  for (auto f : {CompositionFilter::none, CompositionFilter::variant2_monotone, CompositionFilter::variant1_unimodal})
    CHECK(enumerate_compositions(1, f).size() == 1);
}

TEST_CASE("filtered enumeration equals brute-force filtering") {
  for (int n = 1; n <= 11; ++n) {
    for (auto f : {CompositionFilter::variant2_monotone, CompositionFilter::variant1_unimodal}) {
      std::set<std::vector<int>> direct, filtered;
      for (const auto& c : enumerate_compositions(n, f)) direct.insert(c.parts());
      for (const auto& c : enumerate_compositions(n, CompositionFilter::none))
        if (passes_filter(c.parts(), f)) filtered.insert(c.parts());
      CHECK(direct == filtered);
    }
  }
  CHECK(passes_filter({1, 3, 2}, CompositionFilter::variant1_unimodal));
  CHECK_FALSE(passes_filter({3, 1, 2}, CompositionFilter::variant1_unimodal));
  CHECK(parse_filter("variant2_monotone") == CompositionFilter::variant2_monotone);
  CHECK_THROWS(parse_filter("bogus"));
}

TEST_CASE("partitions and distinct multinomials") {
  int count = 0;
  for_each_partition(10, [&](const std::vector<int>& p) {
    CHECK(std::is_sorted(p.rbegin(), p.rend()));
    ++count;
  });
  CHECK(count == 42);
  const auto m4 = distinct_multinomials(4);
  CHECK(m4 == std::vector<BigInt>{1, 4, 6, 12, 24});
  // n = 7 has 15 partitions but 14 distinct sizes because (3,2,2) and (4,1,1,1) collide.
  CHECK(distinct_multinomials(7).size() == 14);
}

TEST_CASE("rate point census") {
  CHECK(rate_point_census(2, 1).count() == 2);
  CHECK(rate_point_census(6, 3).count() == 207);
  CHECK(rate_point_census(4, 2).count() == 15);
  for (int n = 2; n <= 6; ++n)
    for (int J = 1; J <= 3; ++J)
      CHECK(rate_point_census(n, J).count() == oracle::distinct_sums_naive(distinct_multinomials(n), J));
  CHECK(rate_point_census(7, 3, 200'000'000, 1).distinct_sums == rate_point_census(7, 3, 200'000'000, 3).distinct_sums);
  CHECK(multiset_count(5, 2) == 15);
  CHECK_THROWS_AS(rate_point_census(9, 4, 100), ResourceLimitError);
}

TEST_CASE("maximum rate gap") {
  CHECK(max_rate_gap(7) == doctest::Approx(std::log2(7.0) / 7.0));
  for (int n = 3; n < 50; ++n) CHECK(max_rate_gap(n + 1) < max_rate_gap(n));
}
