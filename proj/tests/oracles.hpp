#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "cpc/codec.hpp"
#include "cpc/combinatorics.hpp"

namespace cpc::oracle {

using Rng = std::mt19937_64;

/// Uniform random composition of n: each of the n-1 cut points is kept with probability 1/2.
inline Composition random_composition(Rng& rng, int n) {
  std::vector<int> parts{1};
  for (int i = 1; i < n; ++i) {
    if (rng() & 1U)
      parts.push_back(1);
    else
      ++parts.back();
  }
  return Composition(parts);
}

/// Strictly decreasing random levels; nonnegative for Variant II (possibly with a zero last level).
inline Eigen::VectorXd random_levels(Rng& rng, std::size_t K, Variant variant, bool allow_zero = true) {
  std::uniform_real_distribution<double> step(0.05, 1.0);
  Eigen::VectorXd mu(static_cast<Eigen::Index>(K));
  double v = variant == Variant::II ? 0.0 : -0.5 * static_cast<double>(K) * 0.5;
  const bool zero_last = variant == Variant::II && allow_zero && (rng() % 4 == 0);
  for (Eigen::Index i = static_cast<Eigen::Index>(K) - 1; i >= 0; --i) {
    if (!(zero_last && i == static_cast<Eigen::Index>(K) - 1)) v += step(rng);
    mu(i) = v;
  }
  return mu;
}

/// Every codeword of a permutation code, generated from std::next_permutation over the
/// value multiset and an explicit loop over sign patterns. Order is unspecified.
inline std::vector<Eigen::VectorXd> all_codewords(const InitialCodeword& cw) {
  const Eigen::VectorXd base = cw.expanded();
  std::vector<double> v(base.data(), base.data() + base.size());
  std::sort(v.begin(), v.end());
  std::vector<Eigen::VectorXd> out;
  do {
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    if (cw.variant() == Variant::I) {
      out.push_back(w);
      continue;
    }
    std::vector<Eigen::Index> nonzero;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w(i) != 0.0) nonzero.push_back(i);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nonzero.size()); ++mask) {
      Eigen::VectorXd s = w;
      for (std::size_t b = 0; b < nonzero.size(); ++b)
        if (mask >> b & 1U) s(nonzero[b]) = -s(nonzero[b]);
      out.push_back(s);
    }
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

struct Nearest {
  std::size_t sphere = 0;
  double distance = std::numeric_limits<double>::infinity();
};

/// Exhaustive search over enumerated subcodebooks. Distances are summed in coordinate
/// order; the first sphere reaching the minimum wins.
inline Nearest brute_force_nearest(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const std::vector<std::vector<Eigen::VectorXd>>& books) {
  Nearest best;
  for (std::size_t j = 0; j < books.size(); ++j) {
    double sphere_best = std::numeric_limits<double>::infinity();
    for (const auto& w : books[j]) {
      double d = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) d += (x(i) - w(i)) * (x(i) - w(i));
      sphere_best = std::min(sphere_best, d);
    }
    if (sphere_best < best.distance) best = {j, sphere_best};
  }
  return best;
}

/// J nonnegative, strictly decreasing level sets whose gaps mu_m - mu_{m+1} all lie
/// within a factor `min_ratio` of each other, so min gap / max gap >= min_ratio.
inline std::vector<Eigen::VectorXd> gap_constrained_levels(Rng& rng, int J, std::size_t K, std::size_t m,
                                                           double min_ratio) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double base_gap = 0.3 + u(rng);
  std::vector<Eigen::VectorXd> out;
  for (int j = 0; j < J; ++j) {
    const double gap = base_gap * (min_ratio + (1.0 - min_ratio) * u(rng));
    Eigen::VectorXd mu(static_cast<Eigen::Index>(K));
    double v = 0.05 + 0.5 * u(rng) + 0.4 * j;
    for (Eigen::Index i = static_cast<Eigen::Index>(K) - 1; i >= 0; --i) {
      mu(i) = v;
      v += (static_cast<std::size_t>(i) == m + 1) ? gap : 0.1 + u(rng);
    }
    out.push_back(mu);
  }
  return out;
}

inline BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Multinomial coefficient as n! / prod n_i!.
inline BigInt multinomial_by_factorials(const std::vector<int>& parts) {
  int n = 0;
  BigInt denom = 1;
  for (int p : parts) {
    n += p;
    denom *= factorial(p);
  }
  return factorial(n) / denom;
}

/// Distinct sums of J values drawn with replacement, by direct nested expansion.
inline std::size_t distinct_sums_naive(const std::vector<BigInt>& values, int J) {
  std::set<BigInt> sums{BigInt(0)};
  for (int k = 0; k < J; ++k) {
    std::set<BigInt> next;
    for (const auto& s : sums)
      for (const auto& v : values) next.insert(s + v);
    sums = std::move(next);
  }
  return sums.size();
}

/// Published counts of distinct fixed-rate CPC rate points, n = 2..9 by J = 1..4.
inline constexpr int kRatePointTable[8][4] = {
    {2, 3, 4, 5},       {3, 6, 10, 15},     {5, 15, 33, 56},       {7, 27, 68, 132},
    {11, 60, 207, 517}, {14, 97, 415, 1202}, {20, 186, 1038, 3888}, {27, 335, 2440, 11911},
};

}  // namespace cpc::oracle
