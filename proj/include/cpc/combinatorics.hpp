#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cpc {

using BigInt = boost::multiprecision::cpp_int;

/// log2 of a positive exact integer.
double log2_exact(const BigInt& value);

/// Ordered composition (n_1, ..., n_K) of the dimension n. Every part is >= 1.
class Composition {
 public:
  Composition() = default;
  explicit Composition(std::vector<int> parts);
  Composition(std::initializer_list<int> parts) : Composition(std::vector<int>(parts)) {}

  /// Parses "3,2,2".
  static Composition parse(std::string_view text);

  const std::vector<int>& parts() const { return parts_; }
  int part(std::size_t i) const { return parts_[i]; }
  std::size_t size() const { return parts_.size(); }  // K
  int dimension() const { return n_; }                 // n
  bool empty() const { return parts_.empty(); }

  std::string to_string() const;

  friend bool operator==(const Composition&, const Composition&) = default;
  friend auto operator<=>(const Composition& a, const Composition& b) { return a.parts_ <=> b.parts_; }

 private:
  std::vector<int> parts_;
  int n_ = 0;
};

/// Half-open 0-based index range [first, last) of one level group.
struct IndexRange {
  int first;
  int last;
  int size() const { return last - first; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Consecutive level groups I_1..I_K of a composition.
std::vector<IndexRange> index_groups(const Composition& c);

/// n! / (n_1! ... n_K!), exact.
BigInt multinomial_size(const Composition& c);

/// 2^h n! / (n_1! ... n_K!). Signs attach to whole level groups, so h is either
/// n (all levels positive) or n - n_K (last level zero).
BigInt variant2_size(const Composition& c, int positive_count);

enum class CompositionFilter {
  none,
  variant2_monotone,  // n_1 <= n_2 <= ... <= n_K
  variant1_unimodal,  // nondecreasing on 1..floor(K/2), nonincreasing on floor(K/2)+1..K
};

CompositionFilter parse_filter(std::string_view name);
std::string_view to_string(CompositionFilter filter);

bool passes_filter(const std::vector<int>& parts, CompositionFilter filter);

/// Visits every ordered composition of n that passes the filter, each exactly once.
/// Compositions are generated from the 2^(n-1) cut-point masks.
template <typename Visitor>
void for_each_composition(int n, CompositionFilter filter, Visitor&& visit) {
  if (n < 1) throw std::invalid_argument("composition dimension must be >= 1");
  if (n > 40) throw std::invalid_argument("composition enumeration limited to n <= 40");
  const std::uint64_t masks = std::uint64_t{1} << (n - 1);
  std::vector<int> parts;
  parts.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    parts.clear();
    int run = 1;
    for (int cut = 0; cut < n - 1; ++cut) {
      if (mask & (std::uint64_t{1} << cut)) {
        parts.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    parts.push_back(run);
    if (passes_filter(parts, filter)) visit(Composition(parts));
  }
}

std::vector<Composition> enumerate_compositions(int n, CompositionFilter filter = CompositionFilter::none);

/// Visits the integer partitions of n as nonincreasing part lists.
template <typename Visitor>
void for_each_partition(int n, Visitor&& visit) {
  if (n < 1) throw std::invalid_argument("partition dimension must be >= 1");
  std::vector<int> parts;
  auto recurse = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      visit(static_cast<const std::vector<int>&>(parts));
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      parts.push_back(p);
      self(self, remaining - p, p);
      parts.pop_back();
    }
  };
  recurse(recurse, n, n);
}

/// Sorted distinct multinomial coefficients over all partitions of n.
std::vector<BigInt> distinct_multinomials(int n);

struct RatePointCensus {
  int n = 0;
  int J = 0;
  std::vector<BigInt> distinct_sums;  // sorted
  std::size_t count() const { return distinct_sums.size(); }
};

class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of size-J multisets drawn from `distinct` values: C(distinct + J - 1, J).
BigInt multiset_count(std::size_t distinct, int J);

/// Distinct sums of J multinomials drawn with replacement from distinct_multinomials(n).
/// Throws ResourceLimitError when the multiset count exceeds `limit`. The multiset space
/// is split by first element over `shards` workers; the result does not depend on it.
RatePointCensus rate_point_census(int n, int J, std::uint64_t limit = 200'000'000, int shards = 1);

/// Largest gap between achievable single-PC rates: log2(n)/n.
double max_rate_gap(int n);

}  // namespace cpc
