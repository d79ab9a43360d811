#include "cpc/combinatorics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "cpc/parallel.hpp"

namespace cpc {

double log2_exact(const BigInt& value) {
  if (value <= 0) throw std::domain_error("log2_exact needs a positive integer");
  const auto bits = boost::multiprecision::msb(value);
  if (bits < 1000) return std::log2(value.convert_to<double>());
  const unsigned shift = static_cast<unsigned>(bits) - 60;
  BigInt top = value >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

Composition::Composition(std::vector<int> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("composition needs at least one part");
  for (int p : parts_) {
    if (p < 1) throw std::invalid_argument("composition parts must be >= 1");
  }
  n_ = std::accumulate(parts_.begin(), parts_.end(), 0);
}

Composition Composition::parse(std::string_view text) {
  std::vector<int> parts;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto token = text.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
      throw std::invalid_argument("bad composition part '" + std::string(token) + "'");
    parts.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return Composition(std::move(parts));
}

std::string Composition::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(parts_[i]);
  }
  return out;
}

std::vector<IndexRange> index_groups(const Composition& c) {
  std::vector<IndexRange> groups;
  groups.reserve(c.size());
  int first = 0;
  for (int p : c.parts()) {
    groups.push_back({first, first + p});
    first += p;
  }
  return groups;
}

namespace {

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

BigInt multinomial_size(const Composition& c) {
  // Product of binomials keeps intermediates small.
  BigInt m = 1;
  int placed = 0;
  for (int p : c.parts()) {
    for (int k = 1; k <= p; ++k) {
      m *= placed + k;
      m /= k;
    }
    placed += p;
  }
  return m;
}

BigInt variant2_size(const Composition& c, int positive_count) {
  const int n = c.dimension();
  const int without_last = n - c.parts().back();
  if (positive_count != n && positive_count != without_last)
    throw std::invalid_argument("sign count " + std::to_string(positive_count) + " does not match level groups of (" +
                                c.to_string() + ")");
  return multinomial_size(c) << positive_count;
}

CompositionFilter parse_filter(std::string_view name) {
  if (name == "none") return CompositionFilter::none;
  if (name == "variant2_monotone" || name == "monotone") return CompositionFilter::variant2_monotone;
  if (name == "variant1_unimodal" || name == "unimodal") return CompositionFilter::variant1_unimodal;
  throw std::invalid_argument("unknown composition filter '" + std::string(name) + "'");
}

std::string_view to_string(CompositionFilter filter) {
  switch (filter) {
    case CompositionFilter::none: return "none";
    case CompositionFilter::variant2_monotone: return "variant2_monotone";
    case CompositionFilter::variant1_unimodal: return "variant1_unimodal";
  }
  return "none";
}

bool passes_filter(const std::vector<int>& parts, CompositionFilter filter) {
  const std::size_t K = parts.size();
  switch (filter) {
    case CompositionFilter::none:
      return true;
    case CompositionFilter::variant2_monotone:
      return std::is_sorted(parts.begin(), parts.end());
    case CompositionFilter::variant1_unimodal: {
      const std::size_t half = K / 2;
      for (std::size_t i = 1; i < half; ++i)
        if (parts[i] < parts[i - 1]) return false;
      for (std::size_t i = half + 1; i < K; ++i)
        if (parts[i] > parts[i - 1]) return false;
      return true;
    }
  }
  return true;
}

std::vector<Composition> enumerate_compositions(int n, CompositionFilter filter) {
  std::vector<Composition> out;
  for_each_composition(n, filter, [&](Composition c) { out.push_back(std::move(c)); });
  return out;
}

std::vector<BigInt> distinct_multinomials(int n) {
  std::set<BigInt> values;
  const BigInt n_fact = factorial(n);
  for_each_partition(n, [&](const std::vector<int>& parts) {
    BigInt denom = 1;
    for (int p : parts) denom *= factorial(p);
    values.insert(n_fact / denom);
  });
  return {values.begin(), values.end()};
}

BigInt multiset_count(std::size_t distinct, int J) {
  // C(distinct + J - 1, J)
  BigInt c = 1;
  for (int k = 1; k <= J; ++k) {
    c *= static_cast<unsigned long long>(distinct) + static_cast<unsigned long long>(k) - 1;
    c /= k;
  }
  return c;
}

RatePointCensus rate_point_census(int n, int J, std::uint64_t limit, int shards) {
  if (n < 1) throw std::invalid_argument("census needs n >= 1");
  if (J < 1) throw std::invalid_argument("census needs J >= 1");
  const auto values = distinct_multinomials(n);
  const std::size_t N = values.size();
  const BigInt work = multiset_count(N, J);
  if (work > limit)
    throw ResourceLimitError("census for n=" + std::to_string(n) + ", J=" + std::to_string(J) + " needs " +
                             work.str() + " multisets (limit " + std::to_string(limit) + ")");

  // Shard s owns multisets whose smallest index is congruent to s mod shards.
  const std::size_t shard_count = static_cast<std::size_t>(std::max(shards, 1));
  std::vector<std::set<BigInt>> partial(shard_count);
  parallel_for(shard_count, static_cast<int>(shard_count), [&](std::size_t shard) {
    auto& sums = partial[shard];
    auto recurse = [&](auto&& self, int depth, std::size_t from, const BigInt& acc) -> void {
      if (depth == J) {
        sums.insert(acc);
        return;
      }
      for (std::size_t i = from; i < N; ++i) {
        if (depth == 0 && i % shard_count != shard) continue;
        self(self, depth + 1, i, acc + values[i]);
      }
    };
    recurse(recurse, 0, 0, BigInt(0));
  });

  std::set<BigInt> merged;
  for (auto& s : partial) merged.merge(s);
  RatePointCensus census;
  census.n = n;
  census.J = J;
  census.distinct_sums.assign(merged.begin(), merged.end());
  return census;
}

double max_rate_gap(int n) {
  if (n < 2) throw std::invalid_argument("max_rate_gap needs n >= 2");
  return std::log2(static_cast<double>(n)) / n;
}

}  // namespace cpc
