#include "cpc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cpc {

Variant variant_from_int(int v) {
  if (v == 1) return Variant::I;
  if (v == 2) return Variant::II;
  throw std::invalid_argument("variant must be 1 or 2, got " + std::to_string(v));
}

InitialCodeword::InitialCodeword(Composition composition, Eigen::VectorXd levels, Variant variant)
    : composition_(std::move(composition)), levels_(std::move(levels)), variant_(variant) {
  if (composition_.empty()) throw std::invalid_argument("initial codeword needs a composition");
  if (static_cast<std::size_t>(levels_.size()) != composition_.size())
    throw std::invalid_argument("initial codeword: " + std::to_string(levels_.size()) + " levels for " +
                                std::to_string(composition_.size()) + " groups");
  for (Eigen::Index i = 0; i < levels_.size(); ++i) {
    if (!std::isfinite(levels_(i))) throw std::invalid_argument("initial codeword: non-finite level");
    if (i > 0 && !(levels_(i) < levels_(i - 1)))
      throw std::invalid_argument("initial codeword: levels must be strictly decreasing");
  }
  if (variant_ == Variant::II && levels_(levels_.size() - 1) < 0.0)
    throw std::invalid_argument("initial codeword: Variant II levels must be nonnegative");
}

int InitialCodeword::sign_count() const {
  if (variant_ == Variant::I) return 0;
  const int n = dimension();
  return levels_(levels_.size() - 1) == 0.0 ? n - composition_.parts().back() : n;
}

BigInt InitialCodeword::size() const {
  return variant_ == Variant::I ? multinomial_size(composition_) : variant2_size(composition_, sign_count());
}

Eigen::VectorXd InitialCodeword::expanded() const {
  Eigen::VectorXd x(dimension());
  Eigen::Index i = 0;
  for (const auto& g : index_groups(composition_)) x.segment(g.first, g.size()).setConstant(levels_(i++));
  return x;
}

ConcentricCode::ConcentricCode(Variant variant, std::vector<InitialCodeword> subcodes)
    : variant_(variant), subcodes_(std::move(subcodes)) {
  if (subcodes_.empty()) throw std::invalid_argument("concentric code needs at least one subcode");
  n_ = subcodes_.front().dimension();
  sizes_.reserve(subcodes_.size());
  for (const auto& cw : subcodes_) {
    if (cw.dimension() != n_) throw std::invalid_argument("concentric code: subcodes disagree on dimension");
    if (cw.variant() != variant_) throw std::invalid_argument("concentric code: subcodes disagree on variant");
    sizes_.push_back(cw.size());
  }
}

BigInt ConcentricCode::total_size() const {
  BigInt total = 0;
  for (const auto& m : sizes_) total += m;
  return total;
}

std::uint64_t& encoder_sort_count() {
  thread_local std::uint64_t count = 0;
  return count;
}

std::vector<int> descending_order(const Eigen::Ref<const Eigen::VectorXd>& x, Variant variant) {
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  if (variant == Variant::I) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a) > x(b); });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(x(a)) > std::abs(x(b)); });
  }
  ++encoder_sort_count();
  return order;
}

double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double e = a(i) - b(i);
    d += e * e;
  }
  return d;
}

namespace {

// Places the levels of `cw` on the positions given by a precomputed descending order.
void place(const Eigen::Ref<const Eigen::VectorXd>& x, const std::vector<int>& order, const InitialCodeword& cw,
           Eigen::VectorXd& out) {
  out.resize(x.size());
  std::size_t l = 0;
  Eigen::Index i = 0;
  const bool signed_levels = cw.variant() == Variant::II;
  for (int count : cw.composition().parts()) {
    const double level = cw.levels()(i++);
    for (int k = 0; k < count; ++k, ++l) {
      const int pos = order[l];
      out(pos) = (signed_levels && level != 0.0 && x(pos) < 0.0) ? -level : level;
    }
  }
}

void check_dimension(Eigen::Index got, int want) {
  if (got != want)
    throw std::invalid_argument("dimension mismatch: vector has " + std::to_string(got) + " entries, code has " +
                                std::to_string(want));
}

// Level index of every position; throws when a component matches no level.
std::vector<int> symbols_of(const Eigen::Ref<const Eigen::VectorXd>& w, const InitialCodeword& cw) {
  check_dimension(w.size(), cw.dimension());
  const auto& levels = cw.levels();
  const bool magnitude = cw.variant() == Variant::II;
  std::vector<int> symbols(static_cast<std::size_t>(w.size()));
  std::vector<int> counts(cw.composition().size(), 0);
  for (Eigen::Index p = 0; p < w.size(); ++p) {
    const double v = magnitude ? std::abs(w(p)) : w(p);
    int found = -1;
    for (Eigen::Index i = 0; i < levels.size(); ++i) {
      if (levels(i) == v) {
        found = static_cast<int>(i);
        break;
      }
    }
    if (found < 0) throw std::invalid_argument("codeword component " + std::to_string(p) + " matches no level");
    if (magnitude && levels(found) == 0.0 && std::signbit(w(p)))
      throw std::invalid_argument("codeword component " + std::to_string(p) + " carries a sign on a zero level");
    symbols[static_cast<std::size_t>(p)] = found;
    ++counts[static_cast<std::size_t>(found)];
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] != cw.composition().part(i))
      throw std::invalid_argument("codeword is not a permutation of the initial codeword");
  return symbols;
}

}  // namespace

Eigen::VectorXd encode_pc(const Eigen::Ref<const Eigen::VectorXd>& x, const InitialCodeword& cw) {
  check_dimension(x.size(), cw.dimension());
  const auto order = descending_order(x, cw.variant());
  Eigen::VectorXd out;
  place(x, order, cw, out);
  return out;
}

namespace {

NearestSphere nearest_with_order(const Eigen::Ref<const Eigen::VectorXd>& x, const std::vector<int>& order,
                                 const ConcentricCode& code) {
  NearestSphere best{0, std::numeric_limits<double>::infinity()};
  Eigen::VectorXd candidate;
  for (std::size_t j = 0; j < code.size(); ++j) {
    place(x, order, code.subcode(j), candidate);
    const double d = squared_distance(x, candidate);
    if (d < best.distance) best = {j, d};
  }
  return best;
}

}  // namespace

NearestSphere nearest_sphere(const Eigen::Ref<const Eigen::VectorXd>& x, const ConcentricCode& code) {
  check_dimension(x.size(), code.dimension());
  return nearest_with_order(x, descending_order(x, code.variant()), code);
}

Encoding encode_cpc(const Eigen::Ref<const Eigen::VectorXd>& x, const ConcentricCode& code) {
  check_dimension(x.size(), code.dimension());
  const auto order = descending_order(x, code.variant());
  const NearestSphere best = nearest_with_order(x, order, code);
  Encoding out;
  out.distance = best.distance;
  out.index.sphere = best.sphere;
  place(x, order, code.subcode(best.sphere), out.codeword);
  out.index.rank = rank_codeword(out.codeword, code.subcode(best.sphere));
  return out;
}

BigInt rank_codeword(const Eigen::Ref<const Eigen::VectorXd>& w, const InitialCodeword& cw) {
  const auto symbols = symbols_of(w, cw);
  std::vector<int> counts = cw.composition().parts();
  BigInt remaining = cw.permutation_count();  // permutations of the not-yet-placed suffix
  int left = cw.dimension();
  BigInt rank = 0;
  for (int s : symbols) {
    for (int smaller = 0; smaller < s; ++smaller) {
      if (counts[smaller] > 0) rank += remaining * counts[smaller] / left;
    }
    remaining = remaining * counts[s] / left;
    --counts[s];
    --left;
  }
  if (cw.variant() == Variant::II) {
    const int h = cw.sign_count();
    BigInt signs = 0;
    for (Eigen::Index p = 0; p < w.size(); ++p) {
      if (cw.level(symbols[p]) == 0.0) continue;
      signs <<= 1;
      if (w(p) < 0.0) signs |= 1;
    }
    rank = (rank << h) | signs;
  }
  return rank;
}

Eigen::VectorXd unrank_codeword(const BigInt& rank, const InitialCodeword& cw) {
  if (rank < 0 || rank >= cw.size())
    throw std::out_of_range("rank " + rank.str() + " outside codebook of size " + cw.size().str());
  const int n = cw.dimension();
  const int h = cw.sign_count();
  BigInt perm_rank = rank;
  BigInt signs = 0;
  if (cw.variant() == Variant::II) {
    perm_rank = rank >> h;
    signs = rank - (perm_rank << h);
  }
  std::vector<int> counts = cw.composition().parts();
  BigInt remaining = cw.permutation_count();
  int left = n;
  Eigen::VectorXd w(n);
  for (int p = 0; p < n; ++p) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] == 0) continue;
      const BigInt block = remaining * counts[s] / left;
      if (perm_rank < block) {
        w(p) = cw.level(s);
        remaining = block;
        --counts[s];
        --left;
        break;
      }
      perm_rank -= block;
    }
  }
  if (cw.variant() == Variant::II) {
    int bit = h;
    for (int p = 0; p < n; ++p) {
      if (w(p) == 0.0) continue;
      --bit;
      if (bit_test(signs, static_cast<unsigned>(bit))) w(p) = -w(p);
    }
  }
  return w;
}

Eigen::VectorXd decode(const EncodedIndex& index, const ConcentricCode& code) {
  if (index.sphere >= code.size())
    throw std::out_of_range("sphere " + std::to_string(index.sphere) + " outside code with " +
                            std::to_string(code.size()) + " subcodes");
  return unrank_codeword(index.rank, code.subcode(index.sphere));
}

}  // namespace cpc
