#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cpc/combinatorics.hpp"

namespace cpc {

/// Variant I permutes values; Variant II permutes magnitudes and carries a free
/// sign on every nonzero entry.
enum class Variant { I = 1, II = 2 };

Variant variant_from_int(int v);
inline int to_int(Variant v) { return static_cast<int>(v); }

/// Levels mu_1 > ... > mu_K, mu_i repeated n_i times (mu_K >= 0 for Variant II).
class InitialCodeword {
 public:
  InitialCodeword(Composition composition, Eigen::VectorXd levels, Variant variant);

  const Composition& composition() const { return composition_; }
  const Eigen::VectorXd& levels() const { return levels_; }
  double level(std::size_t i) const { return levels_(static_cast<Eigen::Index>(i)); }
  Variant variant() const { return variant_; }
  int dimension() const { return composition_.dimension(); }

  /// Entries carrying a sign bit: 0 for Variant I, n or n - n_K for Variant II.
  int sign_count() const;
  /// Permutations only, without the sign factor.
  BigInt permutation_count() const { return multinomial_size(composition_); }
  /// Codebook size M (includes 2^h for Variant II).
  BigInt size() const;
  /// The descending initial codeword x_init.
  Eigen::VectorXd expanded() const;

 private:
  Composition composition_;
  Eigen::VectorXd levels_;
  Variant variant_;
};

/// Union of J permutation codes over a shared dimension and variant.
class ConcentricCode {
 public:
  ConcentricCode(Variant variant, std::vector<InitialCodeword> subcodes);

  Variant variant() const { return variant_; }
  int dimension() const { return n_; }
  std::size_t size() const { return subcodes_.size(); }  // J
  const InitialCodeword& subcode(std::size_t j) const { return subcodes_[j]; }
  const std::vector<InitialCodeword>& subcodes() const { return subcodes_; }
  const BigInt& subcode_size(std::size_t j) const { return sizes_[j]; }
  const std::vector<BigInt>& subcode_sizes() const { return sizes_; }
  BigInt total_size() const;

 private:
  Variant variant_;
  int n_ = 0;
  std::vector<InitialCodeword> subcodes_;
  std::vector<BigInt> sizes_;
};

/// Sphere is 0-based; rank lies in [0, M_sphere).
struct EncodedIndex {
  std::size_t sphere = 0;
  BigInt rank;
  friend bool operator==(const EncodedIndex&, const EncodedIndex&) = default;
};

struct Encoding {
  EncodedIndex index;
  Eigen::VectorXd codeword;
  double distance = 0.0;  // squared Euclidean, summed in coordinate order
};

/// Positions of x from largest to smallest key (|x| for Variant II); equal keys
/// keep ascending position order.
std::vector<int> descending_order(const Eigen::Ref<const Eigen::VectorXd>& x, Variant variant);

/// Sum of squared differences in coordinate order.
double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Nearest codeword of a single permutation code.
Eigen::VectorXd encode_pc(const Eigen::Ref<const Eigen::VectorXd>& x, const InitialCodeword& cw);

struct NearestSphere {
  std::size_t sphere = 0;
  double distance = 0.0;
};

/// The sphere encode_cpc would pick and its squared distance, without ranking.
NearestSphere nearest_sphere(const Eigen::Ref<const Eigen::VectorXd>& x, const ConcentricCode& code);

/// Nearest codeword of the union: one sort, then O(n) per subcode. Ties between
/// subcodes go to the lowest sphere index.
Encoding encode_cpc(const Eigen::Ref<const Eigen::VectorXd>& x, const ConcentricCode& code);

/// Lexicographic rank of a codeword, level 1 being the smallest symbol. For
/// Variant II the rank is (permutation rank) * 2^h + sign bits, the first signed
/// position being the most significant bit and a set bit meaning negative.
BigInt rank_codeword(const Eigen::Ref<const Eigen::VectorXd>& codeword, const InitialCodeword& cw);

Eigen::VectorXd unrank_codeword(const BigInt& rank, const InitialCodeword& cw);

Eigen::VectorXd decode(const EncodedIndex& index, const ConcentricCode& code);

/// Number of sorts the encoder has performed on this thread.
std::uint64_t& encoder_sort_count();

}  // namespace cpc
