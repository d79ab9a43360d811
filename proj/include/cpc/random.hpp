#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace cpc {

/// Recorded in every report so sample streams can be replayed.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-substreams+std-normal";

/// Samples are generated in fixed-size blocks, each from its own substream, so the
/// stream does not depend on how blocks are spread over threads.
inline constexpr std::size_t kSampleBlock = 4096;

std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a labeled substream ("eval/0", "design/train", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Fills the columns of `out` with i.i.d. N(0, sigma^2) vectors from substream `block`.
void fill_gaussian_block(Eigen::Ref<Eigen::MatrixXd> out, std::uint64_t seed, std::uint64_t block, double sigma);

}  // namespace cpc
