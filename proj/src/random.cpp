#include "cpc/random.hpp"

#include <random>

namespace cpc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label, mixed with the parent seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

void fill_gaussian_block(Eigen::Ref<Eigen::MatrixXd> out, std::uint64_t seed, std::uint64_t block, double sigma) {
  std::mt19937_64 engine(splitmix64(seed ^ splitmix64(block + 1)));
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index col = 0; col < out.cols(); ++col)
    for (Eigen::Index row = 0; row < out.rows(); ++row) out(row, col) = normal(engine);
}

}  // namespace cpc
