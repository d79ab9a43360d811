#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cpc/codec.hpp"
#include "cpc/combinatorics.hpp"
#include "cpc/order_statistics.hpp"

namespace cpc {

enum class EmptyCellPolicy {
  reseed_worst,  // move a dead centroid onto the training point with the largest error
  keep,          // leave it where it is
};

struct DesignConfig {
  int J = 1;
  Variant variant = Variant::I;
  std::size_t sample_count = 500'000;
  std::uint64_t seed = 1;
  double sigma = 1.0;
  double lloyd_rel_tol = 1e-6;
  int lloyd_max_iters = 200;
  EmptyCellPolicy empty_cell_policy = EmptyCellPolicy::reseed_worst;
  int threads = 0;
};

void validate(const DesignConfig& cfg);

/// Training vectors, each sorted in nonincreasing order (magnitudes for Variant II).
/// One vector per column.
struct SortedSamples {
  Eigen::MatrixXd data;
  Variant variant = Variant::I;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  int dimension() const { return static_cast<int>(data.rows()); }
  Eigen::Index count() const { return data.cols(); }
};

SortedSamples draw_sorted_samples(int n, std::size_t count, Variant variant, double sigma, std::uint64_t seed,
                                  int threads = 0);

/// mu_i = n_i^{-1} sum_{l in I_i} E[xi_l] (or E[eta_l] for Variant II).
InitialCodeword optimal_levels_single(const Composition& c, const OrderStatTable& table, Variant variant);

/// n^{-1} sum_i sum_{l in I_i} (E[v_l^2] - 2 mu_i E[v_l] + mu_i^2), v = xi or eta.
double pc_distortion_exact(const InitialCodeword& cw, const OrderStatTable& table);

/// A composition with levels that need not be ordered; used where a level set is
/// scored in the sorted domain without being a valid initial codeword.
struct LevelSet {
  Composition composition;
  Eigen::VectorXd levels;
};

/// Per-sample min_j n^{-1} sum_i sum_{l in I_i^j} (v_l - mu_i^j)^2 over sorted samples.
Eigen::VectorXd per_sample_distortion(const SortedSamples& samples, const std::vector<LevelSet>& code, int threads = 0);

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

SampleStats sample_stats(const Eigen::Ref<const Eigen::VectorXd>& values);

struct LloydReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> distortion_history;  // per-sample distortion after each assignment pass
  double distortion = 0.0;                 // final training distortion
  double std_error = 0.0;
  Eigen::VectorXd probabilities;           // training hit rate per sphere
  int empty_cell_events = 0;
  std::vector<std::string> notes;          // level merges, reseeds
  double max_decomposition_residual = 0.0; // reduced-VQ identity check (common composition only)
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> single_pc_distortion;  // exact optimum for J = 1 at this composition
};

struct DesignResult {
  ConcentricCode code;
  LloydReport report;
};

/// Common-composition design: J-point Lloyd on the K-dimensional projections
/// xi_bar of the sorted training vectors, mapped back by mu_i^j = m_i^j / sqrt(n_i).
DesignResult design_common_composition(const Composition& c, const DesignConfig& cfg, const OrderStatTable& table);
DesignResult design_common_composition(const Composition& c, const DesignConfig& cfg, const OrderStatTable& table,
                                       const SortedSamples& training);

/// Full-dimension Lloyd over J (possibly different) compositions. `initial_levels`,
/// when given, replaces the sample-based initialization.
DesignResult lloyd_general(const std::vector<Composition>& compositions, const DesignConfig& cfg,
                           const OrderStatTable& table,
                           const std::optional<std::vector<Eigen::VectorXd>>& initial_levels = std::nullopt);
DesignResult lloyd_general(const std::vector<Composition>& compositions, const DesignConfig& cfg,
                           const OrderStatTable& table, const SortedSamples& training,
                           const std::optional<std::vector<Eigen::VectorXd>>& initial_levels = std::nullopt);

/// Pools adjacent levels until they are strictly decreasing. Returns the merged
/// composition and levels; `merged` is set when anything was pooled.
LevelSet repair_level_order(const Composition& c, const Eigen::Ref<const Eigen::VectorXd>& levels, bool& merged);

/// Exchanges parts m and m + 1 (0-based).
Composition swap_composition(const Composition& c, std::size_t m);

/// Level construction paired with swap_composition: with q = n_m, r = n_{m+1},
///   mu'_m     = (2 q mu_m + (r - q) mu_{m+1}) / (q + r)
///   mu'_{m+1} = ((q - r) mu_m + 2 r mu_{m+1}) / (q + r)
/// It keeps the gap mu_m - mu_{m+1} and the energy sum_i n_i mu_i^2.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> swapped_levels(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& levels,
                                                        const Composition& c, std::size_t m) {
  if (m + 1 >= c.size()) throw std::out_of_range("swap index out of range");
  if (static_cast<std::size_t>(levels.size()) != c.size()) throw std::invalid_argument("level count mismatch");
  const Scalar q(c.part(m));
  const Scalar r(c.part(m + 1));
  const auto i = static_cast<Eigen::Index>(m);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = levels;
  out(i) = (Scalar(2) * q * levels(i) + (r - q) * levels(i + 1)) / (q + r);
  out(i + 1) = ((q - r) * levels(i) + Scalar(2) * r * levels(i + 1)) / (q + r);
  return out;
}

/// zeta = (1/r) sum_{first r} eta - (2/(q-r)) sum_{middle q-r} eta + (1/r) sum_{last r} eta
/// over groups m and m+1 (q > r); zeta_plus = E[zeta; zeta >= 0], zeta_minus = -E[zeta; zeta < 0].
struct ZetaStats {
  double plus = 0.0;
  double minus = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
};

ZetaStats zeta_statistics(const SortedSamples& magnitudes, const Composition& c, std::size_t m);

/// min_j gap_j / max_j gap_j with gap_j = mu^j_m - mu^j_{m+1}.
double gap_ratio(const std::vector<Eigen::VectorXd>& levels, std::size_t m);

struct SwapReport {
  bool skipped = false;
  std::string reason;
  bool convex = false;
  ZetaStats zeta;
  double gap_ratio = 0.0;
  bool constraint_satisfied = false;
  Composition swapped;
  std::vector<Eigen::VectorXd> swapped_levels;
  double d_before = 0.0;
  double d_after = 0.0;
  double std_error_before = 0.0;
  double std_error_after = 0.0;
  double std_error_difference = 0.0;  // paired: same samples feed both codes
};

/// Compares a Variant II level set on composition c against its swapped
/// counterpart on the same magnitude samples. Skips (with a reason) when the
/// mean magnitude order statistics are not convex or the gap-ratio constraint fails.
SwapReport swap_improvement_test(const Composition& c, std::size_t m, const std::vector<Eigen::VectorXd>& levels,
                                 const DesignConfig& cfg, const OrderStatTable& table);

}  // namespace cpc
