#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "cpc/codec.hpp"
#include "cpc/combinatorics.hpp"
#include "cpc/design.hpp"

namespace cpc {

/// Scalar Lloyd-Max quantizer for the norm of an N(0, sigma^2 I_n) vector.
struct GainCodebook {
  int n = 0;
  double sigma = 1.0;
  Eigen::VectorXd gains;       // ascending
  Eigen::VectorXd probs;       // cell probabilities
  Eigen::VectorXd thresholds;  // J - 1 cell boundaries, midpoints of adjacent gains
  int iterations = 0;

  int size() const { return static_cast<int>(gains.size()); }
};

GainCodebook gain_codebook(int J, int n, double sigma = 1.0);

/// E[(||X|| - g_hat)^2] / n for the given gain quantizer.
double gain_distortion(const GainCodebook& gc);

/// Normalized second moments of common lattices.
inline constexpr double kScalarLatticeG = 1.0 / 12.0;
inline constexpr double kLeechLatticeG = 0.065771;

/// "scalar" or "leech"; anything else is parsed as a number.
double lattice_G(const std::string& name_or_value);

struct WscConstants {
  int n = 0;
  double G = 0.0;
  double sigma = 1.0;
  double C = 0.0;
  double C_s = 0.0;
  double C_g = 0.0;
};

/// C = (n-1)/n G (2 pi^{n/2} / Gamma(n/2))^{2/(n-1)}, C_s = C 2 sigma^2 e^{psi(n/2)},
/// C_g = sigma^2 3^{n/2} Gamma^3((n+2)/6) / (8 n Gamma(n/2)); all in the log domain.
WscConstants wsc_constants(int n, double G, double sigma = 1.0);

struct RateSplit {
  double R = 0.0;
  double R_s = 0.0;
  double R_g = 0.0;
};

/// Minimizes C_s 2^{-2 n R_s/(n-1)} + C_g 2^{-2 n R_g} subject to R_s + R_g = R.
/// Throws std::domain_error when either share would be nonpositive.
RateSplit optimal_rate_split(double R, const WscConstants& k);

/// C_s 2^{-2 n R_s/(n-1)} + C_g 2^{-2 n R_g}.
double highres_distortion(const RateSplit& split, const WscConstants& k);

/// n / (n-1)^{1-1/n} C_g^{1/n} C_s^{1-1/n}: the optimal D times 2^{2R}.
double highres_decay_constant(const WscConstants& k);

/// log2 M_j = (n-1) log2 g_j + n R_s - (n-1) sum_k p_k log2 g_k.
Eigen::VectorXd log2_sizes_variable_rate(const RateSplit& split, const GainCodebook& gc);

/// M_j proportional to (p_j g_j^2)^{(n-1)/(n+1)} with sum_j M_j = 2^{nR}; returned as log2 M_j.
Eigen::VectorXd log2_sizes_fixed_rate(double R, const GainCodebook& gc);

/// C sum_j p_j g_j^2 M_j^{-2/(n-1)}, sizes given as log2 M_j.
double shape_distortion_highres(const GainCodebook& gc, const Eigen::Ref<const Eigen::VectorXd>& log2_sizes,
                                const WscConstants& k);

/// -10 (1 - 1/n) log10(2 e^{psi(n/2)} / n).
double snr_improvement_db(int n);

/// For each log2 target, the composition of n (passing `filter`) whose exact codebook
/// size is closest in log2. Ties go to fewer parts, then lexicographically smaller parts.
/// Variant II sizes include the 2^n sign factor.
std::vector<Composition> allocate_compositions(int n, const Eigen::Ref<const Eigen::VectorXd>& log2_targets,
                                               Variant variant, CompositionFilter filter);

enum class WscMode { variable_rate, fixed_rate };

struct WscOptions {
  double G = kLeechLatticeG;
  CompositionFilter filter = CompositionFilter::none;
  DesignConfig design;  // J, variant, seed, training size, Lloyd settings
  std::size_t eval_samples = 500'000;
};

struct WscReport {
  WscMode mode = WscMode::variable_rate;
  int n = 0;
  int J = 0;
  double target_rate = 0.0;
  WscConstants constants;
  std::optional<RateSplit> split;
  GainCodebook gains;
  Eigen::VectorXd log2_targets;
  std::vector<Composition> allocated;  // before Lloyd
  std::vector<Composition> final_compositions;
  double achieved_rate = 0.0;
  double empirical_distortion = 0.0;
  double std_error = 0.0;
  Eigen::VectorXd probabilities;
  double model_distortion = 0.0;  // high-resolution prediction
  bool rate_deviation = false;    // |achieved - target| > 0.5 bit
  std::uint64_t seed = 0;
  std::size_t eval_samples = 0;
  LloydReport lloyd;
  std::vector<std::string> notes;
};

struct WscDesign {
  ConcentricCode code;
  WscReport report;
};

/// Rate split, sizes, composition choice, then full-dimension Lloyd started from each
/// subcode's single-PC optimum scaled to radius g_j; rate and D measured on fresh samples.
WscDesign design_wsc(WscMode mode, int n, double R, const WscOptions& opt, const OrderStatTable& table);

std::string to_string(WscMode mode);
nlohmann::json to_json(const WscReport& report);

}  // namespace cpc
