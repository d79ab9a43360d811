#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cpc/codec.hpp"

namespace cpc {

struct RDPoint {
  std::string method;
  int n = 1;
  int J = 1;
  double rate = 0.0;        // bits per sample
  double distortion = 0.0;  // per sample
  double std_error = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

struct EmpiricalResult {
  double distortion = 0.0;
  double std_error = 0.0;
  std::vector<std::size_t> hits;  // samples won by each sphere
  Eigen::VectorXd probabilities;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool sparse_cells = false;  // some p_j < 10 / samples
};

/// Monte Carlo estimate of n^{-1} E[min_j ||X - X_hat_j||^2] on fresh N(0, sigma^2 I) vectors.
EmpiricalResult empirical_distortion(const ConcentricCode& code, std::size_t samples, std::uint64_t seed,
                                     double sigma = 1.0, int threads = 0);

double entropy_bits(const Eigen::Ref<const Eigen::VectorXd>& p);

/// n^{-1} (H(p) + sum_j p_j log2 M_j).
double rate_variable(const ConcentricCode& code, const Eigen::Ref<const Eigen::VectorXd>& p);

/// n^{-1} log2 sum_j M_j.
double rate_fixed(const ConcentricCode& code);

/// Scalar quantizers with thresholds at (k + 1/2) step: reproduction at k step (uniform)
/// or at the cell mean (optimal). Rate is the output entropy.
std::vector<RDPoint> ecusq_curve(const std::vector<double>& steps, double sigma = 1.0);
std::vector<RDPoint> ecsq_curve(const std::vector<double>& steps, double sigma = 1.0);

/// Geometric grid of steps used when none is given.
std::vector<double> default_step_grid();

double shannon_distortion(double rate, double sigma = 1.0);
std::vector<RDPoint> shannon_bound(const std::vector<double>& rates, double sigma = 1.0);

constexpr double kParetoRateBin = 1e-3;

/// Keeps the lowest distortion among points within `rate_bin` of each other in rate,
/// then drops dominated points. The result has nondecreasing rate and decreasing distortion.
std::vector<RDPoint> pareto_filter(std::vector<RDPoint> points, double rate_bin = kParetoRateBin);

inline constexpr const char* kRdCsvHeader = "method,n,J,rate_bits,distortion,stderr,seed,samples";
void write_rd_csv(std::ostream& out, const std::vector<RDPoint>& points);

}  // namespace cpc
