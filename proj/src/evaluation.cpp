#include "cpc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "cpc/io.hpp"
#include "cpc/parallel.hpp"
#include "cpc/random.hpp"

namespace cpc {

namespace {

// Running mean and sum of squared deviations, merged pairwise in block order.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }
};

}  // namespace

EmpiricalResult empirical_distortion(const ConcentricCode& code, std::size_t samples, std::uint64_t seed, double sigma,
                                     int threads) {
  if (samples < 1000) throw std::invalid_argument("empirical distortion needs at least 1000 samples");
  const int n = code.dimension();
  const std::size_t J = code.size();
  const std::size_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<Moments> moments(blocks);
  std::vector<std::vector<std::size_t>> hits(blocks, std::vector<std::size_t>(J, 0));
  parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
    const auto width = static_cast<Eigen::Index>(std::min(kSampleBlock, samples - b * kSampleBlock));
    Eigen::MatrixXd x(n, width);
    fill_gaussian_block(x, seed, b, sigma);
    for (Eigen::Index col = 0; col < width; ++col) {
      const NearestSphere best = nearest_sphere(x.col(col), code);
      moments[b].add(best.distance / n);
      ++hits[b][best.sphere];
    }
  });
  EmpiricalResult r;
  r.samples = samples;
  r.seed = seed;
  r.hits.assign(J, 0);
  Moments total;
  for (std::size_t b = 0; b < blocks; ++b) {
    total.merge(moments[b]);
    for (std::size_t j = 0; j < J; ++j) r.hits[j] += hits[b][j];
  }
  r.distortion = total.mean;
  r.std_error = std::sqrt(total.m2 / (total.count - 1.0) / total.count);
  r.probabilities.resize(static_cast<Eigen::Index>(J));
  for (std::size_t j = 0; j < J; ++j) {
    r.probabilities(static_cast<Eigen::Index>(j)) = static_cast<double>(r.hits[j]) / static_cast<double>(samples);
    if (r.hits[j] < 10) r.sparse_cells = true;
  }
  return r;
}

double entropy_bits(const Eigen::Ref<const Eigen::VectorXd>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
  return h;
}

double rate_variable(const ConcentricCode& code, const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (static_cast<std::size_t>(p.size()) != code.size())
    throw std::invalid_argument("rate_variable: " + std::to_string(p.size()) + " probabilities for " +
                                std::to_string(code.size()) + " subcodes");
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("rate_variable: probabilities must be nonnegative and sum to 1");
  double r = entropy_bits(p);
  for (std::size_t j = 0; j < code.size(); ++j) r += p(static_cast<Eigen::Index>(j)) * log2_exact(code.subcode_size(j));
  return r / code.dimension();
}

double rate_fixed(const ConcentricCode& code) { return log2_exact(code.total_size()) / code.dimension(); }

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_pdf(double z) { return std::isinf(z) ? 0.0 : kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// P(a <= Z < b) for standard normal, using the tail on the side away from the mode.
double std_mass(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
  return 1.0 - 0.5 * std::erfc(-a * kInvSqrt2) - 0.5 * std::erfc(b * kInvSqrt2);
}

struct Cell {
  double mass, first, second;  // integrals of 1, x, x^2 against the N(0, sigma^2) density
};

Cell gaussian_cell(double a, double b, double sigma) {
  const double za = a / sigma, zb = b / sigma;
  const double pa = std_pdf(za), pb = std_pdf(zb);
  const double mass = std_mass(za, zb);
  const double ta = std::isinf(za) ? 0.0 : za * pa;
  const double tb = std::isinf(zb) ? 0.0 : zb * pb;
  return {mass, sigma * (pa - pb), sigma * sigma * (mass + ta - tb)};
}

std::vector<RDPoint> scalar_curve(const std::vector<double>& steps, double sigma, bool optimal_codewords) {
  if (!(sigma > 0)) throw std::invalid_argument("scalar quantizer needs sigma > 0");
  std::vector<RDPoint> out;
  for (double step : steps) {
    if (!(step > 0) || !std::isfinite(step)) throw std::invalid_argument("quantizer steps must be positive and finite");
    const long kmax = static_cast<long>(std::ceil(12.0 * sigma / step)) + 1;
    double entropy = 0.0, distortion = 0.0;
    for (long k = -kmax; k <= kmax; ++k) {
      const double lo = k == -kmax ? -INFINITY : (static_cast<double>(k) - 0.5) * step;
      const double hi = k == kmax ? INFINITY : (static_cast<double>(k) + 0.5) * step;
      const Cell c = gaussian_cell(lo, hi, sigma);
      if (c.mass <= 0.0) continue;
      entropy -= c.mass * std::log2(c.mass);
      if (optimal_codewords) {
        const double mean = c.first / c.mass;
        distortion += std::max(0.0, c.second - mean * c.first);
      } else {
        const double y = static_cast<double>(k) * step;
        distortion += c.second - 2.0 * y * c.first + y * y * c.mass;
      }
    }
    RDPoint p;
    p.method = optimal_codewords ? "ecsq" : "ecusq";
    p.rate = std::max(0.0, entropy);
    p.distortion = distortion;
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<RDPoint> ecusq_curve(const std::vector<double>& steps, double sigma) {
  return scalar_curve(steps, sigma, false);
}

std::vector<RDPoint> ecsq_curve(const std::vector<double>& steps, double sigma) {
  return scalar_curve(steps, sigma, true);
}

std::vector<double> default_step_grid() {
  std::vector<double> steps;
  for (int i = 0; i <= 60; ++i) steps.push_back(0.05 * std::pow(10.0, i / 30.0));  // 0.05 .. 5
  return steps;
}

double shannon_distortion(double rate, double sigma) {
  if (!(rate >= 0)) throw std::invalid_argument("rate must be nonnegative");
  return sigma * sigma * std::exp2(-2.0 * rate);
}

std::vector<RDPoint> shannon_bound(const std::vector<double>& rates, double sigma) {
  std::vector<RDPoint> out;
  for (double r : rates) {
    RDPoint p;
    p.method = "bound";
    p.rate = r;
    p.distortion = shannon_distortion(r, sigma);
    out.push_back(p);
  }
  return out;
}

std::vector<RDPoint> pareto_filter(std::vector<RDPoint> points, double rate_bin) {
  auto key = [](const RDPoint& p) {
    return std::tie(p.rate, p.distortion, p.method, p.n, p.J, p.std_error, p.seed, p.samples);
  };
  std::sort(points.begin(), points.end(), [&](const RDPoint& a, const RDPoint& b) { return key(a) < key(b); });
  std::vector<RDPoint> binned;
  for (std::size_t i = 0; i < points.size();) {
    std::size_t best = i, k = i;
    for (; k < points.size() && points[k].rate - points[i].rate <= rate_bin; ++k)
      if (points[k].distortion < points[best].distortion) best = k;
    binned.push_back(points[best]);
    i = k;
  }
  std::vector<RDPoint> front;
  for (auto& p : binned)
    if (front.empty() || p.distortion < front.back().distortion) front.push_back(std::move(p));
  return front;
}

void write_rd_csv(std::ostream& out, const std::vector<RDPoint>& points) {
  out << kRdCsvHeader << '\n';
  for (const auto& p : points)
    out << p.method << ',' << p.n << ',' << p.J << ',' << format_real(p.rate) << ',' << format_real(p.distortion) << ','
        << format_real(p.std_error) << ',' << p.seed << ',' << p.samples << '\n';
}

}  // namespace cpc
