#include "cpc/wsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cpc/evaluation.hpp"
#include "cpc/io.hpp"
#include "cpc/random.hpp"

namespace cpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Partial moments of the chi-distributed norm g = sigma sqrt(2 T), T ~ Gamma(n/2),
// over [0, t]: integrals of 1, g and g^2. Upper tails use Q for accuracy.
struct ChiMoments {
  int n;
  double sigma;

  double half_n() const { return 0.5 * n; }
  double arg(double t) const { return t * t / (2.0 * sigma * sigma); }
  double mean_scale() const {
    return sigma * std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (n + 1)) - std::lgamma(half_n()));
  }
  // Integral of g^power over [a, b] (b may be infinite).
  double integral(int power, double a, double b) const {
    const double s = half_n() + 0.5 * power;
    const double scale = power == 0 ? 1.0 : power == 1 ? mean_scale() : n * sigma * sigma;
    const double xa = arg(a);
    if (std::isinf(b)) return scale * boost::math::gamma_q(s, xa);
    const double xb = arg(b);
    if (xa > s) return scale * (boost::math::gamma_q(s, xa) - boost::math::gamma_q(s, xb));
    return scale * (boost::math::gamma_p(s, xb) - boost::math::gamma_p(s, xa));
  }
};

}  // namespace

GainCodebook gain_codebook(int J, int n, double sigma) {
  if (J < 1) throw std::invalid_argument("gain codebook needs J >= 1");
  if (n < 1) throw std::invalid_argument("gain codebook needs n >= 1");
  if (!(sigma > 0)) throw std::invalid_argument("gain codebook needs sigma > 0");
  const ChiMoments chi{n, sigma};
  GainCodebook gc;
  gc.n = n;
  gc.sigma = sigma;
  gc.gains.resize(J);
  for (int j = 0; j < J; ++j)
    gc.gains(j) = sigma * std::sqrt(2.0 * boost::math::gamma_p_inv(chi.half_n(), (j + 0.5) / J));

  auto edges = [&](const Eigen::VectorXd& g) {
    std::vector<double> e(static_cast<std::size_t>(J) + 1);
    e.front() = 0.0;
    e.back() = std::numeric_limits<double>::infinity();
    for (int j = 1; j < J; ++j) e[static_cast<std::size_t>(j)] = 0.5 * (g(j - 1) + g(j));
    return e;
  };

  constexpr int kMaxIters = 200'000;
  double change = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < kMaxIters && change > 1e-13 * sigma; ++it) {
    const auto e = edges(gc.gains);
    change = 0.0;
    for (int j = 0; j < J; ++j) {
      const double mass = chi.integral(0, e[j], e[j + 1]);
      const double next = chi.integral(1, e[j], e[j + 1]) / mass;
      change = std::max(change, std::abs(next - gc.gains(j)));
      gc.gains(j) = next;
    }
  }
  if (change > 1e-9 * sigma)
    throw std::runtime_error("gain Lloyd-Max did not converge (last change " + format_real(change) + ")");
  gc.iterations = it;
  const auto e = edges(gc.gains);
  gc.probs.resize(J);
  for (int j = 0; j < J; ++j) gc.probs(j) = chi.integral(0, e[j], e[j + 1]);
  gc.probs /= gc.probs.sum();
  gc.thresholds.resize(J - 1);
  for (int j = 1; j < J; ++j) gc.thresholds(j - 1) = e[static_cast<std::size_t>(j)];
  return gc;
}

double gain_distortion(const GainCodebook& gc) {
  const ChiMoments chi{gc.n, gc.sigma};
  double d = 0.0;
  for (int j = 0; j < gc.size(); ++j) {
    const double a = j == 0 ? 0.0 : gc.thresholds(j - 1);
    const double b = j + 1 == gc.size() ? std::numeric_limits<double>::infinity() : gc.thresholds(j);
    const double g = gc.gains(j);
    d += chi.integral(2, a, b) - 2.0 * g * chi.integral(1, a, b) + g * g * chi.integral(0, a, b);
  }
  return d / gc.n;
}

double lattice_G(const std::string& name_or_value) {
  if (name_or_value == "scalar") return kScalarLatticeG;
  if (name_or_value == "leech") return kLeechLatticeG;
  const double g = parse_real(name_or_value);
  if (!(g > 0)) throw std::invalid_argument("lattice G must be positive");
  return g;
}

WscConstants wsc_constants(int n, double G, double sigma) {
  if (n < 2) throw std::invalid_argument("WSC constants need n >= 2");
  if (!(G > 0)) throw std::invalid_argument("WSC constants need G > 0");
  if (!(sigma > 0)) throw std::invalid_argument("WSC constants need sigma > 0");
  const double h = 0.5 * n;
  const double log_area = std::log(2.0) + h * std::log(kPi) - std::lgamma(h);  // unit-sphere surface area
  const double log_C = std::log((n - 1.0) / n) + std::log(G) + 2.0 / (n - 1.0) * log_area;
  const double log_Cs = log_C + std::log(2.0 * sigma * sigma) + boost::math::digamma(h);
  const double log_Cg = 2.0 * std::log(sigma) + h * std::log(3.0) + 3.0 * std::lgamma((n + 2.0) / 6.0) -
                        std::log(8.0 * n) - std::lgamma(h);
  return {n, G, sigma, std::exp(log_C), std::exp(log_Cs), std::exp(log_Cg)};
}

RateSplit optimal_rate_split(double R, const WscConstants& k) {
  const double n = k.n;
  RateSplit s;
  s.R = R;
  s.R_s = (n - 1.0) / n * (R + std::log2(k.C_s / (k.C_g * (n - 1.0))) / (2.0 * n));
  s.R_g = R - s.R_s;
  if (!(s.R_s > 0.0) || !(s.R_g > 0.0))
    throw std::domain_error("rate too low for high-resolution model: R=" + format_real(R) +
                            " gives R_s=" + format_real(s.R_s) + ", R_g=" + format_real(s.R_g));
  return s;
}

double highres_distortion(const RateSplit& split, const WscConstants& k) {
  const double n = k.n;
  return k.C_s * std::exp2(-2.0 * n / (n - 1.0) * split.R_s) + k.C_g * std::exp2(-2.0 * n * split.R_g);
}

double highres_decay_constant(const WscConstants& k) {
  const double n = k.n;
  return n / std::pow(n - 1.0, 1.0 - 1.0 / n) * std::pow(k.C_g, 1.0 / n) * std::pow(k.C_s, 1.0 - 1.0 / n);
}

Eigen::VectorXd log2_sizes_variable_rate(const RateSplit& split, const GainCodebook& gc) {
  const double n = gc.n;
  const Eigen::VectorXd log_g = gc.gains.array().log2();
  const double mean_log_g = gc.probs.dot(log_g);
  return ((n - 1.0) * (log_g.array() - mean_log_g) + n * split.R_s).matrix();
}

Eigen::VectorXd log2_sizes_fixed_rate(double R, const GainCodebook& gc) {
  if (!(R > 0)) throw std::invalid_argument("fixed-rate sizing needs R > 0");
  const double n = gc.n;
  const Eigen::VectorXd w =
      (n - 1.0) / (n + 1.0) * (gc.probs.array() * gc.gains.array().square()).log2();
  const double top = w.maxCoeff();
  const double log_sum = top + std::log2((w.array() - top).unaryExpr([](double v) { return std::exp2(v); }).sum());
  return (w.array() - log_sum + n * R).matrix();
}

double shape_distortion_highres(const GainCodebook& gc, const Eigen::Ref<const Eigen::VectorXd>& log2_sizes,
                                const WscConstants& k) {
  if (log2_sizes.size() != gc.gains.size()) throw std::invalid_argument("size count does not match gain codebook");
  const double e = -2.0 / (gc.n - 1.0);
  return k.C * (gc.probs.array() * gc.gains.array().square() * (e * log2_sizes.array()).unaryExpr([](double v) { return std::exp2(v); })).sum();
}

double snr_improvement_db(int n) {
  if (n < 2) throw std::invalid_argument("SNR improvement needs n >= 2");
  return -10.0 * (1.0 - 1.0 / n) * std::log10(2.0 * std::exp(boost::math::digamma(0.5 * n)) / n);
}

std::vector<Composition> allocate_compositions(int n, const Eigen::Ref<const Eigen::VectorXd>& log2_targets,
                                               Variant variant, CompositionFilter filter) {
  if (n < 1) throw std::invalid_argument("allocation needs n >= 1");
  if (n > 60) throw ResourceLimitError("composition allocation is limited to n <= 60");
  // A codebook size depends only on the multiset of parts, so one representative per
  // partition suffices: the lexicographically smallest arrangement passing the filter.
  struct Candidate {
    double log2_size;
    std::vector<int> parts;
  };
  std::vector<Candidate> candidates;
  const double sign_bits = variant == Variant::II ? n : 0.0;
  for_each_partition(n, [&](const std::vector<int>& desc) {
    std::vector<int> parts(desc.rbegin(), desc.rend());  // ascending
    if (filter == CompositionFilter::variant1_unimodal) {
      // Smallest parts ascending on the first half, the rest descending.
      std::sort(parts.begin() + static_cast<std::ptrdiff_t>(parts.size() / 2), parts.end(), std::greater<>());
    }
    if (!passes_filter(parts, filter)) return;
    const Composition c(parts);
    candidates.push_back({log2_exact(multinomial_size(c)) + sign_bits, std::move(parts)});
  });
  std::vector<Composition> out;
  for (Eigen::Index j = 0; j < log2_targets.size(); ++j) {
    const double target = log2_targets(j);
    if (!std::isfinite(target)) throw std::invalid_argument("allocation target must be finite");
    auto rank = [&](const Candidate& c) {
      return std::tuple<double, std::size_t, const std::vector<int>&>(std::abs(c.log2_size - target), c.parts.size(),
                                                                      c.parts);
    };
    const auto best = std::min_element(candidates.begin(), candidates.end(),
                                       [&](const Candidate& a, const Candidate& b) { return rank(a) < rank(b); });
    out.emplace_back(best->parts);
  }
  return out;
}

std::string to_string(WscMode mode) { return mode == WscMode::variable_rate ? "wsc-var" : "wsc-fixed"; }

WscDesign design_wsc(WscMode mode, int n, double R, const WscOptions& opt, const OrderStatTable& table) {
  const DesignConfig& cfg = opt.design;
  validate(cfg);
  if (table.n != n) throw std::invalid_argument("order-statistic table does not match n");
  if (!(R > 0)) throw std::invalid_argument("WSC design needs R > 0");
  WscReport rep;
  rep.mode = mode;
  rep.n = n;
  rep.J = cfg.J;
  rep.target_rate = R;
  rep.seed = cfg.seed;
  rep.eval_samples = opt.eval_samples;
  rep.constants = wsc_constants(n, opt.G, cfg.sigma);
  rep.gains = gain_codebook(cfg.J, n, cfg.sigma);
  if (mode == WscMode::variable_rate) {
    rep.split = optimal_rate_split(R, rep.constants);
    rep.log2_targets = log2_sizes_variable_rate(*rep.split, rep.gains);
    rep.model_distortion = highres_distortion(*rep.split, rep.constants);
  } else {
    rep.log2_targets = log2_sizes_fixed_rate(R, rep.gains);
    rep.model_distortion =
        shape_distortion_highres(rep.gains, rep.log2_targets, rep.constants) + gain_distortion(rep.gains);
  }
  Eigen::VectorXd targets = rep.log2_targets;
  for (Eigen::Index j = 0; j < targets.size(); ++j) {
    if (targets(j) < 0.0) {
      rep.notes.push_back("sphere " + std::to_string(j) + ": target size below 1, clamped");
      targets(j) = 0.0;
    }
  }
  rep.allocated = allocate_compositions(n, targets, cfg.variant, opt.filter);

  // Each subcode starts at its own single-PC optimum, rescaled to the gain of its sphere.
  std::vector<Eigen::VectorXd> init;
  for (int j = 0; j < cfg.J; ++j) {
    const auto cw = optimal_levels_single(rep.allocated[static_cast<std::size_t>(j)], table, cfg.variant);
    const double norm = cw.expanded().norm();
    init.push_back(norm > 0.0 ? Eigen::VectorXd(cw.levels() * (rep.gains.gains(j) / norm)) : cw.levels());
  }
  auto designed = lloyd_general(rep.allocated, cfg, table, init);
  rep.lloyd = designed.report;
  for (const auto& cw : designed.code.subcodes()) rep.final_compositions.push_back(cw.composition());

  const auto eval = empirical_distortion(designed.code, opt.eval_samples, derive_seed(cfg.seed, "wsc/eval"),
                                         cfg.sigma, cfg.threads);
  rep.empirical_distortion = eval.distortion;
  rep.std_error = eval.std_error;
  rep.probabilities = eval.probabilities;
  rep.achieved_rate = mode == WscMode::variable_rate ? rate_variable(designed.code, eval.probabilities)
                                                      : rate_fixed(designed.code);
  if (eval.sparse_cells) rep.notes.push_back("some spheres won fewer than 10 evaluation samples");
  rep.rate_deviation = std::abs(rep.achieved_rate - R) > 0.5;
  if (rep.rate_deviation)
    rep.notes.push_back("achieved rate " + format_real(rep.achieved_rate) + " deviates from target by more than 0.5 bit");
  return {std::move(designed.code), std::move(rep)};
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json to_json(const WscReport& r) {
  nlohmann::json j;
  j["inputs"] = {{"mode", to_string(r.mode)}, {"n", r.n},          {"J", r.J},
                 {"rate", r.target_rate},     {"G", r.constants.G}, {"sigma", r.constants.sigma}};
  j["constants"] = {{"C", r.constants.C}, {"C_s", r.constants.C_s}, {"C_g", r.constants.C_g}};
  if (r.split) j["rate_split"] = {{"R_s", r.split->R_s}, {"R_g", r.split->R_g}};
  j["gains"] = vector_json(r.gains.gains);
  j["probs"] = vector_json(r.gains.probs);
  j["M_targets"] = vector_json(r.log2_targets.unaryExpr([](double v) { return std::exp2(v); }).eval());
  j["M_targets_log2"] = vector_json(r.log2_targets);
  auto parts = [](const std::vector<Composition>& cs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : cs) a.push_back(c.parts());
    return a;
  };
  j["chosen_compositions"] = parts(r.allocated);
  j["final_compositions"] = parts(r.final_compositions);
  j["achieved_rate"] = r.achieved_rate;
  j["empirical_D"] = r.empirical_distortion;
  j["stderr"] = r.std_error;
  j["sphere_probabilities"] = vector_json(r.probabilities);
  j["model_D"] = r.model_distortion;
  j["rate_deviation"] = r.rate_deviation;
  j["seed"] = r.seed;
  j["eval_samples"] = r.eval_samples;
  j["rng"] = std::string(kRngAlgorithm);
  j["lloyd"] = {{"iterations", r.lloyd.iterations},
                {"converged", r.lloyd.converged},
                {"training_D", r.lloyd.distortion},
                {"empty_cell_events", r.lloyd.empty_cell_events}};
  j["notes"] = r.notes;
  return j;
}

}  // namespace cpc
