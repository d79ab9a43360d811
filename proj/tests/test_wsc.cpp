#include "doctest.h"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "cpc/order_statistics.hpp"
#include "cpc/wsc.hpp"
#include "oracles.hpp"

using namespace cpc;

namespace {

// chi density of the norm of an n-dimensional standard Gaussian vector
double chi_pdf(double g, int n) {
  return std::exp((n - 1) * std::log(g) - 0.5 * g * g - (0.5 * n - 1) * std::log(2.0) - std::lgamma(0.5 * n));
}

double chi_integral(int power, double a, double b, int n) {
  auto f = [&](double g) { return std::pow(g, power) * chi_pdf(g, n); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("gain codebook with one level is the chi mean") {
  const auto gc = gain_codebook(1, 25);
  CHECK(rel(gc.gains(0), 4.950262344204552) < 1e-12);
  CHECK(std::abs(gc.gains(0) - std::sqrt(24.5)) < 1e-3);
  CHECK(gc.probs(0) == 1.0);
  CHECK(rel(gain_distortion(gc), (25.0 - gc.gains(0) * gc.gains(0)) / 25.0) < 1e-10);
  CHECK(rel(gain_codebook(1, 25, 2.0).gains(0), 2.0 * gc.gains(0)) < 1e-12);
}

TEST_CASE("gain codebook satisfies the Lloyd-Max conditions") {
  for (int n : {2, 7, 25}) {
    for (int J : {2, 3, 4, 8}) {
      CAPTURE(n);
      CAPTURE(J);
      const auto gc = gain_codebook(J, n);
      CHECK(std::abs(gc.probs.sum() - 1.0) < 1e-12);
      for (int j = 1; j < J; ++j) {
        CHECK(gc.gains(j) > gc.gains(j - 1));
        CHECK(std::abs(gc.thresholds(j - 1) - 0.5 * (gc.gains(j - 1) + gc.gains(j))) < 1e-6);
      }
      const double hi = 12.0 + std::sqrt(static_cast<double>(n));
      for (int j = 0; j < J; ++j) {
        const double a = j == 0 ? 0.0 : gc.thresholds(j - 1);
        const double b = j + 1 == J ? hi : gc.thresholds(j);
        const double mass = chi_integral(0, a, b, n);
        CHECK(std::abs(mass - gc.probs(j)) < 1e-9);
        CHECK(std::abs(chi_integral(1, a, b, n) / mass - gc.gains(j)) < 1e-6);
      }
    }
  }
  CHECK_THROWS_AS(gain_codebook(0, 5), std::invalid_argument);
}

TEST_CASE("high-resolution constants") {
  const auto k = wsc_constants(25, kLeechLatticeG);
  CHECK(rel(k.C, 0.04626337543098389) < 1e-12);
  CHECK(rel(k.C_s, 1.110641941139057) < 1e-12);
  CHECK(rel(k.C_g, 0.05292912324861822) < 1e-12);
  CHECK(rel(k.C_s / k.C, 2.0 * std::exp(boost::math::digamma(12.5))) < 1e-14);
  const auto k2 = wsc_constants(2, kScalarLatticeG);
  const double direct = 3.0 * std::pow(std::tgamma(2.0 / 3.0), 3) / (16.0 * std::tgamma(1.0));
  CHECK(rel(k2.C_g, direct) < 1e-12);
  CHECK(rel(k2.C_g, 0.4655547339778552) < 1e-12);
  const auto ks = wsc_constants(25, kLeechLatticeG, 3.0);
  CHECK(rel(ks.C_s, 9.0 * k.C_s) < 1e-12);
  CHECK(rel(ks.C_g, 9.0 * k.C_g) < 1e-12);
  CHECK(ks.C == k.C);
  const auto big = wsc_constants(200, kScalarLatticeG);
  CHECK(std::isfinite(big.C));
  CHECK(std::isfinite(big.C_g));
  CHECK(big.C_g > 0.0);
  CHECK(lattice_G("leech") == kLeechLatticeG);
  CHECK(lattice_G("scalar") == kScalarLatticeG);
  CHECK(lattice_G("0.07") == 0.07);
  CHECK_THROWS(lattice_G("-1"));
  CHECK_THROWS_AS(wsc_constants(1, 0.1), std::invalid_argument);
}

TEST_CASE("optimal rate split") {
  const auto k = wsc_constants(25, kLeechLatticeG);
  const auto s = optimal_rate_split(3.0, k);
  CHECK(rel(s.R_s, 2.8762795337302075) < 1e-12);
  CHECK(rel(s.R_g, 0.12372046626979247) < 1e-10);
  for (double R : {0.5, 1.0, 2.0, 3.0, 7.25}) {
    const auto t = optimal_rate_split(R, k);
    CHECK(t.R_s + t.R_g == R);
  }
  WscConstants balanced = k;
  balanced.C_s = balanced.C_g * 24.0;
  const auto b = optimal_rate_split(2.0, balanced);
  CHECK(rel(b.R_s, 24.0 / 25.0 * 2.0) < 1e-15);
  CHECK(rel(b.R_g, 2.0 / 25.0) < 1e-12);
  CHECK_THROWS_AS(optimal_rate_split(0.001, wsc_constants(4, kScalarLatticeG)), std::domain_error);
}

TEST_CASE("optimal split reaches the combined decay constant") {
  for (int n : {3, 7, 25, 64}) {
    const auto k = wsc_constants(n, n == 25 ? kLeechLatticeG : kScalarLatticeG);
    for (double R : {1.0, 2.0, 4.0}) {
      RateSplit s;
      try {
        s = optimal_rate_split(R, k);
      } catch (const std::domain_error&) {
        continue;
      }
      CHECK(rel(highres_distortion(s, k) * std::exp2(2.0 * R), highres_decay_constant(k)) < 1e-9);
      // the optimum beats nearby splits
      for (double d : {-0.01, 0.01}) {
        const RateSplit off{R, s.R_s + d, s.R_g - d};
        CHECK(highres_distortion(off, k) > highres_distortion(s, k));
      }
    }
  }
}

TEST_CASE("variable-rate subcodebook sizes") {
  oracle::Rng rng(6);
  const int n = 25;
  const auto k = wsc_constants(n, kLeechLatticeG);
  const auto split = optimal_rate_split(3.0, k);
  const auto one = log2_sizes_variable_rate(split, gain_codebook(1, n));
  CHECK(std::abs(one(0) - n * split.R_s) < 1e-9);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int J = 1 + static_cast<int>(rng() % 8);
    GainCodebook gc;
    gc.n = n;
    gc.gains.resize(J);
    gc.probs.resize(J);
    double g = 0.0;
    for (int j = 0; j < J; ++j) {
      g += u(rng);
      gc.gains(j) = g;
      gc.probs(j) = u(rng);
    }
    gc.probs /= gc.probs.sum();
    const auto sizes = log2_sizes_variable_rate(split, gc);
    CHECK(std::abs(gc.probs.dot(sizes) - n * split.R_s) < 1e-9);
    for (int j = 1; j < J; ++j)
      CHECK(std::abs((sizes(j) - sizes(0)) - (n - 1) * std::log2(gc.gains(j) / gc.gains(0))) < 1e-9);
  }
}

TEST_CASE("fixed-rate subcodebook sizes") {
  const int n = 7;
  const auto gc = gain_codebook(4, n);
  for (double R : {0.5, 1.5, 3.0}) {
    const auto sizes = log2_sizes_fixed_rate(R, gc);
    double total = 0.0;
    for (auto v : sizes) total += std::exp2(v);
    CHECK(rel(total, std::exp2(n * R)) < 1e-9);
    for (int j = 1; j < 4; ++j) {
      const double want = (n - 1.0) / (n + 1.0) *
                          std::log2(gc.probs(j) * gc.gains(j) * gc.gains(j) / (gc.probs(0) * gc.gains(0) * gc.gains(0)));
      CHECK(std::abs((sizes(j) - sizes(0)) - want) < 1e-9);
    }
  }
  CHECK(std::abs(log2_sizes_fixed_rate(2.0, gain_codebook(1, n))(0) - 2.0 * n) < 1e-12);
  GainCodebook flat;
  flat.n = n;
  flat.gains = Eigen::VectorXd::Constant(4, 2.0);
  flat.probs = Eigen::VectorXd::Constant(4, 0.25);
  const auto eq = log2_sizes_fixed_rate(1.0, flat);
  for (auto v : eq) CHECK(std::abs(v - (n - 2.0)) < 1e-12);
  CHECK_THROWS_AS(log2_sizes_fixed_rate(0.0, flat), std::invalid_argument);
}

TEST_CASE("high-resolution shape distortion") {
  const int n = 25;
  const auto k = wsc_constants(n, kLeechLatticeG);
  const auto gc = gain_codebook(4, n);
  const double R = 2.0;
  const auto sizes = log2_sizes_fixed_rate(R, gc);
  const double ds = shape_distortion_highres(gc, sizes, k);
  const double e = (n - 1.0) / (n + 1.0);
  const double sum = (gc.probs.array() * gc.gains.array().square()).pow(e).sum();
  CHECK(rel(ds * std::exp2(2.0 * n * R / (n - 1.0)), k.C * std::pow(sum, 1.0 / e)) < 1e-9);
  const auto one = gain_codebook(1, n);
  CHECK(rel(shape_distortion_highres(one, Eigen::VectorXd::Zero(1), k), k.C * one.gains(0) * one.gains(0)) < 1e-14);
  const Eigen::VectorXd doubled = sizes.array() + 1.0;
  CHECK(rel(shape_distortion_highres(gc, doubled, k), ds * std::exp2(-2.0 / (n - 1.0))) < 1e-12);
}

TEST_CASE("SNR improvement") {
  CHECK(std::abs(snr_improvement_db(5) - 0.7405036778094455) < 1e-12);
  CHECK(std::abs(snr_improvement_db(50) - 0.08568910584862033) < 1e-12);
  CHECK(std::abs(snr_improvement_db(2) - 1.2534078906742612) < 1e-12);
  for (int n = 2; n <= 200; ++n) CHECK(snr_improvement_db(n) > 0.0);
  for (int n = 5; n < 50; ++n) CHECK(snr_improvement_db(n + 1) < snr_improvement_db(n));
  for (int n = 5; n <= 200; ++n) CHECK(snr_improvement_db(n) < 1.0);
  CHECK(snr_improvement_db(200) < 0.03);
  CHECK_THROWS_AS(snr_improvement_db(1), std::invalid_argument);
}

TEST_CASE("composition allocation") {
  auto one = [](double v) { return Eigen::VectorXd::Constant(1, v); };
  // (3,2,2) and (4,1,1,1) both give 210; fewer parts wins, then the smallest arrangement.
  CHECK(allocate_compositions(7, one(std::log2(210.0)), Variant::I, CompositionFilter::none)[0] == Composition{2, 2, 3});
  CHECK(allocate_compositions(7, one(0.0), Variant::I, CompositionFilter::none)[0] == Composition{7});
  CHECK(allocate_compositions(7, one(std::log2(5040.0)), Variant::I, CompositionFilter::none)[0] ==
        Composition{1, 1, 1, 1, 1, 1, 1});
  CHECK(allocate_compositions(7, one(std::log2(210.0) + 7.0), Variant::II, CompositionFilter::none)[0] ==
        Composition{2, 2, 3});
  CHECK(allocate_compositions(7, one(std::log2(210.0)), Variant::I, CompositionFilter::variant1_unimodal)[0] ==
        Composition{2, 3, 2});

  // brute force over every ordered composition
  oracle::Rng rng(31);
  std::uniform_real_distribution<double> u(0.0, std::log2(40320.0));
  for (auto filter : {CompositionFilter::none, CompositionFilter::variant2_monotone, CompositionFilter::variant1_unimodal}) {
    const auto all = enumerate_compositions(8, filter);
    Eigen::VectorXd targets(40);
    for (auto& t : targets) t = u(rng);
    const auto got = allocate_compositions(8, targets, Variant::I, filter);
    for (Eigen::Index j = 0; j < targets.size(); ++j) {
      const Composition* best = nullptr;
      double best_err = 0.0;
      for (const auto& c : all) {
        const double err = std::abs(log2_exact(multinomial_size(c)) - targets(j));
        if (!best || err < best_err || (err == best_err && (c.size() < best->size() ||
                                                            (c.size() == best->size() && c.parts() < best->parts())))) {
          best = &c;
          best_err = err;
        }
      }
      CHECK(got[static_cast<std::size_t>(j)] == *best);
    }
  }
}

TEST_CASE("wsc design end to end") {
  WscOptions opt;
  opt.G = kScalarLatticeG;
  opt.design.J = 3;
  opt.design.sample_count = 20'000;
  opt.design.seed = 9;
  opt.eval_samples = 20'000;
  const auto table = cached_order_stats(7);
  const auto fixed = design_wsc(WscMode::fixed_rate, 7, 1.5, opt, *table);
  CHECK(fixed.code.size() == 3);
  CHECK(fixed.report.allocated.size() == 3);
  CHECK(fixed.report.achieved_rate > 0.5);
  CHECK(fixed.report.empirical_distortion < 1.0);
  const auto doc = to_json(fixed.report);
  CHECK(doc.contains("chosen_compositions"));
  CHECK(doc["inputs"]["mode"] == "wsc-fixed");

  opt.design.J = 2;
  const auto var = design_wsc(WscMode::variable_rate, 7, 2.0, opt, *table);
  CHECK(var.report.split.has_value());
  CHECK(var.report.probabilities.sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(design_wsc(WscMode::variable_rate, 7, 0.01, opt, *table), std::domain_error);
}
