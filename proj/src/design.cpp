#include "cpc/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "cpc/parallel.hpp"
#include "cpc/random.hpp"

namespace cpc {

void validate(const DesignConfig& cfg) {
  if (cfg.J < 1) throw std::invalid_argument("design needs J >= 1");
  if (cfg.sample_count < 1000) throw std::invalid_argument("design needs at least 1000 training samples");
  if (cfg.sample_count < static_cast<std::size_t>(cfg.J)) throw std::invalid_argument("fewer samples than spheres");
  if (!(cfg.lloyd_rel_tol > 0)) throw std::invalid_argument("lloyd_rel_tol must be positive");
  if (cfg.lloyd_max_iters < 1) throw std::invalid_argument("lloyd_max_iters must be >= 1");
  if (!(cfg.sigma > 0)) throw std::invalid_argument("sigma must be positive");
}

SortedSamples draw_sorted_samples(int n, std::size_t count, Variant variant, double sigma, std::uint64_t seed,
                                  int threads) {
  if (n < 1) throw std::invalid_argument("samples need n >= 1");
  SortedSamples s;
  s.variant = variant;
  s.sigma = sigma;
  s.seed = seed;
  s.data.resize(n, static_cast<Eigen::Index>(count));
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
    const auto first = static_cast<Eigen::Index>(b * kSampleBlock);
    const auto width = static_cast<Eigen::Index>(std::min(kSampleBlock, count - b * kSampleBlock));
    auto block = s.data.middleCols(first, width);
    fill_gaussian_block(block, seed, b, sigma);
    for (Eigen::Index col = 0; col < width; ++col) {
      double* v = block.col(col).data();
      if (variant == Variant::II)
        for (int i = 0; i < n; ++i) v[i] = std::abs(v[i]);
      std::sort(v, v + n, std::greater<>());
    }
  });
  return s;
}

InitialCodeword optimal_levels_single(const Composition& c, const OrderStatTable& table, Variant variant) {
  if (table.n != c.dimension()) throw std::invalid_argument("order-statistic table does not match composition");
  const Eigen::VectorXd& mean = variant == Variant::I ? table.mean_xi : table.mean_eta;
  Eigen::VectorXd levels(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (const auto& g : index_groups(c)) levels(i++) = mean.segment(g.first, g.size()).mean();
  for (Eigen::Index k = 1; k < levels.size(); ++k) {
    if (!(levels(k) < levels(k - 1))) {
      std::ostringstream msg;
      msg << "optimal levels for (" << c.to_string() << ") are not strictly decreasing at group " << k
          << " (" << levels(k - 1) << " vs " << levels(k) << "); order-statistic table is inaccurate";
      throw std::runtime_error(msg.str());
    }
  }
  return InitialCodeword(c, std::move(levels), variant);
}

double pc_distortion_exact(const InitialCodeword& cw, const OrderStatTable& table) {
  if (table.n != cw.dimension()) throw std::invalid_argument("order-statistic table does not match codeword");
  const bool magnitude = cw.variant() == Variant::II;
  const Eigen::VectorXd& mean = magnitude ? table.mean_eta : table.mean_xi;
  const Eigen::VectorXd& second = magnitude ? table.second_eta : table.second_xi;
  double total = 0.0;
  Eigen::Index i = 0;
  for (const auto& g : index_groups(cw.composition())) {
    const double mu = cw.levels()(i++);
    for (int l = g.first; l < g.last; ++l) total += second(l) - 2.0 * mu * mean(l) + mu * mu;
  }
  return total / cw.dimension();
}

namespace {

std::size_t block_count(Eigen::Index n) { return (static_cast<std::size_t>(n) + kSampleBlock - 1) / kSampleBlock; }

Eigen::Index block_first(std::size_t b) { return static_cast<Eigen::Index>(b * kSampleBlock); }

Eigen::Index block_width(std::size_t b, Eigen::Index total) {
  return std::min<Eigen::Index>(static_cast<Eigen::Index>(kSampleBlock), total - block_first(b));
}

// Squared error of a sorted vector against a level set, in sorted order.
double level_error(const double* v, const std::vector<IndexRange>& groups, const Eigen::VectorXd& levels) {
  double d = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double mu = levels(static_cast<Eigen::Index>(g));
    for (int l = groups[g].first; l < groups[g].last; ++l) {
      const double e = v[l] - mu;
      d += e * e;
    }
  }
  return d;
}

Eigen::VectorXd group_means(const double* v, const std::vector<IndexRange>& groups) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(groups.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double s = 0.0;
    for (int l = groups[g].first; l < groups[g].last; ++l) s += v[l];
    out(static_cast<Eigen::Index>(g)) = s / groups[g].size();
  }
  return out;
}

struct Assignment {
  Eigen::Index sphere;
  double assign_error;  // error in the space the centroids live in
  double sample_error;  // full squared error ||x - x_hat||^2
};

struct PassStats {
  Eigen::MatrixXd sums;  // rows of the clustered data x J
  std::vector<std::size_t> counts;
  double total = 0.0;
  double total_sq = 0.0;
  Eigen::VectorXd assign_error;  // per sample
};

// One nearest-neighbor pass. Blocks are merged in index order so the sums do not
// depend on the thread count.
PassStats assignment_pass(const Eigen::MatrixXd& data, Eigen::Index J, int threads,
                          const std::function<Assignment(Eigen::Index)>& nearest) {
  const Eigen::Index N = data.cols();
  const std::size_t blocks = block_count(N);
  std::vector<PassStats> partial(blocks);
  PassStats out;
  out.assign_error.resize(N);
  parallel_for(blocks, threads, [&](std::size_t b) {
    auto& p = partial[b];
    p.sums = Eigen::MatrixXd::Zero(data.rows(), J);
    p.counts.assign(static_cast<std::size_t>(J), 0);
    const Eigen::Index first = block_first(b);
    const Eigen::Index last = first + block_width(b, N);
    for (Eigen::Index col = first; col < last; ++col) {
      const Assignment a = nearest(col);
      p.sums.col(a.sphere) += data.col(col);
      ++p.counts[static_cast<std::size_t>(a.sphere)];
      p.total += a.sample_error;
      p.total_sq += a.sample_error * a.sample_error;
      out.assign_error(col) = a.assign_error;
    }
  });
  out.sums = Eigen::MatrixXd::Zero(data.rows(), J);
  out.counts.assign(static_cast<std::size_t>(J), 0);
  for (const auto& p : partial) {
    out.sums += p.sums;
    for (std::size_t j = 0; j < out.counts.size(); ++j) out.counts[j] += p.counts[j];
    out.total += p.total;
    out.total_sq += p.total_sq;
  }
  return out;
}

// Indices of the `k` largest errors, ties to the lower index.
std::vector<Eigen::Index> worst_samples(const Eigen::VectorXd& errors, std::size_t k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(errors.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return errors(a) > errors(b) || (errors(a) == errors(b) && a < b); });
  idx.resize(k);
  return idx;
}

std::vector<Eigen::Index> initial_sample_indices(std::uint64_t seed, Eigen::Index N, int J) {
  std::mt19937_64 engine(derive_seed(seed, "lloyd/init"));
  std::uniform_int_distribution<Eigen::Index> pick(0, N - 1);
  std::vector<Eigen::Index> chosen;
  while (static_cast<int>(chosen.size()) < J) {
    const Eigen::Index i = pick(engine);
    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  }
  return chosen;
}

// Hooks a Lloyd model exposes to the shared driver.
struct LloydModel {
  const Eigen::MatrixXd* data = nullptr;  // clustered coordinates
  Eigen::Index J = 0;
  int n = 0;
  std::function<Assignment(Eigen::Index)> nearest;
  std::function<void(const PassStats&)> update;  // centroid step for non-empty cells
  std::function<void(Eigen::Index sphere, Eigen::Index sample)> reseed;
  std::function<void()> after_pass;  // optional per-pass check
};

LloydReport run_lloyd(LloydModel& model, const DesignConfig& cfg) {
  const int threads = resolve_threads(cfg.threads);
  const Eigen::Index N = model.data->cols();
  const double scale = 1.0 / (static_cast<double>(N) * model.n);
  LloydReport report;
  report.samples = static_cast<std::size_t>(N);

  PassStats stats = assignment_pass(*model.data, model.J, threads, model.nearest);
  if (model.after_pass) model.after_pass();
  double distortion = stats.total * scale;
  report.distortion_history.push_back(distortion);

  for (int it = 1; it <= cfg.lloyd_max_iters; ++it) {
    model.update(stats);
    std::vector<Eigen::Index> empty;
    for (Eigen::Index j = 0; j < model.J; ++j)
      if (stats.counts[static_cast<std::size_t>(j)] == 0) empty.push_back(j);
    if (!empty.empty()) {
      report.empty_cell_events += static_cast<int>(empty.size());
      if (cfg.empty_cell_policy == EmptyCellPolicy::reseed_worst) {
        const auto worst = worst_samples(stats.assign_error, empty.size());
        for (std::size_t e = 0; e < empty.size() && e < worst.size(); ++e) {
          model.reseed(empty[e], worst[e]);
          report.notes.push_back("iteration " + std::to_string(it) + ": reseeded empty sphere " +
                                 std::to_string(empty[e]) + " at sample " + std::to_string(worst[e]));
        }
      } else {
        for (auto j : empty)
          report.notes.push_back("iteration " + std::to_string(it) + ": sphere " + std::to_string(j) + " is empty");
      }
    }
    PassStats next = assignment_pass(*model.data, model.J, threads, model.nearest);
    if (model.after_pass) model.after_pass();
    const double next_distortion = next.total * scale;
    if (next_distortion > distortion * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "Lloyd distortion increased at iteration " << it << ": " << distortion << " -> " << next_distortion;
      throw std::logic_error(msg.str());
    }
    report.distortion_history.push_back(next_distortion);
    report.iterations = it;
    const double improvement = (distortion - next_distortion) / distortion;
    stats = std::move(next);
    distortion = next_distortion;
    if (improvement < cfg.lloyd_rel_tol) {
      report.converged = true;
      break;
    }
  }

  report.distortion = distortion;
  const double mean = stats.total / static_cast<double>(N);
  const double var = std::max(0.0, stats.total_sq / static_cast<double>(N) - mean * mean);
  report.std_error = std::sqrt(var / static_cast<double>(N - 1)) / model.n;
  report.probabilities.resize(model.J);
  for (Eigen::Index j = 0; j < model.J; ++j)
    report.probabilities(j) = static_cast<double>(stats.counts[static_cast<std::size_t>(j)]) / static_cast<double>(N);
  for (Eigen::Index j = 0; j < model.J; ++j)
    if (stats.counts[static_cast<std::size_t>(j)] == 0)
      report.notes.push_back("sphere " + std::to_string(j) + " received no training samples");
  return report;
}

ConcentricCode assemble_code(const std::vector<Composition>& compositions, const std::vector<Eigen::VectorXd>& levels,
                             Variant variant, LloydReport& report) {
  std::vector<InitialCodeword> subcodes;
  for (std::size_t j = 0; j < compositions.size(); ++j) {
    bool merged = false;
    LevelSet fixed = repair_level_order(compositions[j], levels[j], merged);
    if (merged)
      report.notes.push_back("sphere " + std::to_string(j) + ": merged levels, composition (" +
                             compositions[j].to_string() + ") -> (" + fixed.composition.to_string() + ")");
    if (variant == Variant::II) fixed.levels = fixed.levels.cwiseMax(0.0);
    subcodes.emplace_back(std::move(fixed.composition), std::move(fixed.levels), variant);
  }
  return ConcentricCode(variant, std::move(subcodes));
}

void check_training(const SortedSamples& training, int n, const DesignConfig& cfg) {
  if (training.dimension() != n) throw std::invalid_argument("training samples do not match the dimension");
  if (training.variant != cfg.variant) throw std::invalid_argument("training samples do not match the variant");
  if (training.count() < cfg.J) throw std::invalid_argument("fewer training samples than spheres");
}

}  // namespace

Eigen::VectorXd per_sample_distortion(const SortedSamples& samples, const std::vector<LevelSet>& code, int threads) {
  if (code.empty()) throw std::invalid_argument("empty level-set list");
  std::vector<std::vector<IndexRange>> groups;
  for (const auto& ls : code) {
    if (ls.composition.dimension() != samples.dimension())
      throw std::invalid_argument("level set does not match sample dimension");
    if (static_cast<std::size_t>(ls.levels.size()) != ls.composition.size())
      throw std::invalid_argument("level count does not match composition");
    groups.push_back(index_groups(ls.composition));
  }
  const Eigen::Index N = samples.count();
  const double inv_n = 1.0 / samples.dimension();
  Eigen::VectorXd out(N);
  parallel_for(block_count(N), resolve_threads(threads), [&](std::size_t b) {
    const Eigen::Index first = block_first(b);
    const Eigen::Index last = first + block_width(b, N);
    for (Eigen::Index col = first; col < last; ++col) {
      const double* v = samples.data.col(col).data();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < code.size(); ++j) best = std::min(best, level_error(v, groups[j], code[j].levels));
      out(col) = best * inv_n;
    }
  });
  return out;
}

SampleStats sample_stats(const Eigen::Ref<const Eigen::VectorXd>& values) {
  SampleStats s;
  s.count = static_cast<std::size_t>(values.size());
  if (s.count == 0) return s;
  s.mean = values.mean();
  if (s.count > 1) {
    const double var = (values.array() - s.mean).square().sum() / static_cast<double>(s.count - 1);
    s.std_error = std::sqrt(var / static_cast<double>(s.count));
  }
  return s;
}

LevelSet repair_level_order(const Composition& c, const Eigen::Ref<const Eigen::VectorXd>& levels, bool& merged) {
  // Pool-adjacent-violators on (weight = n_i, value = mu_i).
  std::vector<int> parts;
  std::vector<double> values;
  merged = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    parts.push_back(c.part(i));
    values.push_back(levels(static_cast<Eigen::Index>(i)));
    while (values.size() > 1 && !(values.back() < values[values.size() - 2])) {
      const int w2 = parts.back();
      const double v2 = values.back();
      parts.pop_back();
      values.pop_back();
      values.back() = (parts.back() * values.back() + w2 * v2) / (parts.back() + w2);
      parts.back() += w2;
      merged = true;
    }
  }
  return {Composition(std::move(parts)), Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()))};
}

DesignResult design_common_composition(const Composition& c, const DesignConfig& cfg, const OrderStatTable& table) {
  validate(cfg);
  const auto training = draw_sorted_samples(c.dimension(), cfg.sample_count, cfg.variant, cfg.sigma,
                                            derive_seed(cfg.seed, "design/train"), cfg.threads);
  return design_common_composition(c, cfg, table, training);
}

DesignResult design_common_composition(const Composition& c, const DesignConfig& cfg, const OrderStatTable& table,
                                       const SortedSamples& training) {
  validate(cfg);
  const int n = c.dimension();
  if (table.n != n) throw std::invalid_argument("order-statistic table does not match composition");
  check_training(training, n, cfg);
  const auto K = static_cast<Eigen::Index>(c.size());
  const Eigen::Index J = cfg.J;
  const Eigen::Index N = training.count();
  const auto groups = index_groups(c);
  const Eigen::VectorXd root_parts = Eigen::Map<const Eigen::VectorXi>(c.parts().data(), K).cast<double>().cwiseSqrt();

  // Reduced coordinates and the part of the error no codebook can touch.
  const Eigen::MatrixXd projected = grouped_projection_matrix(c) * training.data;
  const Eigen::VectorXd residual_energy =
      training.data.colwise().squaredNorm().transpose() - projected.colwise().squaredNorm().transpose();

  Eigen::MatrixXd points(K, J);
  const auto init = initial_sample_indices(cfg.seed, N, cfg.J);
  for (Eigen::Index j = 0; j < J; ++j) points.col(j) = projected.col(init[static_cast<std::size_t>(j)]);

  const int threads = resolve_threads(cfg.threads);
  double max_residual = 0.0;

  LloydModel model;
  model.data = &projected;
  model.J = J;
  model.n = n;
  model.nearest = [&](Eigen::Index col) {
    Assignment best{0, std::numeric_limits<double>::infinity(), 0.0};
    for (Eigen::Index j = 0; j < J; ++j) {
      double d = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        const double e = projected(k, col) - points(k, j);
        d += e * e;
      }
      if (d < best.assign_error) best = {j, d, 0.0};
    }
    best.sample_error = best.assign_error + residual_energy(col);
    return best;
  };
  model.update = [&](const PassStats& s) {
    for (Eigen::Index j = 0; j < J; ++j)
      if (s.counts[static_cast<std::size_t>(j)] > 0)
        points.col(j) = s.sums.col(j) / static_cast<double>(s.counts[static_cast<std::size_t>(j)]);
  };
  model.reseed = [&](Eigen::Index j, Eigen::Index sample) { points.col(j) = projected.col(sample); };
  // Per-block check of  n D = mean min_j ||xi_bar - m_j||^2 + mean ||x||^2 - mean ||xi_bar||^2
  // against the direct sorted-domain error.
  model.after_pass = [&] {
    std::vector<Eigen::VectorXd> levels(static_cast<std::size_t>(J));
    for (Eigen::Index j = 0; j < J; ++j) levels[static_cast<std::size_t>(j)] = points.col(j).cwiseQuotient(root_parts);
    const std::size_t blocks = block_count(N);
    std::vector<double> residuals(blocks, 0.0);
    parallel_for(blocks, threads, [&](std::size_t b) {
      const Eigen::Index first = block_first(b);
      const Eigen::Index last = first + block_width(b, N);
      double direct = 0.0, reduced = 0.0, energy = 0.0, projected_energy = 0.0;
      for (Eigen::Index col = first; col < last; ++col) {
        const double* v = training.data.col(col).data();
        double best_direct = std::numeric_limits<double>::infinity();
        double best_reduced = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < J; ++j) {
          best_direct = std::min(best_direct, level_error(v, groups, levels[static_cast<std::size_t>(j)]));
          best_reduced = std::min(best_reduced, (projected.col(col) - points.col(j)).squaredNorm());
        }
        direct += best_direct;
        reduced += best_reduced;
        energy += training.data.col(col).squaredNorm();
        projected_energy += projected.col(col).squaredNorm();
      }
      const double decomposed = reduced + energy - projected_energy;
      residuals[b] = std::abs(direct - decomposed) / std::max(std::abs(direct), 1e-300);
    });
    for (double r : residuals) max_residual = std::max(max_residual, r);
  };

  LloydReport report = run_lloyd(model, cfg);
  report.max_decomposition_residual = max_residual;
  report.seed = training.seed;
  if (max_residual > 1e-9) {
    std::ostringstream msg;
    msg << "reduced-VQ decomposition identity violated: relative residual " << max_residual;
    throw std::logic_error(msg.str());
  }
  report.single_pc_distortion = pc_distortion_exact(optimal_levels_single(c, table, cfg.variant), table);

  std::vector<Eigen::VectorXd> levels(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) levels[static_cast<std::size_t>(j)] = points.col(j).cwiseQuotient(root_parts);
  std::vector<Composition> compositions(static_cast<std::size_t>(J), c);
  ConcentricCode code = assemble_code(compositions, levels, cfg.variant, report);
  return {std::move(code), std::move(report)};
}

DesignResult lloyd_general(const std::vector<Composition>& compositions, const DesignConfig& cfg,
                           const OrderStatTable& table, const std::optional<std::vector<Eigen::VectorXd>>& initial_levels) {
  validate(cfg);
  if (compositions.empty()) throw std::invalid_argument("lloyd_general needs at least one composition");
  const auto training = draw_sorted_samples(compositions.front().dimension(), cfg.sample_count, cfg.variant, cfg.sigma,
                                            derive_seed(cfg.seed, "design/train"), cfg.threads);
  return lloyd_general(compositions, cfg, table, training, initial_levels);
}

DesignResult lloyd_general(const std::vector<Composition>& compositions, const DesignConfig& cfg,
                           const OrderStatTable& table, const SortedSamples& training,
                           const std::optional<std::vector<Eigen::VectorXd>>& initial_levels) {
  validate(cfg);
  if (compositions.size() != static_cast<std::size_t>(cfg.J))
    throw std::invalid_argument("lloyd_general: " + std::to_string(compositions.size()) + " compositions for J=" +
                                std::to_string(cfg.J));
  const int n = compositions.front().dimension();
  for (const auto& c : compositions)
    if (c.dimension() != n) throw std::invalid_argument("lloyd_general: compositions disagree on n");
  if (table.n != n) throw std::invalid_argument("order-statistic table does not match compositions");
  check_training(training, n, cfg);

  const Eigen::Index J = cfg.J;
  const Eigen::Index N = training.count();
  std::vector<std::vector<IndexRange>> groups;
  for (const auto& c : compositions) groups.push_back(index_groups(c));

  std::vector<Eigen::VectorXd> levels(static_cast<std::size_t>(J));
  if (initial_levels) {
    if (initial_levels->size() != static_cast<std::size_t>(J))
      throw std::invalid_argument("lloyd_general: initial level count mismatch");
    for (std::size_t j = 0; j < levels.size(); ++j) {
      if (static_cast<std::size_t>((*initial_levels)[j].size()) != compositions[j].size())
        throw std::invalid_argument("lloyd_general: initial levels do not match composition " + std::to_string(j));
      levels[j] = (*initial_levels)[j];
    }
  } else {
    const auto init = initial_sample_indices(cfg.seed, N, cfg.J);
    for (std::size_t j = 0; j < levels.size(); ++j) levels[j] = group_means(training.data.col(init[j]).data(), groups[j]);
  }

  LloydModel model;
  model.data = &training.data;
  model.J = J;
  model.n = n;
  model.nearest = [&](Eigen::Index col) {
    const double* v = training.data.col(col).data();
    Assignment best{0, std::numeric_limits<double>::infinity(), 0.0};
    for (Eigen::Index j = 0; j < J; ++j) {
      const double d = level_error(v, groups[static_cast<std::size_t>(j)], levels[static_cast<std::size_t>(j)]);
      if (d < best.assign_error) best = {j, d, d};
    }
    return best;
  };
  model.update = [&](const PassStats& s) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const auto count = s.counts[static_cast<std::size_t>(j)];
      if (count == 0) continue;
      const auto& g = groups[static_cast<std::size_t>(j)];
      auto& mu = levels[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < g.size(); ++i)
        mu(static_cast<Eigen::Index>(i)) =
            s.sums.col(j).segment(g[i].first, g[i].size()).sum() / (static_cast<double>(count) * g[i].size());
    }
  };
  model.reseed = [&](Eigen::Index j, Eigen::Index sample) {
    levels[static_cast<std::size_t>(j)] = group_means(training.data.col(sample).data(), groups[static_cast<std::size_t>(j)]);
  };

  LloydReport report = run_lloyd(model, cfg);
  report.seed = training.seed;
  if (J == 1) report.single_pc_distortion = pc_distortion_exact(optimal_levels_single(compositions.front(), table, cfg.variant), table);
  ConcentricCode code = assemble_code(compositions, levels, cfg.variant, report);
  return {std::move(code), std::move(report)};
}

Composition swap_composition(const Composition& c, std::size_t m) {
  if (m + 1 >= c.size())
    throw std::out_of_range("swap index " + std::to_string(m) + " out of range for " + std::to_string(c.size()) + " parts");
  auto parts = c.parts();
  std::swap(parts[m], parts[m + 1]);
  return Composition(std::move(parts));
}

ZetaStats zeta_statistics(const SortedSamples& magnitudes, const Composition& c, std::size_t m) {
  if (m + 1 >= c.size()) throw std::out_of_range("zeta: swap index out of range");
  const int q = c.part(m);
  const int r = c.part(m + 1);
  if (q <= r) throw std::invalid_argument("zeta needs n_m > n_{m+1}");
  if (magnitudes.dimension() != c.dimension()) throw std::invalid_argument("zeta: dimension mismatch");
  int L = 0;
  for (std::size_t i = 0; i < m; ++i) L += c.part(i);
  ZetaStats z;
  z.samples = static_cast<std::size_t>(magnitudes.count());
  double plus = 0.0, minus = 0.0, total = 0.0;
  for (Eigen::Index col = 0; col < magnitudes.count(); ++col) {
    const auto v = magnitudes.data.col(col);
    const double zeta = v.segment(L, r).sum() / r - 2.0 * v.segment(L + r, q - r).sum() / (q - r) +
                        v.segment(L + q, r).sum() / r;
    total += zeta;
    if (zeta >= 0.0)
      plus += zeta;
    else
      minus -= zeta;
  }
  const double N = static_cast<double>(magnitudes.count());
  z.plus = plus / N;
  z.minus = minus / N;
  z.mean = total / N;
  return z;
}

double gap_ratio(const std::vector<Eigen::VectorXd>& levels, std::size_t m) {
  if (levels.empty()) throw std::invalid_argument("gap_ratio: no level sets");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& mu : levels) {
    const auto i = static_cast<Eigen::Index>(m);
    if (i + 1 >= mu.size()) throw std::out_of_range("gap_ratio: swap index out of range");
    const double gap = mu(i) - mu(i + 1);
    lo = std::min(lo, gap);
    hi = std::max(hi, gap);
  }
  return lo / hi;
}

SwapReport swap_improvement_test(const Composition& c, std::size_t m, const std::vector<Eigen::VectorXd>& levels,
                                 const DesignConfig& cfg, const OrderStatTable& table) {
  if (cfg.variant != Variant::II) throw std::invalid_argument("swap test applies to Variant II codes");
  if (m + 1 >= c.size()) throw std::out_of_range("swap index out of range");
  if (levels.empty()) throw std::invalid_argument("swap test needs at least one level set");
  if (table.n != c.dimension()) throw std::invalid_argument("order-statistic table does not match composition");
  const int q = c.part(m);
  const int r = c.part(m + 1);
  if (q < r) throw std::invalid_argument("swap test needs n_m >= n_{m+1}");
  for (const auto& mu : levels) InitialCodeword(c, mu, Variant::II);  // validates ordering and sign

  SwapReport report;
  report.swapped = swap_composition(c, m);
  for (const auto& mu : levels) report.swapped_levels.push_back(swapped_levels<double>(mu, c, m));
  report.convex = is_convex_sequence(table.mean_eta, 1e-12);
  report.gap_ratio = gap_ratio(levels, m);

  const auto samples = draw_sorted_samples(c.dimension(), cfg.sample_count, Variant::II, cfg.sigma,
                                           derive_seed(cfg.seed, "swap/samples"), cfg.threads);
  if (q == r) {
    report.constraint_satisfied = true;
  } else {
    report.zeta = zeta_statistics(samples, c, m);
    report.constraint_satisfied = report.zeta.plus > 0.0 && report.gap_ratio >= report.zeta.minus / report.zeta.plus;
  }
  if (!report.convex) {
    report.skipped = true;
    report.reason = "mean magnitude order statistics are not convex";
    return report;
  }
  if (!report.constraint_satisfied) {
    std::ostringstream msg;
    msg << "gap ratio " << report.gap_ratio << " below zeta_minus/zeta_plus = " << report.zeta.minus / report.zeta.plus;
    report.skipped = true;
    report.reason = msg.str();
    return report;
  }

  std::vector<LevelSet> before, after;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    before.push_back({c, levels[j]});
    after.push_back({report.swapped, report.swapped_levels[j]});
  }
  const Eigen::VectorXd d_before = per_sample_distortion(samples, before, cfg.threads);
  const Eigen::VectorXd d_after = per_sample_distortion(samples, after, cfg.threads);
  const auto s_before = sample_stats(d_before);
  const auto s_after = sample_stats(d_after);
  const auto s_diff = sample_stats(d_before - d_after);
  report.d_before = s_before.mean;
  report.d_after = s_after.mean;
  report.std_error_before = s_before.std_error;
  report.std_error_after = s_after.std_error;
  report.std_error_difference = s_diff.std_error;
  return report;
}

}  // namespace cpc
