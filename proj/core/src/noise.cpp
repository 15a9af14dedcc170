#include "fexprobe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fexprobe/error.hpp"
#include "fexprobe/random.hpp"

namespace fexprobe {
namespace {

// Per-class counts beyond each grid point, as running sums over classes.
struct CountMoments {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t n_classes = 0;

  explicit CountMoments(std::size_t n) : sum(n, 0.0), sum_sq(n, 0.0) {}

  void add(const KSMatrix& ks, Side side, const std::vector<double>& grid) {
    std::vector<double> column(ks.n_features());
    for (std::size_t c = 0; c < ks.n_classes(); ++c) {
      for (std::size_t f = 0; f < ks.n_features(); ++f) column[f] = ks.at(f, c);
      std::sort(column.begin(), column.end());
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::size_t count = 0;
        if (side == Side::Positive) {
          count = static_cast<std::size_t>(column.end() -
                                           std::upper_bound(column.begin(), column.end(), grid[k]));
        } else {
          count = static_cast<std::size_t>(std::lower_bound(column.begin(), column.end(), grid[k]) -
                                           column.begin());
        }
        const auto cd = static_cast<double>(count);
        sum[k] += cd;
        sum_sq[k] += cd * cd;
      }
    }
    n_classes += ks.n_classes();
  }

  double mean(std::size_t k) const { return sum[k] / static_cast<double>(n_classes); }
  double variance(std::size_t k) const {
    const double m = mean(k);
    return std::max(0.0, sum_sq[k] / static_cast<double>(n_classes) - m * m);
  }
};

}  // namespace

LabelTable randomize_labels(const LabelTable& labels, std::uint64_t seed) {
  std::vector<std::uint32_t> a(labels.assignment().begin(), labels.assignment().end());
  std::mt19937_64 gen(seed);
  for (std::size_t i = a.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(a[i - 1], a[j]);
  }
  return labels.with_assignment(std::move(a));
}

std::uint64_t randomization_seed(std::uint64_t seed, std::size_t repeat) noexcept {
  return derive_seed(seed, repeat);
}

AvgDistanceCurve avg_distance_curve(const KSMatrix& real, std::span<const KSMatrix> randomized,
                                    Side side, double grid_step) {
  if (randomized.empty()) throw Error(ErrorCode::InvalidArgument, "no randomized KS matrices");
  for (const auto& r : randomized) {
    if (r.n_features() != real.n_features()) {
      throw Error(ErrorCode::AlignmentError, "randomized KS matrix has a different feature count");
    }
    if (r.n_classes() != real.n_classes()) {
      throw Error(ErrorCode::AlignmentError, "randomized KS matrix has a different class count");
    }
  }
  if (real.n_classes() == 0) throw Error(ErrorCode::InvalidArgument, "KS matrix has no classes");

  AvgDistanceCurve curve;
  curve.side = side;
  const auto unit = unit_grid(grid_step);
  if (side == Side::Positive) {
    curve.x = unit;
  } else {
    curve.x.resize(unit.size());
    for (std::size_t k = 0; k < unit.size(); ++k) curve.x[k] = -unit[unit.size() - 1 - k];
  }

  CountMoments real_counts(curve.x.size());
  real_counts.add(real, side, curve.x);
  CountMoments rand_counts(curve.x.size());
  for (const auto& r : randomized) rand_counts.add(r, side, curve.x);

  curve.d_avg.resize(curve.x.size());
  curve.noise_sigma.resize(curve.x.size());
  for (std::size_t k = 0; k < curve.x.size(); ++k) {
    curve.d_avg[k] = real_counts.mean(k) - rand_counts.mean(k);
    curve.noise_sigma[k] =
        std::sqrt(real_counts.variance(k) / static_cast<double>(real_counts.n_classes) +
                  rand_counts.variance(k) / static_cast<double>(rand_counts.n_classes));
  }
  return curve;
}

ThresholdReport find_thresholds(const AvgDistanceCurve& positive, const AvgDistanceCurve& negative) {
  if (positive.d_avg.empty() || negative.d_avg.empty()) {
    throw Error(ErrorCode::InvalidArgument, "threshold curves must be non-empty");
  }
  ThresholdReport r;
  // Positive grid ascends away from 0: first maximum.
  const auto pos_it = std::max_element(positive.d_avg.begin(), positive.d_avg.end());
  const auto pi = static_cast<std::size_t>(pos_it - positive.d_avg.begin());
  r.t_plus = positive.x[pi];
  r.d_avg_at_t_plus = *pos_it;
  // Negative grid ascends toward 0: last maximum.
  std::size_t ni = 0;
  for (std::size_t k = 1; k < negative.d_avg.size(); ++k) {
    if (negative.d_avg[k] >= negative.d_avg[ni]) ni = k;
  }
  r.t_minus = negative.x[ni];
  r.d_avg_at_t_minus = negative.d_avg[ni];
  return r;
}

PruneResult prune(const KSMatrix& ks, double t_plus, double t_minus, const LayerTable& layers) {
  if (!(t_plus >= 0.0) || !(t_minus <= 0.0)) {
    throw Error(ErrorCode::InvalidThresholds, "thresholds must satisfy t_plus >= 0 >= t_minus");
  }
  if (layers.total_features() != ks.n_features()) {
    throw Error(ErrorCode::AlignmentError, "layer table does not cover the KS matrix features");
  }
  PruneResult out;
  out.per_class.resize(ks.n_classes());
  for (const auto& layer : layers) {
    LayerRetention lr;
    lr.layer = layer.name;
    lr.total_pairs = layer.feature_count * ks.n_classes();
    for (std::size_t f = layer.offset; f < layer.offset + layer.feature_count; ++f) {
      const auto row = ks.feature_row(f);
      for (std::size_t c = 0; c < row.size(); ++c) {
        const double v = row[c];
        int sign = 0;
        if (v >= t_plus) {
          sign = 1;
        } else if (v <= t_minus) {
          sign = -1;
        }
        if (sign != 0) {
          ++lr.kept;
          out.per_class[c].push_back({f, sign, row[c]});
        }
      }
    }
    lr.kept_pct = lr.total_pairs == 0
                      ? 0.0
                      : 100.0 * static_cast<double>(lr.kept) / static_cast<double>(lr.total_pairs);
    out.kept += lr.kept;
    out.total_pairs += lr.total_pairs;
    out.layers.push_back(std::move(lr));
  }
  return out;
}

ThresholdAnalysis analyze_thresholds(const KSMatrix& real, std::span<const KSMatrix> randomized,
                                     const LayerTable& layers, double grid_step) {
  ThresholdAnalysis a;
  a.curve_positive = avg_distance_curve(real, randomized, Side::Positive, grid_step);
  a.curve_negative = avg_distance_curve(real, randomized, Side::Negative, grid_step);
  a.thresholds = find_thresholds(a.curve_positive, a.curve_negative);

  auto within_noise = [](const AvgDistanceCurve& c) {
    for (std::size_t k = 0; k < c.x.size(); ++k) {
      if (c.d_avg[k] > 3.0 * c.noise_sigma[k]) return false;
    }
    return true;
  };
  a.no_signal = within_noise(a.curve_positive) && within_noise(a.curve_negative);

  const auto& t = a.thresholds;
  auto real_prune = prune(real, t.t_plus, t.t_minus, layers);
  std::vector<double> rand_pct(layers.size(), 0.0);
  for (const auto& r : randomized) {
    const auto rp = prune(r, t.t_plus, t.t_minus, layers);
    for (std::size_t i = 0; i < layers.size(); ++i) rand_pct[i] += rp.layers[i].kept_pct;
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& lr = real_prune.layers[i];
    a.prune.layers.push_back({lr.layer, lr.total_pairs, lr.kept, lr.kept_pct,
                              rand_pct[i] / static_cast<double>(randomized.size())});
  }
  a.prune.retained = std::move(real_prune.per_class);
  return a;
}

PipelineResult threshold_pipeline(const EmbeddingMatrix& embedding, const LabelTable& labels,
                                  const PipelineOptions& options) {
  if (options.repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be at least 1");
  PipelineResult result;
  result.ks_real = ks_sweep(embedding, labels, options.sweep);
  for (std::size_t r = 0; r < options.repeats; ++r) {
    auto shuffled = randomize_labels(labels, randomization_seed(options.seed, r));
    result.ks_randomized.push_back(ks_sweep(embedding, shuffled, options.sweep));
    result.randomized_labels.push_back(std::move(shuffled));
  }
  result.analysis = analyze_thresholds(result.ks_real, result.ks_randomized, embedding.layers(),
                                       options.grid_step);
  return result;
}

}  // namespace fexprobe
