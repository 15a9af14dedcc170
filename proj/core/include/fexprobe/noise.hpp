#pragma once

// Randomized-label baselines and noise thresholds.
//
// The average distance at x compares the mean per-class number of features
// beyond x under the real labels against the same mean under shuffled
// labels:
//
//   d_avg(x) = sum_{c in C} #{f : D(f,c) > x} / |C|
//            - sum_{c' in C_rand} #{f : D(f,c') > x} / |C_rand|
//
// for x in [0, 1]. The negative side uses #{f : D(f,c) < x} for x in
// [-1, 0]. The thresholds t+ / t- maximize d_avg on each side; pairs with
// t- < D < t+ are pruned.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fexprobe/analysis.hpp"
#include "fexprobe/embedding.hpp"
#include "fexprobe/ks_matrix.hpp"
#include "fexprobe/labels.hpp"

namespace fexprobe {

/// Fisher-Yates shuffle of the row assignment driven by std::mt19937_64
/// seeded with `seed` (j drawn with uniform_below(gen, i + 1) for i = n-1
/// down to 1). Class cardinalities are preserved exactly.
LabelTable randomize_labels(const LabelTable& labels, std::uint64_t seed);

/// Seed of randomization `repeat` under a pipeline seed.
std::uint64_t randomization_seed(std::uint64_t seed, std::size_t repeat) noexcept;

struct AvgDistanceCurve {
  Side side = Side::Positive;
  std::vector<double> x;  // strictly increasing; [0, 1] or [-1, 0]
  std::vector<double> d_avg;
  /// sqrt(var_real / |C| + var_rand / |C_rand|) of the per-class counts at
  /// each x: the scale of d_avg fluctuations under exchangeable labels.
  std::vector<double> noise_sigma;
};

/// `randomized` holds one KS matrix per shuffle; their classes together
/// form C_rand. Throws AlignmentError on dimension mismatch.
AvgDistanceCurve avg_distance_curve(const KSMatrix& real, std::span<const KSMatrix> randomized,
                                    Side side, double grid_step = 0.001);

struct ThresholdReport {
  double t_plus = 0.0;
  double d_avg_at_t_plus = 0.0;
  double t_minus = 0.0;
  double d_avg_at_t_minus = 0.0;
};

/// Argmax of each curve; ties resolve to the x closest to 0.
ThresholdReport find_thresholds(const AvgDistanceCurve& positive, const AvgDistanceCurve& negative);

struct LayerRetention {
  std::string layer;
  std::size_t total_pairs = 0;
  std::size_t kept = 0;
  double kept_pct = 0.0;
};

struct RetainedFeature {
  std::size_t feature = 0;
  int sign = 0;  // +1 kept by t+, -1 kept by t-
  float value = 0.0f;

  bool operator==(const RetainedFeature&) const = default;
};

struct PruneResult {
  std::vector<LayerRetention> layers;
  std::vector<std::vector<RetainedFeature>> per_class;  // by dense class index
  std::size_t kept = 0;
  std::size_t total_pairs = 0;
};

/// Keeps (f, c) iff D >= t_plus or D <= t_minus. Throws InvalidThresholds
/// unless t_plus >= 0 >= t_minus.
PruneResult prune(const KSMatrix& ks, double t_plus, double t_minus, const LayerTable& layers);

struct LayerRetentionRow {
  std::string layer;
  std::size_t total_pairs = 0;
  std::size_t kept_real = 0;
  double kept_real_pct = 0.0;
  double kept_rand_pct = 0.0;  // mean over randomizations
};

struct PruneReport {
  std::vector<LayerRetentionRow> layers;
  std::vector<std::vector<RetainedFeature>> retained;  // real labels, by dense class index
};

struct ThresholdAnalysis {
  AvgDistanceCurve curve_positive;
  AvgDistanceCurve curve_negative;
  ThresholdReport thresholds;
  PruneReport prune;
  /// True when d_avg(x) <= 3 * noise_sigma(x) at every grid point of both
  /// sides, i.e. the real labels are indistinguishable from shuffled ones.
  bool no_signal = false;
};

/// Curves, thresholds and pruning from already computed KS matrices.
ThresholdAnalysis analyze_thresholds(const KSMatrix& real, std::span<const KSMatrix> randomized,
                                     const LayerTable& layers, double grid_step = 0.001);

struct PipelineOptions {
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  double grid_step = 0.001;
  SweepOptions sweep;
};

struct PipelineResult {
  KSMatrix ks_real;
  std::vector<LabelTable> randomized_labels;
  std::vector<KSMatrix> ks_randomized;
  ThresholdAnalysis analysis;
};

/// Sweeps the real labels and `repeats` shuffles, then runs
/// analyze_thresholds.
PipelineResult threshold_pipeline(const EmbeddingMatrix& embedding, const LabelTable& labels,
                                  const PipelineOptions& options = {});

}  // namespace fexprobe
