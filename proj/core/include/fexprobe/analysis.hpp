#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fexprobe/embedding.hpp"
#include "fexprobe/ks_matrix.hpp"
#include "fexprobe/labels.hpp"
#include "fexprobe/layers.hpp"
#include "fexprobe/stats.hpp"

namespace fexprobe {

enum class Side { Positive, Negative };

std::string_view to_string(Side side) noexcept;

struct SweepOptions {
  std::size_t bins = stats::kDefaultBins;
  std::size_t min_class_size = 2;
  std::size_t threads = 0;  // 0: default_thread_count()
};

/// Signed KS of every feature for every class (inner = I_c, outer = the
/// rest). Columns are processed in parallel; the result does not depend on
/// the worker count. Throws AlignmentError / DegenerateTask.
KSMatrix ks_sweep(const EmbeddingMatrix& embedding, const LabelTable& labels,
                  const SweepOptions& options = {});

struct SideSummary {
  bool present = false;
  double mode = 0.0;
  double lower = 0.0;  // bar below the mode
  double upper = 0.0;  // bar above the mode
};

struct ModalitySummary {
  std::string layer;
  SideSummary positive;
  SideSummary negative;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_zero = 0;
};

struct ModalityOptions {
  /// Histogram bins across [-1, 1] used to locate each side's mode.
  std::size_t mode_bins = 200;
  /// Share of each flank's mass enclosed between the mode and its bar.
  unsigned mass_percent = 68;
};

/// Per layer: mode and 68% bars of the positive and negative entries. Zero
/// entries are counted separately and belong to neither side.
std::vector<ModalitySummary> layer_modality_summary(const KSMatrix& ks, const LayerTable& layers,
                                                    const ModalityOptions& options = {});

struct KsHistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  double percent = 0.0;
};

/// Histogram over [-1, 1] of all entries of the selected layers (by index),
/// as percentages of the selected feature/class pairs.
std::vector<KsHistogramBin> ks_histogram(const KSMatrix& ks, const LayerTable& layers,
                                         const std::vector<std::size_t>& layer_subset,
                                         std::size_t bins);

struct AccumulatedCurve {
  std::size_t class_index = 0;
  Side side = Side::Positive;
  std::vector<double> x;             // 0, step, ..., 1
  std::vector<std::size_t> counts;   // #{f : D > x} or #{f : D < -x}
};

/// Grid k/n over [0, 1] with n = round(1/step); throws InvalidArgument
/// unless 1/step is an integer (within 1e-9).
std::vector<double> unit_grid(double step);

AccumulatedCurve accumulated_curve(const KSMatrix& ks, std::size_t class_index, Side side,
                                   double grid_step = 0.01);

struct PairEntry {
  std::size_t feature = 0;
  std::string layer;
  std::size_t class_index = 0;
  float value = 0.0f;
};

struct PairFilter {
  std::vector<std::size_t> layers;           // empty: all layers
  std::optional<std::size_t> class_index;    // unset: all classes
};

/// The k most extreme entries, descending for Positive and ascending for
/// Negative; ties by (feature, class).
std::vector<PairEntry> top_pairs(const KSMatrix& ks, const LayerTable& layers, std::size_t k,
                                 Side side, const PairFilter& filter = {});

}  // namespace fexprobe
