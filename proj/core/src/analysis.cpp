#include "fexprobe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fexprobe/error.hpp"
#include "fexprobe/parallel.hpp"

namespace fexprobe {
namespace {

constexpr std::size_t kFeatureBlock = 16;

void check_layers_match(const KSMatrix& ks, const LayerTable& layers) {
  if (layers.total_features() != ks.n_features()) {
    throw Error(ErrorCode::AlignmentError, "layer table does not cover the KS matrix features");
  }
}

// Per-worker buffers for one column at a time.
struct SweepScratch {
  std::vector<std::uint32_t> bin_of_row;
  std::vector<std::uint32_t> class_bins;  // n_classes x bins
  std::vector<std::uint32_t> outer;
  std::vector<std::uint32_t> total;
};

void sweep_column(std::span<const double> column, std::span<const std::uint32_t> assignment,
                  std::size_t n_classes, std::size_t bins, SweepScratch& scratch,
                  std::span<float> out_row) {
  const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) {
    std::fill(out_row.begin(), out_row.end(), 0.0f);
    return;
  }
  scratch.class_bins.assign(n_classes * bins, 0);
  for (std::size_t i = 0; i < column.size(); ++i) {
    const auto k = stats::bin_index(column[i], lo, hi, bins);
    ++scratch.class_bins[assignment[i] * bins + k];
  }
  auto& outer = scratch.outer;
  auto& total = scratch.total;
  total.assign(bins, 0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t k = 0; k < bins; ++k) total[k] += scratch.class_bins[c * bins + k];
  }
  outer.resize(bins);
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::span<const std::uint32_t> inner(scratch.class_bins.data() + c * bins, bins);
    for (std::size_t k = 0; k < bins; ++k) outer[k] = total[k] - inner[k];
    out_row[c] = static_cast<float>(stats::signed_ks_from_counts(inner, outer));
  }
}

SideSummary summarize_magnitudes(std::vector<double> mags, const ModalityOptions& options) {
  SideSummary s;
  if (mags.empty()) return s;
  s.present = true;
  const std::size_t half_bins = std::max<std::size_t>(1, options.mode_bins / 2);
  std::vector<std::size_t> hist(half_bins, 0);
  for (double m : mags) ++hist[stats::bin_index(m, 0.0, 1.0, half_bins)];
  const auto mode_bin = static_cast<std::size_t>(
      std::distance(hist.begin(), std::max_element(hist.begin(), hist.end())));
  double sum = 0.0;
  for (double m : mags) {
    if (stats::bin_index(m, 0.0, 1.0, half_bins) == mode_bin) sum += m;
  }
  s.mode = sum / static_cast<double>(hist[mode_bin]);

  std::sort(mags.begin(), mags.end());
  const auto below_end = std::lower_bound(mags.begin(), mags.end(), s.mode);
  const auto above_begin = std::upper_bound(mags.begin(), mags.end(), s.mode);
  const auto n_below = static_cast<std::size_t>(below_end - mags.begin());
  const auto n_above = static_cast<std::size_t>(mags.end() - above_begin);
  const auto enclose = [&](std::size_t n) { return (options.mass_percent * n + 99) / 100; };
  s.lower = n_below == 0 ? s.mode : *(below_end - static_cast<std::ptrdiff_t>(enclose(n_below)));
  s.upper = n_above == 0 ? s.mode : *(above_begin + static_cast<std::ptrdiff_t>(enclose(n_above) - 1));
  return s;
}

}  // namespace

std::string_view to_string(Side side) noexcept {
  return side == Side::Positive ? "positive" : "negative";
}

KSMatrix ks_sweep(const EmbeddingMatrix& embedding, const LabelTable& labels,
                  const SweepOptions& options) {
  if (labels.n_rows() != embedding.n_images()) {
    throw Error(ErrorCode::AlignmentError,
                "labels have " + std::to_string(labels.n_rows()) + " rows, embedding has " +
                    std::to_string(embedding.n_images()) + " images");
  }
  if (labels.n_classes() < 2) {
    throw Error(ErrorCode::DegenerateTask, "at least two classes are required");
  }
  for (std::size_t c = 0; c < labels.n_classes(); ++c) {
    if (labels.counts()[c] < options.min_class_size) {
      throw Error(ErrorCode::DegenerateTask,
                  "class " + std::to_string(labels.classes()[c].id) + " has " +
                      std::to_string(labels.counts()[c]) + " images (minimum " +
                      std::to_string(options.min_class_size) + ")");
    }
  }
  if (options.bins == 0) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");

  const std::size_t n_features = embedding.n_features();
  const std::size_t n_images = embedding.n_images();
  const std::size_t n_classes = labels.n_classes();
  KSMatrix ks(n_features, n_classes);
  const auto data = embedding.data();
  const auto assignment = labels.assignment();

  const std::size_t n_blocks = (n_features + kFeatureBlock - 1) / kFeatureBlock;
  parallel_for(n_blocks, options.threads, [&](std::size_t block) {
    const std::size_t f0 = block * kFeatureBlock;
    const std::size_t width = std::min(kFeatureBlock, n_features - f0);
    std::vector<double> columns(width * n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
      const float* row = data.data() + i * n_features + f0;
      for (std::size_t j = 0; j < width; ++j) columns[j * n_images + i] = row[j];
    }
    SweepScratch scratch;
    for (std::size_t j = 0; j < width; ++j) {
      std::span<const double> column(columns.data() + j * n_images, n_images);
      sweep_column(column, assignment, n_classes, options.bins, scratch, ks.feature_row(f0 + j));
    }
  });
  return ks;
}

std::vector<ModalitySummary> layer_modality_summary(const KSMatrix& ks, const LayerTable& layers,
                                                    const ModalityOptions& options) {
  if (ks.n_features() == 0 || ks.n_classes() == 0) {
    throw Error(ErrorCode::InvalidArgument, "KS matrix is empty");
  }
  check_layers_match(ks, layers);
  std::vector<ModalitySummary> out;
  for (const auto& layer : layers) {
    ModalitySummary m;
    m.layer = layer.name;
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t f = layer.offset; f < layer.offset + layer.feature_count; ++f) {
      for (float v : ks.feature_row(f)) {
        if (v > 0.0f) {
          pos.push_back(v);
        } else if (v < 0.0f) {
          neg.push_back(-static_cast<double>(v));
        } else {
          ++m.n_zero;
        }
      }
    }
    m.n_positive = pos.size();
    m.n_negative = neg.size();
    m.positive = summarize_magnitudes(std::move(pos), options);
    // The negative side is summarized on magnitudes and mirrored back, so
    // entries symmetric around 0 give mirrored summaries exactly.
    const SideSummary mag = summarize_magnitudes(std::move(neg), options);
    m.negative = {mag.present, -mag.mode, -mag.upper, -mag.lower};
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<KsHistogramBin> ks_histogram(const KSMatrix& ks, const LayerTable& layers,
                                         const std::vector<std::size_t>& layer_subset,
                                         std::size_t bins) {
  check_layers_match(ks, layers);
  if (layer_subset.empty()) throw Error(ErrorCode::InvalidSelection, "no layers selected");
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");
  std::vector<std::size_t> counts(bins, 0);
  std::size_t total = 0;
  for (auto li : layer_subset) {
    if (li >= layers.size()) throw Error(ErrorCode::InvalidSelection, "layer index out of range");
    const auto& layer = layers[li];
    for (std::size_t f = layer.offset; f < layer.offset + layer.feature_count; ++f) {
      for (float v : ks.feature_row(f)) {
        ++counts[stats::bin_index(v, -1.0, 1.0, bins)];
        ++total;
      }
    }
  }
  std::vector<KsHistogramBin> out(bins);
  const double width = 2.0 / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out[k].lo = -1.0 + width * static_cast<double>(k);
    out[k].hi = k + 1 == bins ? 1.0 : -1.0 + width * static_cast<double>(k + 1);
    out[k].percent = total == 0 ? 0.0 : 100.0 * static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return out;
}

std::vector<double> unit_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw Error(ErrorCode::InvalidArgument, "grid step must be in (0, 1]");
  const double inv = 1.0 / step;
  const double n_real = std::round(inv);
  if (std::abs(n_real - inv) > 1e-9 * inv) {
    throw Error(ErrorCode::InvalidArgument, "grid step must divide 1 evenly");
  }
  const auto n = static_cast<std::size_t>(n_real);
  std::vector<double> grid(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    grid[k] = static_cast<double>(k) / n_real;
  }
  return grid;
}

AccumulatedCurve accumulated_curve(const KSMatrix& ks, std::size_t class_index, Side side,
                                   double grid_step) {
  if (class_index >= ks.n_classes()) {
    throw Error(ErrorCode::UnknownClass, "class index " + std::to_string(class_index) + " out of range");
  }
  AccumulatedCurve curve;
  curve.class_index = class_index;
  curve.side = side;
  curve.x = unit_grid(grid_step);

  std::vector<double> values;
  values.reserve(ks.n_features());
  for (std::size_t f = 0; f < ks.n_features(); ++f) {
    const double v = ks.at(f, class_index);
    values.push_back(side == Side::Positive ? v : -v);
  }
  std::sort(values.begin(), values.end());
  curve.counts.reserve(curve.x.size());
  for (double x : curve.x) {
    const auto it = std::upper_bound(values.begin(), values.end(), x);
    curve.counts.push_back(static_cast<std::size_t>(values.end() - it));
  }
  return curve;
}

std::vector<PairEntry> top_pairs(const KSMatrix& ks, const LayerTable& layers, std::size_t k,
                                 Side side, const PairFilter& filter) {
  check_layers_match(ks, layers);
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (filter.class_index && *filter.class_index >= ks.n_classes()) {
    throw Error(ErrorCode::UnknownClass, "class index out of range");
  }

  std::vector<std::size_t> feature_layers;
  if (filter.layers.empty()) {
    for (std::size_t i = 0; i < layers.size(); ++i) feature_layers.push_back(i);
  } else {
    feature_layers = filter.layers;
    std::sort(feature_layers.begin(), feature_layers.end());
    feature_layers.erase(std::unique(feature_layers.begin(), feature_layers.end()), feature_layers.end());
    if (feature_layers.back() >= layers.size()) {
      throw Error(ErrorCode::InvalidSelection, "layer index out of range");
    }
  }

  struct Cell {
    std::size_t feature;
    std::size_t cls;
    float value;
  };
  std::vector<Cell> cells;
  for (auto li : feature_layers) {
    const auto& layer = layers[li];
    for (std::size_t f = layer.offset; f < layer.offset + layer.feature_count; ++f) {
      if (filter.class_index) {
        cells.push_back({f, *filter.class_index, ks.at(f, *filter.class_index)});
      } else {
        for (std::size_t c = 0; c < ks.n_classes(); ++c) cells.push_back({f, c, ks.at(f, c)});
      }
    }
  }
  const auto before = [side](const Cell& a, const Cell& b) {
    if (a.value != b.value) return side == Side::Positive ? a.value > b.value : a.value < b.value;
    if (a.feature != b.feature) return a.feature < b.feature;
    return a.cls < b.cls;
  };
  const std::size_t n = std::min(k, cells.size());
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n), cells.end(), before);

  std::vector<PairEntry> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = cells[i];
    out.push_back({c.feature, layers[layers.layer_of(c.feature)].name, c.cls, c.value});
  }
  return out;
}

}  // namespace fexprobe
