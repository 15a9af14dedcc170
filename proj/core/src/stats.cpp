#include "fexprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "fexprobe/error.hpp"

namespace fexprobe::stats {
namespace {

void check_sample(std::span<const double> sample) {
  if (sample.empty()) throw Error(ErrorCode::EmptySample, "sample is empty");
  for (double v : sample) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "sample contains a non-finite value");
    }
  }
}

void check_domain(double lo, double hi, std::size_t bins) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi) {
    throw Error(ErrorCode::InvalidDomain, "invalid binning domain: lo > hi");
  }
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");
}

void check_same_grid(const HistogramDensity& p, const HistogramDensity& q) {
  if (p.probs.size() != q.probs.size() || p.lo != q.lo || p.hi != q.hi || p.probs.empty()) {
    throw Error(ErrorCode::GridMismatch, "densities are defined over different bin grids");
  }
}

}  // namespace

std::size_t bin_index(double x, double lo, double hi, std::size_t bins) noexcept {
  if (x <= lo) return 0;
  if (x >= hi) return bins - 1;
  const double pos = (x - lo) / (hi - lo) * static_cast<double>(bins);
  const auto k = static_cast<std::size_t>(pos);
  return std::min(k, bins - 1);
}

std::vector<std::uint32_t> bin_counts(std::span<const double> sample, double lo,
                                      double hi, std::size_t bins) {
  check_domain(lo, hi, bins);
  check_sample(sample);
  std::vector<std::uint32_t> counts(bins, 0);
  for (double v : sample) ++counts[bin_index(v, lo, hi, bins)];
  return counts;
}

DiscretizedEdf build_edf(std::span<const double> sample, double lo, double hi,
                         std::size_t bins) {
  const auto counts = bin_counts(sample, lo, hi, bins);
  DiscretizedEdf edf{lo, hi, std::vector<double>(bins)};
  const auto n = static_cast<double>(sample.size());
  std::uint64_t running = 0;
  for (std::size_t k = 0; k < bins; ++k) {
    running += counts[k];
    edf.cum[k] = static_cast<double>(running) / n;
  }
  return edf;
}

HistogramDensity build_histogram(std::span<const double> sample, double lo,
                                 double hi, std::size_t bins) {
  const auto counts = bin_counts(sample, lo, hi, bins);
  HistogramDensity h{lo, hi, std::vector<double>(bins)};
  const auto n = static_cast<double>(sample.size());
  for (std::size_t k = 0; k < bins; ++k) h.probs[k] = static_cast<double>(counts[k]) / n;
  return h;
}

double signed_ks_from_counts(std::span<const std::uint32_t> inner_counts,
                             std::span<const std::uint32_t> outer_counts) {
  if (inner_counts.size() != outer_counts.size() || inner_counts.empty()) {
    throw Error(ErrorCode::GridMismatch, "inner and outer counts differ in bin count");
  }
  std::int64_t n_inner = 0;
  std::int64_t n_outer = 0;
  for (auto c : inner_counts) n_inner += c;
  for (auto c : outer_counts) n_outer += c;
  if (n_inner == 0 || n_outer == 0) throw Error(ErrorCode::EmptySample, "sample is empty");

  // gap_k * n_inner * n_outer = cum_outer_k * n_inner - cum_inner_k * n_outer
  std::int64_t cum_inner = 0;
  std::int64_t cum_outer = 0;
  std::int64_t best_abs = 0;
  std::int64_t best_inner = 0;
  std::int64_t best_outer = 0;
  for (std::size_t k = 0; k < inner_counts.size(); ++k) {
    cum_inner += inner_counts[k];
    cum_outer += outer_counts[k];
    const std::int64_t scaled = cum_outer * n_inner - cum_inner * n_outer;
    const std::int64_t mag = scaled < 0 ? -scaled : scaled;
    if (mag > best_abs) {
      best_abs = mag;
      best_inner = cum_inner;
      best_outer = cum_outer;
    }
  }
  if (best_abs == 0) return 0.0;
  return static_cast<double>(best_outer) / static_cast<double>(n_outer) -
         static_cast<double>(best_inner) / static_cast<double>(n_inner);
}

double signed_ks(std::span<const double> inner, std::span<const double> outer,
                 std::size_t bins) {
  check_sample(inner);
  check_sample(outer);
  const auto [imin, imax] = std::minmax_element(inner.begin(), inner.end());
  const auto [omin, omax] = std::minmax_element(outer.begin(), outer.end());
  const double lo = std::min(*imin, *omin);
  const double hi = std::max(*imax, *omax);
  if (lo == hi) return 0.0;
  const auto ic = bin_counts(inner, lo, hi, bins);
  const auto oc = bin_counts(outer, lo, hi, bins);
  return signed_ks_from_counts(ic, oc);
}

double kl_divergence(const HistogramDensity& p, const HistogramDensity& q) {
  check_same_grid(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi <= 0.0) continue;
    const double qi = q.probs[i];
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    sum += pi * std::log(pi / qi);
  }
  // Rounding can leave a tiny negative residue for p == q.
  return std::max(sum, 0.0);
}

double bhattacharyya(const HistogramDensity& p, const HistogramDensity& q) {
  check_same_grid(p, q);
  double coefficient = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    coefficient += std::sqrt(p.probs[i] * q.probs[i]);
  }
  if (coefficient <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(-std::log(coefficient), 0.0);
}

}  // namespace fexprobe::stats
