#pragma once

// Statistical kernels over one-dimensional activation samples: binned
// EDFs, histogram densities, the signed two-sample Kolmogorov-Smirnov
// statistic, KL divergence and Bhattacharyya distance.
//
// Binning: `bins` equal-width half-open bins [e_k, e_{k+1}) over [lo, hi],
// the last bin closed. Values below lo fall in bin 0, values above hi in the
// last bin. When lo == hi every value <= lo lands in bin 0.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fexprobe::stats {

inline constexpr std::size_t kDefaultBins = 100;

struct DiscretizedEdf {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> cum;  // non-decreasing, cum.back() == 1
};

struct HistogramDensity {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> probs;  // non-negative, sums to 1
};

/// Bin of `x` under the binning rule above. `bins` must be > 0.
std::size_t bin_index(double x, double lo, double hi, std::size_t bins) noexcept;

/// Raw per-bin counts. Throws EmptySample / InvalidDomain / InvalidArgument.
std::vector<std::uint32_t> bin_counts(std::span<const double> sample, double lo,
                                      double hi, std::size_t bins);

DiscretizedEdf build_edf(std::span<const double> sample, double lo, double hi,
                         std::size_t bins = kDefaultBins);

HistogramDensity build_histogram(std::span<const double> sample, double lo,
                                 double hi, std::size_t bins = kDefaultBins);

/// Signed KS from per-bin counts of the inner and outer samples on a shared
/// grid. Returns Q(k*) - P(k*) where P, Q are the inner and outer binned EDFs
/// and k* is the first bin of maximal |P - Q|. Positive when the inner sample
/// is stochastically higher.
///
/// The gap comparison is carried out in exact integer arithmetic, so the
/// selected bin never depends on rounding.
double signed_ks_from_counts(std::span<const std::uint32_t> inner_counts,
                             std::span<const std::uint32_t> outer_counts);

/// Signed KS over the shared data-driven domain [min, max] of both samples.
/// Returns 0 when every value in both samples is identical.
double signed_ks(std::span<const double> inner, std::span<const double> outer,
                 std::size_t bins = kDefaultBins);

/// sum p ln(p/q); +inf when p > 0 where q == 0. Throws GridMismatch.
double kl_divergence(const HistogramDensity& p, const HistogramDensity& q);

/// -ln(sum sqrt(p q)); +inf for disjoint supports. Throws GridMismatch.
double bhattacharyya(const HistogramDensity& p, const HistogramDensity& q);

}  // namespace fexprobe::stats
