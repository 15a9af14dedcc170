#pragma once

// Reference implementations used only by tests. They follow the textbook
// definitions directly and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fexprobe::oracle {

/// Exact two-sample KS over the union of sample points, signed as
/// outer EDF minus inner EDF at the first point of maximal |gap|.
inline double exact_signed_ks(std::span<const double> inner, std::span<const double> outer) {
  std::vector<double> a(inner.begin(), inner.end());
  std::vector<double> b(outer.begin(), outer.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double best = 0.0;
  double best_abs = 0.0;
  for (double t : pts) {
    const double p = static_cast<double>(std::upper_bound(a.begin(), a.end(), t) - a.begin()) / a.size();
    const double q = static_cast<double>(std::upper_bound(b.begin(), b.end(), t) - b.begin()) / b.size();
    const double gap = q - p;
    if (std::abs(gap) > best_abs + 1e-15) {
      best_abs = std::abs(gap);
      best = gap;
    }
  }
  return best;
}

/// Largest per-bin probability mass of either sample on `bins` equal bins
/// over the union range.
inline double max_bin_mass(std::span<const double> a, std::span<const double> b, std::size_t bins) {
  double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  auto mass = [&](std::span<const double> s) {
    std::vector<double> m(bins, 0.0);
    for (double v : s) {
      auto k = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * bins));
      m[std::min(k, bins - 1)] += 1.0 / s.size();
    }
    return *std::max_element(m.begin(), m.end());
  };
  return std::max(mass(a), mass(b));
}

/// Mixed continuous families with random location and scale.
inline std::vector<double> draw_mixed(std::mt19937_64& gen, std::size_t n, int family, double loc,
                                      double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    switch (family) {
      case 0: v = loc + scale * normal(gen); break;
      case 1: v = loc + scale * 1.7 * (2.0 * unif(gen) - 1.0); break;
      case 2: v = loc + scale * std::exp(0.5 * normal(gen)); break;
      case 3: {
        double u = unif(gen);
        while (u <= 0.0) u = unif(gen);
        v = loc + scale * 0.55 * std::log(u / (1.0 - u));
        break;
      }
      default: {
        const bool left = unif(gen) < 0.3;
        v = left ? loc - scale + 0.5 * scale * normal(gen) : loc + 0.4 * scale + 0.7 * scale * normal(gen);
        break;
      }
    }
  }
  return out;
}

}  // namespace fexprobe::oracle
