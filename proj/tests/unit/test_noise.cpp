#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fexprobe/error.hpp"
#include "fexprobe/noise.hpp"
#include "fexprobe/synth.hpp"

using namespace fexprobe;

namespace {

LayerTable single_layer(std::size_t n) { return LayerTable::from_entries({{"l", LayerKind::Conv, n}}); }

KSMatrix random_ks(std::size_t nf, std::size_t nc, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> q(-50, 50);
  std::vector<float> v(nf * nc);
  for (auto& x : v) x = static_cast<float>(q(gen)) / 50.0f;
  return KSMatrix(nf, nc, std::move(v));
}

AvgDistanceCurve curve_from(std::vector<double> x, std::vector<double> d) {
  AvgDistanceCurve c;
  c.x = std::move(x);
  c.d_avg = std::move(d);
  c.noise_sigma.assign(c.x.size(), 0.0);
  return c;
}

// Fisher-Yates written out from the textbook with an explicit 128-bit
// rejection bound.
std::vector<std::uint32_t> reference_shuffle(std::vector<std::uint32_t> a, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = a.size() - 1; i >= 1; --i) {
    const unsigned __int128 span = static_cast<unsigned __int128>(1) << 64;
    const unsigned __int128 accept = span - span % (i + 1);
    std::uint64_t r;
    do {
      r = gen();
    } while (r >= accept);
    std::swap(a[i], a[r % (i + 1)]);
  }
  return a;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected fexprobe::Error";
  return ErrorCode::IoError;
}

}  // namespace

TEST(RandomizeLabels, PreservesCountsAndIsDeterministic) {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t c = 0; c < 9; ++c) ids.insert(ids.end(), 10 + 7 * c, c);
  const auto labels = LabelTable::from_class_ids(ids);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const auto r = randomize_labels(labels, seed);
    EXPECT_TRUE(std::equal(r.counts().begin(), r.counts().end(), labels.counts().begin()));
    EXPECT_EQ(r, randomize_labels(labels, seed));
  }
  EXPECT_NE(randomize_labels(labels, 1), randomize_labels(labels, 2));
}

TEST(RandomizeLabels, MatchesReferenceFisherYates) {
  const std::vector<std::uint32_t> ids{0, 0, 0, 1, 1, 1};
  const auto labels = LabelTable::from_class_ids(ids);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = randomize_labels(labels, seed);
    const auto expected = reference_shuffle({0, 0, 0, 1, 1, 1}, seed);
    EXPECT_TRUE(std::equal(expected.begin(), expected.end(), r.assignment().begin())) << seed;
  }
}

TEST(AvgDistanceCurve, IdenticalInputsGiveZero) {
  const auto ks = random_ks(200, 5, 1);
  const std::vector<KSMatrix> rand{ks};
  for (auto side : {Side::Positive, Side::Negative}) {
    const auto c = avg_distance_curve(ks, rand, side);
    ASSERT_EQ(c.x.size(), 1001u);
    for (double d : c.d_avg) EXPECT_EQ(d, 0.0);
  }
}

TEST(AvgDistanceCurve, AllOnesAgainstZeros) {
  const KSMatrix real(7, 3, std::vector<float>(21, 1.0f));
  const std::vector<KSMatrix> rand{KSMatrix(7, 3, std::vector<float>(21, 0.0f))};
  const auto c = avg_distance_curve(real, rand, Side::Positive);
  for (std::size_t k = 0; k < c.x.size(); ++k) {
    if (c.x[k] > 0.0 && c.x[k] < 1.0) EXPECT_EQ(c.d_avg[k], 7.0);
  }
}

TEST(AvgDistanceCurve, WorkedExample) {
  const KSMatrix real(3, 2, {0.5f, 0.4f, 0.2f, 0.4f, 0.0f, 0.1f});
  const std::vector<KSMatrix> rand{KSMatrix(3, 2, std::vector<float>(6, 0.05f))};
  const auto c = avg_distance_curve(real, rand, Side::Positive);
  EXPECT_EQ(c.x[300], 0.3);
  EXPECT_EQ(c.d_avg[300], 1.5);
}

TEST(AvgDistanceCurve, NegativeSideMirrorsPositive) {
  const auto ks = random_ks(300, 4, 2);
  const auto r = random_ks(300, 4, 3);
  auto negate = [](const KSMatrix& m) {
    std::vector<float> v(m.values().begin(), m.values().end());
    for (auto& x : v) x = -x;
    return KSMatrix(m.n_features(), m.n_classes(), v);
  };
  const std::vector<KSMatrix> rand{r}, rand_neg{negate(r)};
  const auto pos = avg_distance_curve(ks, rand, Side::Positive, 0.01);
  const auto neg = avg_distance_curve(negate(ks), rand_neg, Side::Negative, 0.01);
  ASSERT_EQ(pos.x.size(), neg.x.size());
  const std::size_t n = pos.x.size();
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_EQ(neg.x[n - 1 - k], -pos.x[k]);
    EXPECT_EQ(neg.d_avg[n - 1 - k], pos.d_avg[k]);
  }
}

TEST(AvgDistanceCurve, AlignmentError) {
  const std::vector<KSMatrix> rand{random_ks(5, 2, 4)};
  EXPECT_EQ(code_of([&] { avg_distance_curve(random_ks(6, 2, 5), rand, Side::Positive); }),
            ErrorCode::AlignmentError);
}

TEST(FindThresholds, PeakAndPlateaus) {
  const auto pos = curve_from({0.0, 0.05, 0.10, 0.15, 0.20}, {1, 2, 3, 9, 4});
  const auto neg = curve_from({-0.2, -0.1, 0.0}, {5, 5, 1});
  const auto r = find_thresholds(pos, neg);
  EXPECT_EQ(r.t_plus, 0.15);
  EXPECT_EQ(r.d_avg_at_t_plus, 9.0);
  EXPECT_EQ(r.t_minus, -0.1);  // plateau resolves toward 0
  EXPECT_EQ(r.d_avg_at_t_minus, 5.0);

  const auto plateau = curve_from({0.09, 0.10, 0.11, 0.12, 0.13}, {1, 7, 7, 7, 2});
  EXPECT_EQ(find_thresholds(plateau, neg).t_plus, 0.10);
}

TEST(FindThresholds, ArgmaxInvariantUnderConstantShift) {
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> u(0, 30);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xp, dp, xn, dn;
    for (int k = 0; k <= 100; ++k) {
      xp.push_back(k / 100.0);
      dp.push_back(u(gen));
      xn.push_back(-1.0 + k / 100.0);
      dn.push_back(u(gen));
    }
    const auto base = find_thresholds(curve_from(xp, dp), curve_from(xn, dn));
    for (auto& d : dp) d += 123.0;
    for (auto& d : dn) d += 123.0;
    const auto shifted = find_thresholds(curve_from(xp, dp), curve_from(xn, dn));
    EXPECT_EQ(base.t_plus, shifted.t_plus);
    EXPECT_EQ(base.t_minus, shifted.t_minus);
  }
}

TEST(Prune, Extremes) {
  const auto ks = random_ks(40, 3, 7);
  const auto layers = LayerTable::from_entries({{"a", LayerKind::Conv, 10}, {"b", LayerKind::Fc, 30}});
  const auto all = prune(ks, 0.0, 0.0, layers);
  for (const auto& l : all.layers) EXPECT_EQ(l.kept_pct, 100.0);
  const auto none = prune(ks, std::nextafter(1.0, 2.0), std::nextafter(-1.0, -2.0), layers);
  for (const auto& l : none.layers) EXPECT_EQ(l.kept_pct, 0.0);
  EXPECT_EQ(none.kept, 0u);
  EXPECT_EQ(code_of([&] { prune(ks, -0.1, -0.2, layers); }), ErrorCode::InvalidThresholds);
  EXPECT_EQ(code_of([&] { prune(ks, 0.2, 0.1, layers); }), ErrorCode::InvalidThresholds);
}

TEST(Prune, MatchesBruteForceCount) {
  const auto ks = random_ks(500, 6, 8);
  const auto layers = LayerTable::from_entries({{"a", LayerKind::Conv, 200}, {"b", LayerKind::Fc, 300}});
  const auto r = prune(ks, 0.3, -0.3, layers);
  std::size_t kept_a = 0, kept_b = 0;
  std::vector<std::size_t> per_class(6, 0);
  for (std::size_t f = 0; f < 500; ++f) {
    for (std::size_t c = 0; c < 6; ++c) {
      const float v = ks.at(f, c);
      if (v >= 0.3 || v <= -0.3) {
        (f < 200 ? kept_a : kept_b)++;
        ++per_class[c];
      }
    }
  }
  EXPECT_EQ(r.layers[0].kept, kept_a);
  EXPECT_EQ(r.layers[1].kept, kept_b);
  EXPECT_DOUBLE_EQ(r.layers[0].kept_pct, 100.0 * kept_a / 1200.0);
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(r.per_class[c].size(), per_class[c]);
    for (const auto& rf : r.per_class[c]) EXPECT_EQ(rf.sign, rf.value > 0 ? 1 : -1);
  }
}

TEST(Prune, MonotoneInThresholds) {
  const auto ks = random_ks(300, 4, 9);
  const auto layers = single_layer(300);
  std::size_t prev = SIZE_MAX;
  for (int k = 0; k <= 20; ++k) {
    const auto kept = prune(ks, k / 20.0, -0.5, layers).kept;
    EXPECT_LE(kept, prev);
    prev = kept;
  }
  prev = 0;
  for (int k = 20; k >= 0; --k) {
    const auto kept = prune(ks, 0.5, -k / 20.0, layers).kept;
    EXPECT_GE(kept, prev);
    prev = kept;
  }
}

namespace {

SynthSpec null_spec(std::size_t classes, std::size_t per_class, std::size_t features) {
  SynthSpec s;
  s.images_per_class.assign(classes, per_class);
  s.n_features = features;
  return s;
}

}  // namespace

TEST(ThresholdPipeline, DeterministicPerSeed) {
  auto spec = null_spec(4, 30, 64);
  spec.planted = {{3, 1, Family::Normal, 1.5, 1.0}, {10, 2, Family::Normal, -1.5, 1.0}};
  const auto data = generate_synthetic(spec, 5);
  PipelineOptions o;
  o.seed = 77;
  o.repeats = 2;
  const auto a = threshold_pipeline(data.embedding, data.labels, o);
  const auto b = threshold_pipeline(data.embedding, data.labels, o);
  EXPECT_EQ(a.ks_real, b.ks_real);
  EXPECT_EQ(a.ks_randomized, b.ks_randomized);
  EXPECT_EQ(a.analysis.thresholds.t_plus, b.analysis.thresholds.t_plus);
  EXPECT_EQ(a.analysis.thresholds.t_minus, b.analysis.thresholds.t_minus);
  EXPECT_EQ(a.analysis.prune.retained, b.analysis.prune.retained);
  EXPECT_EQ(a.analysis.curve_positive.d_avg, b.analysis.curve_positive.d_avg);
  EXPECT_EQ(a.randomized_labels.size(), 2u);
  EXPECT_NE(a.randomized_labels[0], a.randomized_labels[1]);
}

TEST(ThresholdPipeline, RandomLabelsReportNoSignal) {
  const auto data = generate_synthetic(null_spec(10, 40, 300), 6);
  // Labels that are themselves a shuffle carry no information.
  const auto labels = randomize_labels(data.labels, 12345);
  PipelineOptions o;
  o.seed = 3;
  const auto r = threshold_pipeline(data.embedding, labels, o);
  EXPECT_TRUE(r.analysis.no_signal);
}

TEST(ThresholdPipeline, StrongSignalIsDetected) {
  auto spec = null_spec(5, 40, 200);
  for (std::size_t f = 0; f < 100; ++f) spec.planted.push_back({f, f % 5, Family::Normal, 3.0, 1.0});
  const auto data = generate_synthetic(spec, 7);
  const auto r = threshold_pipeline(data.embedding, data.labels, {});
  EXPECT_FALSE(r.analysis.no_signal);
  const auto& retained = r.analysis.prune.retained;
  for (const auto& t : data.truth) {
    const auto& kept = retained[t.class_index];
    EXPECT_TRUE(std::any_of(kept.begin(), kept.end(),
                            [&](const RetainedFeature& rf) { return rf.feature == t.feature && rf.sign == 1; }));
  }
}

TEST(ThresholdPipeline, NullCurveStaysInsideEnvelope) {
  // Monte-Carlo check over several seeds: on null data the averaged
  // distance stays within 3 sigma of zero at every grid point.
  int inside = 0;
  const int trials = 10;
  for (int s = 0; s < trials; ++s) {
    const auto data = generate_synthetic(null_spec(12, 30, 200), 100 + s);
    PipelineOptions o;
    o.seed = 1000 + s;
    o.grid_step = 0.01;
    const auto r = threshold_pipeline(data.embedding, data.labels, o);
    bool ok = true;
    for (const auto* c : {&r.analysis.curve_positive, &r.analysis.curve_negative}) {
      for (std::size_t k = 0; k < c->x.size(); ++k) ok &= std::abs(c->d_avg[k]) <= 3 * c->noise_sigma[k];
    }
    inside += ok;
  }
  EXPECT_GE(inside, trials - 1);
}

TEST(ThresholdPipeline, InvariantUnderPositiveAffineTransforms) {
  auto spec = null_spec(4, 25, 40);
  spec.planted = {{1, 0, Family::Normal, 1.0, 1.0}};
  const auto data = generate_synthetic(spec, 9);
  // Values on a 2^-10 grid scaled by small multiples of 1/16 and shifted by
  // multiples of 2^-14 stay exactly representable, so both sides see the
  // same ordering and the same bin edges.
  std::vector<float> q(data.embedding.data().begin(), data.embedding.data().end());
  for (auto& x : q) x = std::round(x * 1024.0f) / 1024.0f;
  std::vector<float> v = q;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t f = i % 40;
    v[i] = v[i] * static_cast<float>(1 + 5 * f) / 16.0f + static_cast<float>(f * 37) / 16384.0f;
  }
  const EmbeddingMatrix base(data.embedding.layers(), data.embedding.n_images(), q);
  const EmbeddingMatrix transformed(data.embedding.layers(), data.embedding.n_images(), v);
  PipelineOptions o;
  o.seed = 4;
  const auto a = threshold_pipeline(base, data.labels, o);
  const auto b = threshold_pipeline(transformed, data.labels, o);
  EXPECT_EQ(a.ks_real, b.ks_real);
  EXPECT_EQ(a.analysis.thresholds.t_plus, b.analysis.thresholds.t_plus);
  EXPECT_EQ(a.analysis.prune.retained, b.analysis.prune.retained);
}
