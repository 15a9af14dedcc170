#include <gtest/gtest.h>

#include <cmath>

#include "fexprobe/analysis.hpp"
#include "fexprobe/error.hpp"
#include "fexprobe/synth.hpp"

using namespace fexprobe;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.images_per_class = {20, 30, 25};
  s.n_features = 50;
  s.planted = {{4, 1, Family::Normal, 2.0, 1.0}, {9, 0, Family::Lognormal, -1.0, 0.5}};
  return s;
}

}  // namespace

TEST(Synth, DeterministicInSeed) {
  const auto a = generate_synthetic(small_spec(), 1);
  const auto b = generate_synthetic(small_spec(), 1);
  const auto c = generate_synthetic(small_spec(), 2);
  EXPECT_TRUE(std::equal(a.embedding.data().begin(), a.embedding.data().end(), b.embedding.data().begin()));
  EXPECT_FALSE(std::equal(a.embedding.data().begin(), a.embedding.data().end(), c.embedding.data().begin()));
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Synth, IndependentOfThreadCount) {
  const auto a = generate_synthetic(small_spec(), 3, 1);
  const auto b = generate_synthetic(small_spec(), 3, 4);
  EXPECT_TRUE(std::equal(a.embedding.data().begin(), a.embedding.data().end(), b.embedding.data().begin()));
}

TEST(Synth, LayoutAndTruth) {
  const auto d = generate_synthetic(small_spec(), 4);
  EXPECT_EQ(d.embedding.n_images(), 75u);
  EXPECT_EQ(d.embedding.n_features(), 50u);
  EXPECT_EQ(d.embedding.layers()[0].name, "synth");
  EXPECT_EQ(d.labels.class_of_row(0), 0u);
  EXPECT_EQ(d.labels.class_of_row(20), 1u);
  EXPECT_EQ(d.labels.class_of_row(74), 2u);
  ASSERT_EQ(d.truth.size(), 2u);
  EXPECT_EQ(d.truth[0].expected_sign, 1);
  EXPECT_EQ(d.truth[1].expected_sign, -1);
}

TEST(Synth, PlantedSignsAreRecovered) {
  auto spec = small_spec();
  spec.images_per_class = {200, 200, 200};
  const auto d = generate_synthetic(spec, 5);
  const auto ks = ks_sweep(d.embedding, d.labels);
  for (const auto& t : d.truth) {
    EXPECT_EQ(ks.at(t.feature, t.class_index) > 0 ? 1 : -1, t.expected_sign);
    EXPECT_GT(std::abs(ks.at(t.feature, t.class_index)), 0.15);
  }
}

TEST(Synth, DisjointPlantedPairGivesPlusOne) {
  SynthSpec s;
  s.images_per_class = {50, 50};
  s.n_features = 3;
  s.base = {Family::Uniform, 0.0, 1.0};
  s.planted = {{2, 1, Family::Uniform, 10.0, 1.0}};
  const auto d = generate_synthetic(s, 6);
  const auto ks = ks_sweep(d.embedding, d.labels);
  EXPECT_EQ(ks.at(2, 1), 1.0f);
  EXPECT_EQ(ks.at(2, 0), -1.0f);
}

TEST(Synth, NullDataStaysInsideKolmogorovEnvelope) {
  // P(sqrt(nm/(n+m)) D > 1.63) is about 0.01 under the null.
  SynthSpec s;
  s.images_per_class = {100, 400};
  s.n_features = 500;
  const auto d = generate_synthetic(s, 7);
  const auto ks = ks_sweep(d.embedding, d.labels);
  const double scale = std::sqrt(100.0 * 400.0 / 500.0);
  std::size_t beyond = 0;
  for (float v : ks.class_column(0)) beyond += scale * std::abs(v) > 1.63;
  EXPECT_LE(beyond, 15u);  // 500 * 0.01 = 5 expected
}

TEST(Synth, FamiliesHaveExpectedMoments) {
  for (auto family : {Family::Normal, Family::Uniform, Family::Lognormal}) {
    SynthSpec s;
    s.images_per_class = {20000};
    s.n_features = 1;
    s.base = {family, 2.0, 0.5};
    const auto d = generate_synthetic(s, 8);
    double mean = 0;
    for (float v : d.embedding.data()) mean += v;
    mean /= 20000;
    // standard draws: N(0,1), U(0,1), LogNormal(0,1) with mean exp(1/2)
    const double z_mean = family == Family::Normal ? 0.0 : family == Family::Uniform ? 0.5 : std::exp(0.5);
    EXPECT_NEAR(mean, 2.0 + 0.5 * z_mean, 0.03) << to_string(family);
  }
}

TEST(Synth, ValidatesSpec) {
  auto s = small_spec();
  s.planted.push_back({50, 0, Family::Normal, 1.0, 1.0});
  EXPECT_THROW(generate_synthetic(s, 1), Error);
  s = small_spec();
  s.planted.push_back({0, 3, Family::Normal, 1.0, 1.0});
  EXPECT_THROW(generate_synthetic(s, 1), Error);
  s = small_spec();
  s.planted[0].shift = std::nan("");
  EXPECT_THROW(generate_synthetic(s, 1), Error);
  s = small_spec();
  s.layers = LayerTable::from_entries({{"x", LayerKind::Conv, 49}});
  EXPECT_THROW(generate_synthetic(s, 1), Error);
}
