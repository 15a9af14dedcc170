#pragma once

// Synthetic embeddings with known ground truth. Every feature is drawn
// i.i.d. from the base distribution, except planted (feature, class) pairs
// whose in-class values come from `base.location + shift + scale * Z` with
// Z a standard draw of the planted family.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fexprobe/embedding.hpp"
#include "fexprobe/labels.hpp"
#include "fexprobe/layers.hpp"

namespace fexprobe {

enum class Family { Normal, Lognormal, Uniform };

std::string_view to_string(Family family) noexcept;
std::optional<Family> parse_family(std::string_view text) noexcept;

struct BaseDistribution {
  Family family = Family::Normal;
  double location = 0.0;
  double scale = 1.0;
};

struct PlantedPair {
  std::size_t feature = 0;
  std::size_t class_index = 0;
  Family family = Family::Normal;
  double shift = 0.0;
  double scale = 1.0;
};

struct SynthSpec {
  std::vector<std::size_t> images_per_class;  // one entry per class
  std::size_t n_features = 0;
  std::optional<LayerTable> layers;           // default: one conv layer "synth"
  BaseDistribution base;
  std::vector<PlantedPair> planted;

  std::size_t n_classes() const noexcept { return images_per_class.size(); }
  std::size_t n_images() const noexcept;

  /// Throws InvalidArgument for inconsistent specs.
  void validate() const;
};

struct PlantedTruth {
  std::size_t feature = 0;
  std::size_t class_index = 0;
  int expected_sign = 0;  // sign of the shift
};

struct SynthData {
  EmbeddingMatrix embedding;
  LabelTable labels;  // class ids 0..n_classes-1, rows in class order
  std::vector<PlantedTruth> truth;
};


/// Deterministic in (spec, seed) and independent of `threads`: feature f
/// draws from its own stream seeded by derive_seed(seed, f).
SynthData generate_synthetic(const SynthSpec& spec, std::uint64_t seed, std::size_t threads = 0);

}  // namespace fexprobe
