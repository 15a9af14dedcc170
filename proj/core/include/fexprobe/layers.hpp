#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fexprobe {

enum class LayerKind : std::uint8_t { Conv = 0, Fc = 1 };

std::string_view to_string(LayerKind kind) noexcept;
std::optional<LayerKind> parse_layer_kind(std::string_view text) noexcept;

/// One named block of contiguous embedding columns.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  std::size_t feature_count = 0;
  std::size_t offset = 0;

  bool operator==(const LayerSpec&) const = default;
};

/// Ordered list of layers whose offsets partition [0, total_features()).
class LayerTable {
 public:
  LayerTable() = default;

  /// Builds a table from (name, kind, count) triples; offsets are assigned
  /// in order. Throws InvalidLayerTable for empty tables, zero counts or
  /// duplicate names.
  struct Entry {
    std::string name;
    LayerKind kind;
    std::size_t feature_count;
  };
  static LayerTable from_entries(const std::vector<Entry>& entries);

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }
  std::size_t total_features() const noexcept;

  const LayerSpec& operator[](std::size_t i) const { return layers_.at(i); }
  const LayerSpec* find(std::string_view name) const noexcept;

  /// Index of the layer that owns column `feature`. Throws InvalidArgument.
  std::size_t layer_of(std::size_t feature) const;

  auto begin() const noexcept { return layers_.begin(); }
  auto end() const noexcept { return layers_.end(); }

  bool operator==(const LayerTable&) const = default;

 private:
  std::vector<LayerSpec> layers_;
};

enum class Preset { Vgg16, Vgg19 };

std::optional<Preset> parse_preset(std::string_view text) noexcept;

/// VGG16: 13 conv + fc6 + fc7 (12,416 features).
/// VGG19: adds conv3_4, conv4_4, conv5_4 (13,696 features).
LayerTable builtin_layer_table(Preset preset);

/// CSV with header `name,kind,feature_count` (kind is `conv` or `fc`).
LayerTable load_layer_table(const std::filesystem::path& path);
void save_layer_table(const LayerTable& table, const std::filesystem::path& path);

}  // namespace fexprobe
