#pragma once

// Embedding assembly from raw per-crop activation dumps, and the FEX1 / RAW1
// binary formats.
//
// FEX1 (embedding):
//   "FEX1" | u32 version=1 | u32 n_images | u32 n_features | u32 n_layers
//   per layer: u16 name_len | name (UTF-8) | u8 kind (0 conv, 1 fc) | u32 feature_count
//   payload: n_images * n_features float32, row-major (image-major)
//
// RAW1 (activation dump):
//   "RAW1" | u32 version=1 | u32 n_images | u32 n_crops | u32 n_layers
//   per layer: u16 name_len | name | u8 kind | u32 C | u32 H | u32 W
//   payload, per image, per crop, per layer: C*H*W float32, channel-major
//
// All integers and floats are little-endian.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fexprobe/layers.hpp"

namespace fexprobe {

/// Images x features activation matrix; immutable once built.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// `data` is row-major with n_images rows. Throws InvalidShape when the
  /// size does not match, InvalidArgument for non-finite values.
  EmbeddingMatrix(LayerTable layers, std::size_t n_images, std::vector<float> data);

  std::size_t n_images() const noexcept { return n_images_; }
  std::size_t n_features() const noexcept { return layers_.total_features(); }
  const LayerTable& layers() const noexcept { return layers_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> row(std::size_t image) const {
    return std::span<const float>(data_).subspan(image * n_features(), n_features());
  }
  float at(std::size_t image, std::size_t feature) const {
    return data_[image * n_features() + feature];
  }

  /// Number of strictly negative entries. Post-ReLU activations should have
  /// none; callers report this as a warning.
  std::size_t count_negative() const noexcept;

 private:
  LayerTable layers_;
  std::size_t n_images_ = 0;
  std::vector<float> data_;
};

struct TensorShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return channels * height * width; }
  bool operator==(const TensorShape&) const = default;
};

/// Mean over the H*W positions of each channel (channel-major input).
std::vector<double> spatial_average_pool(std::span<const float> tensor, TensorShape shape);

/// Element-wise mean across crops. Throws InvalidShape on ragged input.
std::vector<double> crop_average(const std::vector<std::vector<double>>& crops);

struct DumpLayer {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  TensorShape shape;

  bool operator==(const DumpLayer&) const = default;
};

struct RawDumpHeader {
  std::uint32_t n_images = 0;
  std::uint32_t n_crops = 0;
  std::vector<DumpLayer> layers;

  /// Floats per crop (sum of C*H*W over layers).
  std::size_t crop_size() const noexcept;
  std::size_t image_size() const noexcept { return crop_size() * n_crops; }
};

RawDumpHeader read_raw_dump_header(std::istream& in);

/// Appends image records to a RAW1 stream after writing its header.
class RawDumpWriter {
 public:
  RawDumpWriter(std::ostream& out, RawDumpHeader header);

  /// One image: n_crops consecutive crop blocks, each the concatenation of
  /// the layer tensors in header order.
  void write_image(std::span<const float> record);

  /// Throws InvalidShape unless exactly n_images records were written.
  void finish();

 private:
  std::ostream& out_;
  RawDumpHeader header_;
  std::uint32_t written_ = 0;
};

/// Throws LayoutMismatch unless the dump layers match the table: same count,
/// order, names and kinds; C equal to feature_count; fc layers are 1x1.
void check_layout(const RawDumpHeader& header, const LayerTable& table);

/// Pools each conv layer spatially per crop, averages across crops, then
/// concatenates layers in table order. Throws LayoutMismatch / CorruptDump.
EmbeddingMatrix assemble_embedding(std::istream& dump, const LayerTable& table);
EmbeddingMatrix assemble_embedding(const std::filesystem::path& dump, const LayerTable& table);

void write_embedding(const EmbeddingMatrix& matrix, std::ostream& out);
EmbeddingMatrix read_embedding(std::istream& in);

void save_embedding(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix load_embedding(const std::filesystem::path& path);

}  // namespace fexprobe
