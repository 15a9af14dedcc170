#pragma once

// Signed KS value for every (feature, class) pair.
//
// KSM1 on disk: "KSM1" | u32 version=1 | u32 n_features | u32 n_classes |
// n_features * n_classes float32 LE, feature-major. Values are kept as
// float32 in memory as well, so a save/load round trip is lossless.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace fexprobe {

class KSMatrix {
 public:
  KSMatrix() = default;
  KSMatrix(std::size_t n_features, std::size_t n_classes);
  /// Throws InvalidShape on size mismatch, InvalidArgument for values
  /// outside [-1, 1] or non-finite.
  KSMatrix(std::size_t n_features, std::size_t n_classes, std::vector<float> values);

  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_classes() const noexcept { return n_classes_; }

  float at(std::size_t feature, std::size_t cls) const { return values_[feature * n_classes_ + cls]; }
  float& at(std::size_t feature, std::size_t cls) { return values_[feature * n_classes_ + cls]; }

  /// All classes of one feature.
  std::span<const float> feature_row(std::size_t feature) const {
    return std::span<const float>(values_).subspan(feature * n_classes_, n_classes_);
  }
  std::span<float> feature_row(std::size_t feature) {
    return std::span<float>(values_).subspan(feature * n_classes_, n_classes_);
  }

  /// One class across features (copied; storage is feature-major).
  std::vector<float> class_column(std::size_t cls) const;

  std::span<const float> values() const noexcept { return values_; }

  bool operator==(const KSMatrix&) const = default;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_classes_ = 0;
  std::vector<float> values_;
};

void write_ks_matrix(const KSMatrix& ks, std::ostream& out);
KSMatrix read_ks_matrix(std::istream& in);
void save_ks_matrix(const KSMatrix& ks, const std::filesystem::path& path);
KSMatrix load_ks_matrix(const std::filesystem::path& path);

}  // namespace fexprobe
