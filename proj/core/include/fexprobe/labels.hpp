#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fexprobe {

/// Per-image class assignment plus the class roster.
///
/// Classes are addressed two ways: by their external `id` (as written in
/// the CSV) and by a dense index 0..n_classes-1 in ascending id order. KS
/// matrix columns use the dense index.
class LabelTable {
 public:
  struct ClassInfo {
    std::uint32_t id = 0;
    std::string name;

    bool operator==(const ClassInfo&) const = default;
  };

  LabelTable() = default;

  /// `row_class_ids[r]` is the external class id of image row r. Names
  /// default to the decimal id when absent from `names`.
  static LabelTable from_class_ids(std::span<const std::uint32_t> row_class_ids,
                                   std::span<const ClassInfo> names = {});

  /// Same roster, new row assignment given as dense class indices.
  LabelTable with_assignment(std::vector<std::uint32_t> dense_assignment) const;

  std::size_t n_rows() const noexcept { return assignment_.size(); }
  std::size_t n_classes() const noexcept { return classes_.size(); }

  std::span<const std::uint32_t> assignment() const noexcept { return assignment_; }
  std::uint32_t class_of_row(std::size_t row) const { return assignment_.at(row); }
  const std::vector<ClassInfo>& classes() const noexcept { return classes_; }
  std::span<const std::size_t> counts() const noexcept { return counts_; }

  std::optional<std::size_t> index_of_id(std::uint32_t id) const noexcept;

  bool operator==(const LabelTable&) const = default;

 private:
  std::vector<std::uint32_t> assignment_;  // dense class index per row
  std::vector<ClassInfo> classes_;         // ascending id
  std::vector<std::size_t> counts_;        // |I_c| per dense index
};

/// CSV with header `row,class_id[,class_name]`. Rows may appear in any
/// order but 0..n-1 must each occur exactly once. Throws InvalidLabels.
LabelTable read_labels(std::istream& in);
LabelTable load_labels(const std::filesystem::path& path);

/// Writes rows in ascending order with the three-column header.
void write_labels(const LabelTable& labels, std::ostream& out);
void save_labels(const LabelTable& labels, const std::filesystem::path& path);

}  // namespace fexprobe
