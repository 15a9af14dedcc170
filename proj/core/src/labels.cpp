#include "fexprobe/labels.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "fexprobe/error.hpp"
#include "text_util.hpp"

namespace fexprobe {

LabelTable LabelTable::from_class_ids(std::span<const std::uint32_t> row_class_ids,
                                      std::span<const ClassInfo> names) {
  std::map<std::uint32_t, std::string> roster;
  for (auto id : row_class_ids) roster.emplace(id, std::to_string(id));
  for (const auto& info : names) {
    auto it = roster.find(info.id);
    if (it != roster.end() && !info.name.empty()) it->second = info.name;
  }

  LabelTable t;
  std::map<std::uint32_t, std::uint32_t> dense;
  for (const auto& [id, name] : roster) {
    dense.emplace(id, static_cast<std::uint32_t>(t.classes_.size()));
    t.classes_.push_back({id, name});
  }
  t.counts_.assign(t.classes_.size(), 0);
  t.assignment_.reserve(row_class_ids.size());
  for (auto id : row_class_ids) {
    const auto c = dense.at(id);
    t.assignment_.push_back(c);
    ++t.counts_[c];
  }
  return t;
}

LabelTable LabelTable::with_assignment(std::vector<std::uint32_t> dense_assignment) const {
  LabelTable t;
  t.classes_ = classes_;
  t.counts_.assign(classes_.size(), 0);
  for (auto c : dense_assignment) {
    if (c >= classes_.size()) throw Error(ErrorCode::InvalidLabels, "class index out of range");
    ++t.counts_[c];
  }
  t.assignment_ = std::move(dense_assignment);
  return t;
}

std::optional<std::size_t> LabelTable::index_of_id(std::uint32_t id) const noexcept {
  auto it = std::lower_bound(classes_.begin(), classes_.end(), id,
                             [](const ClassInfo& c, std::uint32_t v) { return c.id < v; });
  if (it == classes_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

LabelTable read_labels(std::istream& in) {
  std::string line;
  if (!detail::read_line(in, line)) throw Error(ErrorCode::InvalidLabels, "labels file is empty");
  if (line != "row,class_id,class_name" && line != "row,class_id") {
    throw Error(ErrorCode::InvalidLabels, "labels header must be 'row,class_id[,class_name]'");
  }

  std::vector<std::pair<std::uint64_t, std::uint32_t>> rows;
  std::map<std::uint32_t, std::string> names;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = " at line " + std::to_string(line_no);
    const auto fields = detail::split(line, ',', 3);
    if (fields.size() < 2) throw Error(ErrorCode::InvalidLabels, "expected row,class_id" + where);
    const auto row = detail::parse_uint(fields[0]);
    const auto id = detail::parse_uint(fields[1]);
    if (!row || !id || *id > UINT32_MAX) throw Error(ErrorCode::InvalidLabels, "bad integer field" + where);
    const auto cid = static_cast<std::uint32_t>(*id);
    rows.emplace_back(*row, cid);
    if (fields.size() == 3 && !fields[2].empty()) {
      auto [it, inserted] = names.emplace(cid, std::string(fields[2]));
      if (!inserted && it->second != fields[2]) {
        throw Error(ErrorCode::InvalidLabels, "class " + std::to_string(cid) + " has two names" + where);
      }
    }
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidLabels, "labels file has no rows");

  std::vector<std::uint32_t> by_row(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [row, cid] : rows) {
    if (row >= rows.size()) {
      throw Error(ErrorCode::InvalidLabels, "row index " + std::to_string(row) + " out of range (missing rows)");
    }
    if (seen[row]) throw Error(ErrorCode::InvalidLabels, "duplicate row " + std::to_string(row));
    seen[row] = true;
    by_row[row] = cid;
  }

  std::vector<LabelTable::ClassInfo> infos;
  for (auto& [id, name] : names) infos.push_back({id, name});
  return LabelTable::from_class_ids(by_row, infos);
}

LabelTable load_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open labels '" + path.string() + "'");
  return read_labels(in);
}

void write_labels(const LabelTable& labels, std::ostream& out) {
  out << "row,class_id,class_name\n";
  for (std::size_t r = 0; r < labels.n_rows(); ++r) {
    const auto& info = labels.classes()[labels.class_of_row(r)];
    out << r << ',' << info.id << ',' << info.name << '\n';
  }
}

void save_labels(const LabelTable& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_labels(labels, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace fexprobe
