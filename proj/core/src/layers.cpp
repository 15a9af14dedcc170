#include "fexprobe/layers.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fexprobe/error.hpp"
#include "text_util.hpp"

namespace fexprobe {

std::string_view to_string(LayerKind kind) noexcept {
  return kind == LayerKind::Conv ? "conv" : "fc";
}

std::optional<LayerKind> parse_layer_kind(std::string_view text) noexcept {
  if (text == "conv") return LayerKind::Conv;
  if (text == "fc") return LayerKind::Fc;
  return std::nullopt;
}

LayerTable LayerTable::from_entries(const std::vector<Entry>& entries) {
  if (entries.empty()) throw Error(ErrorCode::InvalidLayerTable, "layer table is empty");
  LayerTable table;
  std::set<std::string, std::less<>> seen;
  std::size_t offset = 0;
  for (const auto& e : entries) {
    if (e.name.empty()) throw Error(ErrorCode::InvalidLayerTable, "layer name is empty");
    if (e.feature_count == 0) {
      throw Error(ErrorCode::InvalidLayerTable, "layer '" + e.name + "' has zero features");
    }
    if (!seen.insert(e.name).second) {
      throw Error(ErrorCode::InvalidLayerTable, "duplicate layer name '" + e.name + "'");
    }
    table.layers_.push_back({e.name, e.kind, e.feature_count, offset});
    offset += e.feature_count;
  }
  return table;
}

std::size_t LayerTable::total_features() const noexcept {
  if (layers_.empty()) return 0;
  return layers_.back().offset + layers_.back().feature_count;
}

const LayerSpec* LayerTable::find(std::string_view name) const noexcept {
  for (const auto& l : layers_) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

std::size_t LayerTable::layer_of(std::size_t feature) const {
  auto it = std::upper_bound(layers_.begin(), layers_.end(), feature,
                             [](std::size_t f, const LayerSpec& l) { return f < l.offset; });
  if (it == layers_.begin() || feature >= total_features()) {
    throw Error(ErrorCode::InvalidArgument, "feature index out of range");
  }
  return static_cast<std::size_t>(std::distance(layers_.begin(), it) - 1);
}

std::optional<Preset> parse_preset(std::string_view text) noexcept {
  if (text == "vgg16") return Preset::Vgg16;
  if (text == "vgg19") return Preset::Vgg19;
  return std::nullopt;
}

LayerTable builtin_layer_table(Preset preset) {
  using K = LayerKind;
  std::vector<LayerTable::Entry> e = {
      {"conv1_1", K::Conv, 64},  {"conv1_2", K::Conv, 64},
      {"conv2_1", K::Conv, 128}, {"conv2_2", K::Conv, 128},
      {"conv3_1", K::Conv, 256}, {"conv3_2", K::Conv, 256}, {"conv3_3", K::Conv, 256},
      {"conv4_1", K::Conv, 512}, {"conv4_2", K::Conv, 512}, {"conv4_3", K::Conv, 512},
      {"conv5_1", K::Conv, 512}, {"conv5_2", K::Conv, 512}, {"conv5_3", K::Conv, 512},
  };
  if (preset == Preset::Vgg19) {
    auto insert_after = [&e](std::string_view after, LayerTable::Entry entry) {
      auto it = std::find_if(e.begin(), e.end(), [&](const auto& x) { return x.name == after; });
      e.insert(it + 1, std::move(entry));
    };
    insert_after("conv3_3", {"conv3_4", K::Conv, 256});
    insert_after("conv4_3", {"conv4_4", K::Conv, 512});
    insert_after("conv5_3", {"conv5_4", K::Conv, 512});
  }
  e.push_back({"fc6", K::Fc, 4096});
  e.push_back({"fc7", K::Fc, 4096});
  return LayerTable::from_entries(e);
}

LayerTable load_layer_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open layer table '" + path.string() + "'");
  std::string line;
  if (!detail::read_line(in, line) || line != "name,kind,feature_count") {
    throw Error(ErrorCode::InvalidLayerTable,
                "layer table must start with header 'name,kind,feature_count'");
  }
  std::vector<LayerTable::Entry> entries;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    const auto where = " at line " + std::to_string(line_no);
    if (fields.size() != 3) throw Error(ErrorCode::InvalidLayerTable, "expected 3 fields" + where);
    const auto kind = parse_layer_kind(fields[1]);
    if (!kind) throw Error(ErrorCode::InvalidLayerTable, "unknown layer kind" + where);
    const auto count = detail::parse_uint(fields[2]);
    if (!count) throw Error(ErrorCode::InvalidLayerTable, "bad feature_count" + where);
    entries.push_back({std::string(fields[0]), *kind, static_cast<std::size_t>(*count)});
  }
  return LayerTable::from_entries(entries);
}

void save_layer_table(const LayerTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << "name,kind,feature_count\n";
  for (const auto& l : table) out << l.name << ',' << to_string(l.kind) << ',' << l.feature_count << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace fexprobe
