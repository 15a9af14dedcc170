#include "fexprobe/embedding.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "fexprobe/error.hpp"

namespace fexprobe {
namespace {

constexpr std::string_view kFexMagic = "FEX1";
constexpr std::string_view kRawMagic = "RAW1";
constexpr std::uint32_t kVersion = 1;

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " exceeds u32 range");
  }
  return static_cast<std::uint32_t>(v);
}

void write_name(detail::LeWriter& w, const std::string& name) {
  if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "layer name too long");
  }
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.bytes(name);
}

LayerKind read_kind(detail::LeReader& r, ErrorCode code) {
  const auto k = r.u8();
  if (k > 1) throw Error(code, "invalid layer kind byte " + std::to_string(k));
  return static_cast<LayerKind>(k);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(LayerTable layers, std::size_t n_images, std::vector<float> data)
    : layers_(std::move(layers)), n_images_(n_images), data_(std::move(data)) {
  if (layers_.empty()) throw Error(ErrorCode::InvalidLayerTable, "layer table is empty");
  if (data_.size() != n_images_ * layers_.total_features()) {
    throw Error(ErrorCode::InvalidShape, "embedding data size does not match n_images x n_features");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "embedding contains a non-finite value");
  }
}

std::size_t EmbeddingMatrix::count_negative() const noexcept {
  std::size_t n = 0;
  for (float v : data_) n += v < 0.0f ? 1 : 0;
  return n;
}

std::vector<double> spatial_average_pool(std::span<const float> tensor, TensorShape shape) {
  if (shape.size() == 0) throw Error(ErrorCode::InvalidShape, "empty tensor");
  if (tensor.size() != shape.size()) {
    throw Error(ErrorCode::InvalidShape, "tensor size does not match C x H x W");
  }
  const std::size_t plane = shape.height * shape.width;
  std::vector<double> out(shape.channels);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    double sum = 0.0;
    for (float v : tensor.subspan(c * plane, plane)) sum += v;
    out[c] = sum / static_cast<double>(plane);
  }
  return out;
}

std::vector<double> crop_average(const std::vector<std::vector<double>>& crops) {
  if (crops.empty()) throw Error(ErrorCode::InvalidShape, "no crops to average");
  const std::size_t d = crops.front().size();
  std::vector<double> out(d, 0.0);
  for (const auto& crop : crops) {
    if (crop.size() != d) throw Error(ErrorCode::InvalidShape, "crops differ in length");
    for (std::size_t i = 0; i < d; ++i) out[i] += crop[i];
  }
  const auto n = static_cast<double>(crops.size());
  for (auto& v : out) v /= n;
  return out;
}

std::size_t RawDumpHeader::crop_size() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.shape.size();
  return n;
}

RawDumpHeader read_raw_dump_header(std::istream& in) {
  detail::LeReader r(in, ErrorCode::CorruptDump);
  if (r.bytes(4) != kRawMagic) throw Error(ErrorCode::UnsupportedFormat, "not a RAW1 dump (bad magic)");
  if (r.u32() != kVersion) throw Error(ErrorCode::UnsupportedFormat, "unsupported RAW1 version");
  RawDumpHeader h;
  h.n_images = r.u32();
  h.n_crops = r.u32();
  const auto n_layers = r.u32();
  if (h.n_crops == 0) throw Error(ErrorCode::CorruptDump, "dump declares zero crops");
  if (n_layers == 0) throw Error(ErrorCode::CorruptDump, "dump declares zero layers");
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    DumpLayer l;
    l.name = r.bytes(r.u16());
    l.kind = read_kind(r, ErrorCode::CorruptDump);
    l.shape.channels = r.u32();
    l.shape.height = r.u32();
    l.shape.width = r.u32();
    if (l.shape.size() == 0) throw Error(ErrorCode::CorruptDump, "layer '" + l.name + "' has an empty shape");
    h.layers.push_back(std::move(l));
  }
  return h;
}

RawDumpWriter::RawDumpWriter(std::ostream& out, RawDumpHeader header)
    : out_(out), header_(std::move(header)) {
  if (header_.n_crops == 0 || header_.layers.empty()) {
    throw Error(ErrorCode::InvalidShape, "dump needs at least one crop and one layer");
  }
  detail::LeWriter w(out_);
  w.bytes(kRawMagic);
  w.u32(kVersion);
  w.u32(header_.n_images);
  w.u32(header_.n_crops);
  w.u32(checked_u32(header_.layers.size(), "layer count"));
  for (const auto& l : header_.layers) {
    write_name(w, l.name);
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(checked_u32(l.shape.channels, "C"));
    w.u32(checked_u32(l.shape.height, "H"));
    w.u32(checked_u32(l.shape.width, "W"));
  }
  w.check("RAW1 header");
}

void RawDumpWriter::write_image(std::span<const float> record) {
  if (record.size() != header_.image_size()) {
    throw Error(ErrorCode::InvalidShape, "image record size does not match the dump layout");
  }
  if (written_ == header_.n_images) throw Error(ErrorCode::InvalidShape, "more records than declared");
  detail::LeWriter w(out_);
  w.f32s(record);
  w.check("RAW1 record");
  ++written_;
}

void RawDumpWriter::finish() {
  if (written_ != header_.n_images) {
    throw Error(ErrorCode::InvalidShape, "fewer records written than declared");
  }
  out_.flush();
}

void check_layout(const RawDumpHeader& header, const LayerTable& table) {
  if (header.layers.size() != table.size()) {
    throw Error(ErrorCode::LayoutMismatch,
                "dump has " + std::to_string(header.layers.size()) + " layers, table has " +
                    std::to_string(table.size()));
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& d = header.layers[i];
    const auto& t = table[i];
    const auto where = " (layer " + std::to_string(i) + " '" + t.name + "')";
    if (d.name != t.name) throw Error(ErrorCode::LayoutMismatch, "layer name differs: dump has '" + d.name + "'" + where);
    if (d.kind != t.kind) throw Error(ErrorCode::LayoutMismatch, "layer kind differs" + where);
    if (d.shape.channels != t.feature_count) throw Error(ErrorCode::LayoutMismatch, "channel count differs" + where);
    if (d.kind == LayerKind::Fc && (d.shape.height != 1 || d.shape.width != 1)) {
      throw Error(ErrorCode::LayoutMismatch, "fc layer must be 1x1" + where);
    }
  }
}

EmbeddingMatrix assemble_embedding(std::istream& dump, const LayerTable& table) {
  const auto header = read_raw_dump_header(dump);
  check_layout(header, table);

  const std::size_t n_features = table.total_features();
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(header.n_images) * n_features);

  detail::LeReader r(dump, ErrorCode::CorruptDump);
  std::vector<float> buffer;
  std::vector<std::vector<double>> pooled_crops(header.n_crops);
  for (std::uint32_t img = 0; img < header.n_images; ++img) {
    for (std::uint32_t crop = 0; crop < header.n_crops; ++crop) {
      auto& pooled = pooled_crops[crop];
      pooled.clear();
      pooled.reserve(n_features);
      for (const auto& layer : header.layers) {
        buffer.resize(layer.shape.size());
        r.f32s(buffer);
        const auto channel_means = spatial_average_pool(buffer, layer.shape);
        pooled.insert(pooled.end(), channel_means.begin(), channel_means.end());
      }
    }
    for (double v : crop_average(pooled_crops)) data.push_back(static_cast<float>(v));
  }
  if (!r.at_end()) throw Error(ErrorCode::CorruptDump, "trailing bytes after the last image record");
  return EmbeddingMatrix(table, header.n_images, std::move(data));
}

EmbeddingMatrix assemble_embedding(const std::filesystem::path& dump, const LayerTable& table) {
  std::ifstream in(dump, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dump '" + dump.string() + "'");
  return assemble_embedding(in, table);
}

void write_embedding(const EmbeddingMatrix& matrix, std::ostream& out) {
  detail::LeWriter w(out);
  w.bytes(kFexMagic);
  w.u32(kVersion);
  w.u32(checked_u32(matrix.n_images(), "n_images"));
  w.u32(checked_u32(matrix.n_features(), "n_features"));
  w.u32(checked_u32(matrix.layers().size(), "n_layers"));
  for (const auto& l : matrix.layers()) {
    write_name(w, l.name);
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(checked_u32(l.feature_count, "feature_count"));
  }
  w.f32s(matrix.data());
  w.check("FEX1");
}

EmbeddingMatrix read_embedding(std::istream& in) {
  detail::LeReader r(in, ErrorCode::CorruptFile);
  if (r.bytes(4) != kFexMagic) throw Error(ErrorCode::UnsupportedFormat, "not a FEX1 file (bad magic)");
  if (r.u32() != kVersion) throw Error(ErrorCode::UnsupportedFormat, "unsupported FEX1 version");
  const std::size_t n_images = r.u32();
  const std::size_t n_features = r.u32();
  const auto n_layers = r.u32();
  if (n_layers == 0) throw Error(ErrorCode::CorruptFile, "FEX1 file has an empty layer table");
  std::vector<LayerTable::Entry> entries;
  std::size_t declared = 0;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerTable::Entry e;
    e.name = r.bytes(r.u16());
    e.kind = read_kind(r, ErrorCode::CorruptFile);
    e.feature_count = r.u32();
    declared += e.feature_count;
    entries.push_back(std::move(e));
  }
  if (declared != n_features) {
    throw Error(ErrorCode::CorruptFile, "layer feature counts do not sum to n_features");
  }
  auto table = LayerTable::from_entries(entries);
  std::vector<float> data(n_images * n_features);
  r.f32s(data);
  if (!r.at_end()) throw Error(ErrorCode::CorruptFile, "payload longer than declared");
  return EmbeddingMatrix(std::move(table), n_images, std::move(data));
}

void save_embedding(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_embedding(matrix, out);
}

EmbeddingMatrix load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_embedding(in);
}

}  // namespace fexprobe
