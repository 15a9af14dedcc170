#include "fexprobe/ks_matrix.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "binary_io.hpp"
#include "fexprobe/error.hpp"

namespace fexprobe {
namespace {
constexpr std::string_view kMagic = "KSM1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

KSMatrix::KSMatrix(std::size_t n_features, std::size_t n_classes)
    : n_features_(n_features), n_classes_(n_classes), values_(n_features * n_classes, 0.0f) {}

KSMatrix::KSMatrix(std::size_t n_features, std::size_t n_classes, std::vector<float> values)
    : n_features_(n_features), n_classes_(n_classes), values_(std::move(values)) {
  if (values_.size() != n_features_ * n_classes_) {
    throw Error(ErrorCode::InvalidShape, "KS matrix size does not match n_features x n_classes");
  }
  for (float v : values_) {
    if (!(v >= -1.0f && v <= 1.0f)) throw Error(ErrorCode::InvalidArgument, "KS value outside [-1, 1]");
  }
}

std::vector<float> KSMatrix::class_column(std::size_t cls) const {
  std::vector<float> col(n_features_);
  for (std::size_t f = 0; f < n_features_; ++f) col[f] = at(f, cls);
  return col;
}

void write_ks_matrix(const KSMatrix& ks, std::ostream& out) {
  if (ks.n_features() > std::numeric_limits<std::uint32_t>::max() ||
      ks.n_classes() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "KS matrix dimensions exceed u32");
  }
  detail::LeWriter w(out);
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(ks.n_features()));
  w.u32(static_cast<std::uint32_t>(ks.n_classes()));
  w.f32s(ks.values());
  w.check("KSM1");
}

KSMatrix read_ks_matrix(std::istream& in) {
  detail::LeReader r(in, ErrorCode::CorruptFile);
  if (r.bytes(4) != kMagic) throw Error(ErrorCode::UnsupportedFormat, "not a KSM1 file (bad magic)");
  if (r.u32() != kVersion) throw Error(ErrorCode::UnsupportedFormat, "unsupported KSM1 version");
  const std::size_t n_features = r.u32();
  const std::size_t n_classes = r.u32();
  std::vector<float> values(n_features * n_classes);
  r.f32s(values);
  if (!r.at_end()) throw Error(ErrorCode::CorruptFile, "payload longer than declared");
  try {
    return KSMatrix(n_features, n_classes, std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptFile, e.what());
  }
}

void save_ks_matrix(const KSMatrix& ks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_ks_matrix(ks, out);
}

KSMatrix load_ks_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_ks_matrix(in);
}

}  // namespace fexprobe
