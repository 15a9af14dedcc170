#include "fexprobe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fexprobe/error.hpp"
#include "fexprobe/parallel.hpp"
#include "fexprobe/random.hpp"

namespace fexprobe {
namespace {

constexpr std::size_t kFeatureBlock = 16;

// Box-Muller with a cached second variate.
class NormalSource {
 public:
  explicit NormalSource(Xoshiro256& rng) : rng_(rng) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = rng_.uniform();
    while (u1 <= 0.0) u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  Xoshiro256& rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double standard_draw(Family family, Xoshiro256& rng, NormalSource& normal) {
  switch (family) {
    case Family::Normal: return normal.next();
    case Family::Lognormal: return std::exp(normal.next());
    case Family::Uniform: return rng.uniform();
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Normal: return "normal";
    case Family::Lognormal: return "lognormal";
    case Family::Uniform: return "uniform";
  }
  return "normal";
}

std::optional<Family> parse_family(std::string_view text) noexcept {
  if (text == "normal") return Family::Normal;
  if (text == "lognormal") return Family::Lognormal;
  if (text == "uniform") return Family::Uniform;
  return std::nullopt;
}

std::size_t SynthSpec::n_images() const noexcept {
  std::size_t n = 0;
  for (auto c : images_per_class) n += c;
  return n;
}

void SynthSpec::validate() const {
  if (images_per_class.empty()) throw Error(ErrorCode::InvalidArgument, "synth spec has no classes");
  for (auto c : images_per_class) {
    if (c == 0) throw Error(ErrorCode::InvalidArgument, "synth spec has an empty class");
  }
  if (n_features == 0) throw Error(ErrorCode::InvalidArgument, "synth spec has no features");
  if (layers && layers->total_features() != n_features) {
    throw Error(ErrorCode::InvalidArgument, "synth layer table does not sum to n_features");
  }
  if (!std::isfinite(base.location) || !std::isfinite(base.scale)) {
    throw Error(ErrorCode::InvalidArgument, "base distribution parameters must be finite");
  }
  for (const auto& p : planted) {
    if (p.feature >= n_features || p.class_index >= n_classes()) {
      throw Error(ErrorCode::InvalidArgument, "planted pair references an invalid feature or class");
    }
    if (!std::isfinite(p.shift) || !std::isfinite(p.scale)) {
      throw Error(ErrorCode::InvalidArgument, "planted shift and scale must be finite");
    }
  }
}

SynthData generate_synthetic(const SynthSpec& spec, std::uint64_t seed, std::size_t threads) {
  spec.validate();
  const std::size_t n_images = spec.n_images();
  const std::size_t n_features = spec.n_features;
  const std::size_t n_classes = spec.n_classes();

  std::vector<std::uint32_t> row_class;
  row_class.reserve(n_images);
  for (std::size_t c = 0; c < n_classes; ++c) {
    row_class.insert(row_class.end(), spec.images_per_class[c], static_cast<std::uint32_t>(c));
  }

  // planted_for[f]: per-class planted distribution (last one wins).
  std::vector<std::vector<const PlantedPair*>> planted_for(n_features);
  for (const auto& p : spec.planted) {
    auto& slot = planted_for[p.feature];
    if (slot.empty()) slot.assign(n_classes, nullptr);
    slot[p.class_index] = &p;
  }

  std::vector<float> data(n_images * n_features);
  const std::size_t n_blocks = (n_features + kFeatureBlock - 1) / kFeatureBlock;
  parallel_for(n_blocks, threads, [&](std::size_t block) {
    const std::size_t f0 = block * kFeatureBlock;
    const std::size_t width = std::min(kFeatureBlock, n_features - f0);
    std::vector<float> columns(width * n_images);
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t f = f0 + j;
      Xoshiro256 rng(derive_seed(seed, f));
      NormalSource normal(rng);
      const auto& planted = planted_for[f];
      for (std::size_t i = 0; i < n_images; ++i) {
        const PlantedPair* p = planted.empty() ? nullptr : planted[row_class[i]];
        double v = 0.0;
        if (p != nullptr) {
          v = spec.base.location + p->shift + p->scale * standard_draw(p->family, rng, normal);
        } else {
          v = spec.base.location + spec.base.scale * standard_draw(spec.base.family, rng, normal);
        }
        columns[j * n_images + i] = static_cast<float>(v);
      }
    }
    for (std::size_t i = 0; i < n_images; ++i) {
      float* row = data.data() + i * n_features + f0;
      for (std::size_t j = 0; j < width; ++j) row[j] = columns[j * n_images + i];
    }
  });

  LayerTable layers = spec.layers ? *spec.layers
                                  : LayerTable::from_entries({{"synth", LayerKind::Conv, n_features}});
  SynthData out{EmbeddingMatrix(std::move(layers), n_images, std::move(data)),
                LabelTable::from_class_ids(row_class), {}};
  for (const auto& p : spec.planted) {
    const int sign = p.shift > 0.0 ? 1 : (p.shift < 0.0 ? -1 : 0);
    out.truth.push_back({p.feature, p.class_index, sign});
  }
  return out;
}

}  // namespace fexprobe
