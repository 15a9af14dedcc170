#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fexprobe::cli {

/// Where layer names come from for inputs that do not carry them (KSM1).
struct LayerSource {
  std::string preset;                 // vgg16 | vgg19
  std::filesystem::path layers_path;  // CSV layer table
};

struct AssembleOptions {
  std::filesystem::path dump;
  LayerSource layers;
  std::filesystem::path out;
};

struct AnalyzeOptions {
  std::filesystem::path embedding;
  std::filesystem::path labels;
  std::filesystem::path out;
  std::size_t bins = 100;
  std::size_t threads = 0;
  std::size_t top_k = 10;
  double curve_step = 0.01;
  std::size_t hist_bins = 100;
  std::size_t mode_bins = 200;
};

struct BaselineOptions {
  std::filesystem::path embedding;
  std::filesystem::path labels;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t bins = 100;
  std::size_t threads = 0;
};

struct ThresholdOptions {
  // Either an embedding + labels (sweeps run here) or precomputed matrices.
  std::filesystem::path embedding;
  std::filesystem::path labels;
  std::filesystem::path ks;
  std::vector<std::filesystem::path> ks_rand;
  LayerSource layers;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  double grid_step = 0.001;
  std::size_t bins = 100;
  std::size_t threads = 0;
};

struct PruneOptions {
  std::filesystem::path ks;
  std::filesystem::path labels;
  LayerSource layers;
  double t_plus = 0.0;
  double t_minus = 0.0;
  std::filesystem::path out;
};

struct SynthOptions {
  std::filesystem::path spec;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::filesystem::path out;
};

struct ReportOptions {
  std::filesystem::path ks;
  std::filesystem::path labels;
  LayerSource layers;
  std::size_t top_k = 10;
  std::string side = "positive";
  std::vector<std::string> layer_filter;  // layer names or kinds (conv, fc)
  std::optional<std::uint32_t> class_id;
  std::filesystem::path out;  // optional: CSV/JSON digests
};

// Each command throws fexprobe::Error on failure; `log` receives
// human-readable progress and warnings.
void cmd_assemble(const AssembleOptions& o, std::ostream& log);
void cmd_analyze(const AnalyzeOptions& o, std::ostream& log);
void cmd_baseline(const BaselineOptions& o, std::ostream& log);
void cmd_threshold(const ThresholdOptions& o, std::ostream& log);
void cmd_prune(const PruneOptions& o, std::ostream& log);
void cmd_synth(const SynthOptions& o, std::ostream& log);
void cmd_report(const ReportOptions& o, std::ostream& out);

}  // namespace fexprobe::cli
