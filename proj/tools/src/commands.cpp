#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fexprobe/analysis.hpp"
#include "fexprobe/embedding.hpp"
#include "fexprobe/error.hpp"
#include "fexprobe/ks_matrix.hpp"
#include "fexprobe/labels.hpp"
#include "fexprobe/layers.hpp"
#include "fexprobe/noise.hpp"
#include "fexprobe/synth.hpp"
#include "report_io.hpp"

namespace fexprobe::cli {
namespace {

namespace fs = std::filesystem;

LayerTable resolve_layers(const LayerSource& src, std::optional<std::size_t> n_features) {
  if (!src.preset.empty() && !src.layers_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--preset and --layers are mutually exclusive");
  }
  LayerTable table;
  if (!src.preset.empty()) {
    const auto preset = parse_preset(src.preset);
    if (!preset) throw Error(ErrorCode::InvalidArgument, "unknown preset '" + src.preset + "'");
    table = builtin_layer_table(*preset);
  } else if (!src.layers_path.empty()) {
    table = load_layer_table(src.layers_path);
  } else if (n_features) {
    table = LayerTable::from_entries({{"all", LayerKind::Conv, *n_features}});
  } else {
    throw Error(ErrorCode::InvalidArgument, "a layer table is required (--preset or --layers)");
  }
  if (n_features && table.total_features() != *n_features) {
    throw Error(ErrorCode::AlignmentError, "layer table has " + std::to_string(table.total_features()) +
                                               " features, input has " + std::to_string(*n_features));
  }
  return table;
}

// Class roster for inputs that only know dense class indices.
LabelTable resolve_roster(const fs::path& labels_path, std::size_t n_classes) {
  if (labels_path.empty()) {
    std::vector<std::uint32_t> ids(n_classes);
    std::iota(ids.begin(), ids.end(), 0u);
    return LabelTable::from_class_ids(ids);
  }
  auto labels = load_labels(labels_path);
  if (labels.n_classes() != n_classes) {
    throw Error(ErrorCode::AlignmentError, "labels define " + std::to_string(labels.n_classes()) +
                                               " classes, KS matrix has " + std::to_string(n_classes));
  }
  return labels;
}

void require_out(const fs::path& out) {
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
}

void warn_negative(const EmbeddingMatrix& m, std::ostream& log) {
  if (const auto n = m.count_negative(); n > 0) {
    log << "warning: embedding has " << n << " negative values; expected post-ReLU activations\n";
  }
}

std::string file_safe(const std::string& name) {
  std::string s = name;
  for (auto& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  }
  return s;
}

std::vector<std::size_t> layers_of_kind(const LayerTable& layers, LayerKind kind) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == kind) out.push_back(i);
  }
  return out;
}

std::string retention_csv(const PruneReport& report) {
  std::ostringstream s;
  s << "layer,kept_real_pct,kept_rand_pct\n";
  for (const auto& l : report.layers) {
    s << l.layer << ',' << format_number(l.kept_real_pct) << ',' << format_number(l.kept_rand_pct) << '\n';
  }
  return s.str();
}

void write_threshold_outputs(const ThresholdAnalysis& a, const LabelTable& roster, std::size_t n_rand,
                             double grid_step, const fs::path& out) {
  std::size_t kept = 0, total = 0;
  for (const auto& l : a.prune.layers) {
    kept += l.kept_real;
    total += l.total_pairs;
  }
  const auto& t = a.thresholds;
  write_json(out / "thresholds.json", Json{{"t_plus", t.t_plus},
                                           {"d_avg_at_t_plus", t.d_avg_at_t_plus},
                                           {"t_minus", t.t_minus},
                                           {"d_avg_at_t_minus", t.d_avg_at_t_minus},
                                           {"no_signal", a.no_signal},
                                           {"grid_step", grid_step},
                                           {"randomizations", n_rand},
                                           {"kept_pairs", kept},
                                           {"total_pairs", total}});
  write_text(out / "davg_pos.csv", avg_distance_csv(a.curve_positive));
  write_text(out / "davg_neg.csv", avg_distance_csv(a.curve_negative));
  write_text(out / "retention.csv", retention_csv(a.prune));
  write_text(out / "retained.csv", retained_csv(a.prune.retained, roster));
}

Family family_field(const Json& j, Family fallback) {
  if (!j.contains("family")) return fallback;
  const auto text = j.at("family").get<std::string>();
  const auto f = parse_family(text);
  if (!f) throw Error(ErrorCode::InvalidArgument, "unknown distribution family '" + text + "'");
  return *f;
}

SynthSpec parse_synth_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open synth spec '" + path.string() + "'");
  SynthSpec spec;
  try {
    const auto j = Json::parse(in);
    const auto& ipc = j.at("images_per_class");
    if (ipc.is_array()) {
      spec.images_per_class = ipc.get<std::vector<std::size_t>>();
    } else {
      spec.images_per_class.assign(j.at("n_classes").get<std::size_t>(), ipc.get<std::size_t>());
    }
    spec.n_features = j.at("n_features").get<std::size_t>();
    if (j.contains("layers")) {
      std::vector<LayerTable::Entry> entries;
      for (const auto& l : j.at("layers")) {
        const auto kind_text = l.value("kind", std::string("conv"));
        const auto kind = parse_layer_kind(kind_text);
        if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown layer kind '" + kind_text + "'");
        entries.push_back({l.at("name").get<std::string>(), *kind, l.at("feature_count").get<std::size_t>()});
      }
      spec.layers = LayerTable::from_entries(entries);
    }
    if (j.contains("base")) {
      const auto& b = j.at("base");
      spec.base.family = family_field(b, Family::Normal);
      spec.base.location = b.value("location", 0.0);
      spec.base.scale = b.value("scale", 1.0);
    }
    if (j.contains("planted")) {
      for (const auto& p : j.at("planted")) {
        PlantedPair pp;
        pp.feature = p.at("feature").get<std::size_t>();
        pp.class_index = p.at("class").get<std::size_t>();
        pp.family = family_field(p, Family::Normal);
        pp.shift = p.value("shift", 0.0);
        pp.scale = p.value("scale", 1.0);
        spec.planted.push_back(pp);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("invalid synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace

void cmd_assemble(const AssembleOptions& o, std::ostream& log) {
  require_out(o.out);
  LayerSource src = o.layers;
  if (src.preset.empty() && src.layers_path.empty()) src.preset = "vgg16";
  const auto table = resolve_layers(src, std::nullopt);
  const auto embedding = assemble_embedding(o.dump, table);
  warn_negative(embedding, log);
  save_embedding(embedding, o.out);
  log << "assembled " << embedding.n_images() << " images x " << embedding.n_features() << " features\n";
}

void cmd_analyze(const AnalyzeOptions& o, std::ostream& log) {
  require_out(o.out);
  const auto embedding = load_embedding(o.embedding);
  const auto labels = load_labels(o.labels);
  warn_negative(embedding, log);
  const auto& layers = embedding.layers();

  SweepOptions sweep;
  sweep.bins = o.bins;
  sweep.threads = o.threads;
  const auto ks = ks_sweep(embedding, labels, sweep);

  ensure_directory(o.out);
  save_ks_matrix(ks, o.out / "ks.ksm");

  ModalityOptions mo;
  mo.mode_bins = o.mode_bins;
  write_json(o.out / "summary.json",
             Json{{"n_images", embedding.n_images()},
                  {"n_features", ks.n_features()},
                  {"n_classes", ks.n_classes()},
                  {"bins", o.bins},
                  {"layers", modality_json(layer_modality_summary(ks, layers, mo), layers)}});

  const auto hist_dir = o.out / "histograms";
  ensure_directory(hist_dir);
  std::vector<std::size_t> all(layers.size());
  std::iota(all.begin(), all.end(), 0);
  write_text(hist_dir / "all.csv", histogram_csv(ks_histogram(ks, layers, all, o.hist_bins)));
  for (auto kind : {LayerKind::Conv, LayerKind::Fc}) {
    const auto group = layers_of_kind(layers, kind);
    if (group.empty()) continue;
    write_text(hist_dir / (std::string(to_string(kind)) + ".csv"),
               histogram_csv(ks_histogram(ks, layers, group, o.hist_bins)));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    write_text(hist_dir / ("layer_" + file_safe(layers[i].name) + ".csv"),
               histogram_csv(ks_histogram(ks, layers, {i}, o.hist_bins)));
  }

  for (auto side : {Side::Positive, Side::Negative}) {
    const auto dir = o.out / "curves" / std::string(to_string(side));
    ensure_directory(dir);
    for (std::size_t c = 0; c < ks.n_classes(); ++c) {
      write_text(dir / ("class_" + std::to_string(labels.classes()[c].id) + ".csv"),
                 accumulated_curve_csv(accumulated_curve(ks, c, side, o.curve_step)));
    }
  }

  write_json(o.out / "top_pairs.json",
             Json{{"k", o.top_k},
                  {"positive", pairs_json(top_pairs(ks, layers, o.top_k, Side::Positive), labels)},
                  {"negative", pairs_json(top_pairs(ks, layers, o.top_k, Side::Negative), labels)}});
  log << "analyzed " << ks.n_features() << " features x " << ks.n_classes() << " classes\n";
}

void cmd_baseline(const BaselineOptions& o, std::ostream& log) {
  require_out(o.out);
  if (o.repeats == 0) throw Error(ErrorCode::InvalidArgument, "--repeats must be at least 1");
  const auto embedding = load_embedding(o.embedding);
  const auto labels = load_labels(o.labels);
  SweepOptions sweep;
  sweep.bins = o.bins;
  sweep.threads = o.threads;
  ensure_directory(o.out);
  Json runs = Json::array();
  for (std::size_t r = 0; r < o.repeats; ++r) {
    const auto seed = randomization_seed(o.seed, r);
    const auto shuffled = randomize_labels(labels, seed);
    const auto ks = ks_sweep(embedding, shuffled, sweep);
    const auto labels_name = "labels_rand_" + std::to_string(r) + ".csv";
    const auto ks_name = "ks_rand_" + std::to_string(r) + ".ksm";
    save_labels(shuffled, o.out / labels_name);
    save_ks_matrix(ks, o.out / ks_name);
    runs.push_back(Json{{"repeat", r}, {"shuffle_seed", seed}, {"labels", labels_name}, {"ks", ks_name}});
  }
  write_json(o.out / "baseline.json", Json{{"seed", o.seed}, {"repeats", o.repeats}, {"runs", runs}});
  log << "wrote " << o.repeats << " randomized baseline(s)\n";
}

void cmd_threshold(const ThresholdOptions& o, std::ostream& log) {
  require_out(o.out);
  const bool from_embedding = !o.embedding.empty();
  if (from_embedding == !o.ks.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give either --embedding with --labels, or --ks with --ks-rand");
  }
  if (from_embedding) {
    const auto embedding = load_embedding(o.embedding);
    const auto labels = load_labels(o.labels);
    warn_negative(embedding, log);
    PipelineOptions po;
    po.seed = o.seed;
    po.repeats = o.repeats;
    po.grid_step = o.grid_step;
    po.sweep.bins = o.bins;
    po.sweep.threads = o.threads;
    const auto result = threshold_pipeline(embedding, labels, po);
    ensure_directory(o.out);
    save_ks_matrix(result.ks_real, o.out / "ks.ksm");
    for (std::size_t r = 0; r < result.ks_randomized.size(); ++r) {
      save_ks_matrix(result.ks_randomized[r], o.out / ("ks_rand_" + std::to_string(r) + ".ksm"));
    }
    write_threshold_outputs(result.analysis, labels, result.ks_randomized.size(), o.grid_step, o.out);
    log << "t+ = " << result.analysis.thresholds.t_plus << ", t- = " << result.analysis.thresholds.t_minus
        << (result.analysis.no_signal ? " (no signal above the randomized baseline)" : "") << '\n';
    return;
  }
  if (o.ks_rand.empty()) throw Error(ErrorCode::InvalidArgument, "--ks-rand is required with --ks");
  const auto real = load_ks_matrix(o.ks);
  std::vector<KSMatrix> randomized;
  for (const auto& p : o.ks_rand) randomized.push_back(load_ks_matrix(p));
  const auto layers = resolve_layers(o.layers, real.n_features());
  const auto roster = resolve_roster(o.labels, real.n_classes());
  const auto analysis = analyze_thresholds(real, randomized, layers, o.grid_step);
  ensure_directory(o.out);
  write_threshold_outputs(analysis, roster, randomized.size(), o.grid_step, o.out);
  log << "t+ = " << analysis.thresholds.t_plus << ", t- = " << analysis.thresholds.t_minus
      << (analysis.no_signal ? " (no signal above the randomized baseline)" : "") << '\n';
}

void cmd_prune(const PruneOptions& o, std::ostream& log) {
  require_out(o.out);
  const auto ks = load_ks_matrix(o.ks);
  const auto layers = resolve_layers(o.layers, ks.n_features());
  const auto roster = resolve_roster(o.labels, ks.n_classes());
  const auto result = prune(ks, o.t_plus, o.t_minus, layers);
  ensure_directory(o.out);
  std::ostringstream s;
  s << "layer,total_pairs,kept,kept_pct\n";
  for (const auto& l : result.layers) {
    s << l.layer << ',' << l.total_pairs << ',' << l.kept << ',' << format_number(l.kept_pct) << '\n';
  }
  write_text(o.out / "retention.csv", s.str());
  write_text(o.out / "retained.csv", retained_csv(result.per_class, roster));
  log << "kept " << result.kept << " of " << result.total_pairs << " pairs\n";
}

void cmd_synth(const SynthOptions& o, std::ostream& log) {
  require_out(o.out);
  const auto spec = parse_synth_spec(o.spec);
  const auto data = generate_synthetic(spec, o.seed, o.threads);
  ensure_directory(o.out);
  save_embedding(data.embedding, o.out / "embedding.fex");
  save_labels(data.labels, o.out / "labels.csv");
  Json planted = Json::array();
  for (const auto& t : data.truth) {
    planted.push_back(Json{{"feature_id", t.feature}, {"class_id", t.class_index}, {"expected_sign", t.expected_sign}});
  }
  write_json(o.out / "manifest.json", Json{{"seed", o.seed},
                                           {"n_images", data.embedding.n_images()},
                                           {"n_features", data.embedding.n_features()},
                                           {"n_classes", data.labels.n_classes()},
                                           {"embedding", "embedding.fex"},
                                           {"labels", "labels.csv"},
                                           {"planted", planted}});
  log << "generated " << data.embedding.n_images() << " images x " << data.embedding.n_features()
      << " features, " << data.truth.size() << " planted pair(s)\n";
}

void cmd_report(const ReportOptions& o, std::ostream& out) {
  const auto ks = load_ks_matrix(o.ks);
  const auto layers = resolve_layers(o.layers, ks.n_features());
  const auto roster = resolve_roster(o.labels, ks.n_classes());

  Side side;
  if (o.side == "positive") {
    side = Side::Positive;
  } else if (o.side == "negative") {
    side = Side::Negative;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--side must be positive or negative");
  }
  PairFilter filter;
  for (const auto& name : o.layer_filter) {
    if (const auto kind = parse_layer_kind(name)) {
      const auto group = layers_of_kind(layers, *kind);
      filter.layers.insert(filter.layers.end(), group.begin(), group.end());
      continue;
    }
    const auto* spec = layers.find(name);
    if (!spec) throw Error(ErrorCode::InvalidSelection, "unknown layer '" + name + "'");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].name == name) filter.layers.push_back(i);
    }
  }
  if (!o.layer_filter.empty() && filter.layers.empty()) {
    throw Error(ErrorCode::InvalidSelection, "layer filter selects no layers");
  }
  if (o.class_id) {
    const auto idx = roster.index_of_id(*o.class_id);
    if (!idx) throw Error(ErrorCode::UnknownClass, "unknown class id " + std::to_string(*o.class_id));
    filter.class_index = *idx;
  }
  const auto pairs = top_pairs(ks, layers, o.top_k, side, filter);

  const auto pad = [](std::string text, std::size_t width) {
    text.resize(std::max(text.size() + 1, width), ' ');
    return text;
  };
  out << pad("rank", 6) << pad("feature", 9) << pad("layer", 12) << pad("class", 22) << "d_ks\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const auto& cls = roster.classes()[p.class_index];
    const auto id = std::to_string(cls.id);
    out << pad(std::to_string(i + 1), 6) << pad(std::to_string(p.feature), 9) << pad(p.layer, 12)
        << pad(cls.name == id ? id : id + " " + cls.name, 22) << format_number(p.value) << '\n';
  }

  if (o.out.empty()) return;
  ensure_directory(o.out);
  write_text(o.out / "top_pairs.csv", pairs_csv(pairs, roster));
  write_json(o.out / "top_pairs.json",
             Json{{"k", o.top_k}, {"side", o.side}, {"pairs", pairs_json(pairs, roster)}});

  std::ostringstream digest;
  digest << "layer,total_pairs,n_positive,n_negative,n_zero,max,min\n";
  for (const auto& l : layers) {
    std::size_t pos = 0, neg = 0, zero = 0;
    float hi = -1.0f, lo = 1.0f;
    for (std::size_t f = l.offset; f < l.offset + l.feature_count; ++f) {
      for (float v : ks.feature_row(f)) {
        pos += v > 0.0f;
        neg += v < 0.0f;
        zero += v == 0.0f;
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
    }
    digest << l.name << ',' << l.feature_count * ks.n_classes() << ',' << pos << ',' << neg << ',' << zero << ','
           << format_number(hi) << ',' << format_number(lo) << '\n';
  }
  write_text(o.out / "layers.csv", digest.str());
}

}  // namespace fexprobe::cli
