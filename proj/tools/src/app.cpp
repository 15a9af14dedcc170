#include "app.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fexprobe/error.hpp"
#include "report_io.hpp"

namespace fexprobe::cli {
namespace {

constexpr int kUsageExit = 1;

void error_line(std::ostream& err, std::string_view name, int code, const std::string& message) {
  err << Json{{"error", name}, {"exit_code", code}, {"message", message}}.dump() << '\n';
}

void add_layer_source(CLI::App* cmd, LayerSource& src) {
  cmd->add_option("--preset", src.preset, "Built-in layer table")->check(CLI::IsMember({"vgg16", "vgg19"}));
  cmd->add_option("--layers", src.layers_path, "Layer table CSV (name,kind,feature_count)")
      ;
}

void add_threads(CLI::App* cmd, std::size_t& threads) {
  cmd->add_option("--threads", threads, "Worker threads (default: FEXPROBE_THREADS or all cores)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-feature, per-class KS analysis of CNN embeddings", "fexprobe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fexprobe 0.1.0");

  AssembleOptions assemble;
  auto* c_assemble = app.add_subcommand("assemble", "Pool and crop-average a RAW1 dump into an embedding");
  c_assemble->add_option("dump", assemble.dump, "RAW1 activation dump")->required();
  add_layer_source(c_assemble, assemble.layers);
  c_assemble->add_option("--out", assemble.out, "Output embedding (FEX1)")->required();

  AnalyzeOptions analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Signed KS sweep plus summaries, histograms, curves, top pairs");
  c_analyze->add_option("embedding", analyze.embedding, "Embedding (FEX1)")->required();
  c_analyze->add_option("--labels", analyze.labels, "Labels CSV")->required();
  c_analyze->add_option("--out", analyze.out, "Output directory")->required();
  c_analyze->add_option("--bins", analyze.bins, "EDF bins per KS value")->capture_default_str();
  c_analyze->add_option("--top-k", analyze.top_k, "Pairs per side in top_pairs.json")->capture_default_str();
  c_analyze->add_option("--curve-step", analyze.curve_step, "Accumulated curve grid step")->capture_default_str();
  c_analyze->add_option("--hist-bins", analyze.hist_bins, "Bins of the reported histograms")->capture_default_str();
  c_analyze->add_option("--mode-bins", analyze.mode_bins, "Bins across [-1,1] for mode estimation")
      ->capture_default_str();
  add_threads(c_analyze, analyze.threads);

  BaselineOptions baseline;
  auto* c_baseline = app.add_subcommand("baseline", "KS sweeps under shuffled labels");
  c_baseline->add_option("embedding", baseline.embedding, "Embedding (FEX1)")->required();
  c_baseline->add_option("--labels", baseline.labels, "Labels CSV")->required();
  c_baseline->add_option("--out", baseline.out, "Output directory")->required();
  c_baseline->add_option("--seed", baseline.seed, "Shuffle seed")->capture_default_str();
  c_baseline->add_option("--repeats", baseline.repeats, "Number of shuffles")->capture_default_str();
  c_baseline->add_option("--bins", baseline.bins, "EDF bins per KS value")->capture_default_str();
  add_threads(c_baseline, baseline.threads);

  ThresholdOptions threshold;
  auto* c_threshold = app.add_subcommand("threshold", "Noise thresholds t+/t- and pruning against shuffled labels");
  c_threshold->add_option("--embedding", threshold.embedding, "Embedding (FEX1); runs all sweeps")
      ;
  c_threshold->add_option("--labels", threshold.labels, "Labels CSV");
  c_threshold->add_option("--ks", threshold.ks, "Precomputed real-label KS matrix (KSM1)");
  c_threshold->add_option("--ks-rand", threshold.ks_rand, "Precomputed shuffled-label KS matrices")
      ;
  add_layer_source(c_threshold, threshold.layers);
  c_threshold->add_option("--out", threshold.out, "Output directory")->required();
  c_threshold->add_option("--seed", threshold.seed, "Shuffle seed")->capture_default_str();
  c_threshold->add_option("--repeats", threshold.repeats, "Number of shuffles")->capture_default_str();
  c_threshold->add_option("--grid-step", threshold.grid_step, "Threshold search grid step")->capture_default_str();
  c_threshold->add_option("--bins", threshold.bins, "EDF bins per KS value")->capture_default_str();
  add_threads(c_threshold, threshold.threads);

  PruneOptions prune_opts;
  auto* c_prune = app.add_subcommand("prune", "Keep pairs with D >= t+ or D <= t-");
  c_prune->add_option("ks", prune_opts.ks, "KS matrix (KSM1)")->required();
  c_prune->add_option("--t-plus", prune_opts.t_plus, "Positive threshold")->required();
  c_prune->add_option("--t-minus", prune_opts.t_minus, "Negative threshold")->required();
  c_prune->add_option("--labels", prune_opts.labels, "Labels CSV (class ids)");
  add_layer_source(c_prune, prune_opts.layers);
  c_prune->add_option("--out", prune_opts.out, "Output directory")->required();

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic embedding with planted pairs");
  c_synth->add_option("spec", synth.spec, "Synth spec (JSON)")->required();
  c_synth->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  add_threads(c_synth, synth.threads);

  ReportOptions report;
  auto* c_report = app.add_subcommand("report", "Top pairs and per-layer digests of a KS matrix");
  c_report->add_option("ks", report.ks, "KS matrix (KSM1)")->required();
  c_report->add_option("--labels", report.labels, "Labels CSV (class ids and names)");
  add_layer_source(c_report, report.layers);
  c_report->add_option("-k,--top-k", report.top_k, "Number of pairs")->capture_default_str();
  c_report->add_option("--side", report.side, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}))
      ->capture_default_str();
  c_report->add_option("--layer", report.layer_filter, "Restrict to layer names or kinds (conv, fc)");
  c_report->add_option("--class", report.class_id, "Restrict to one class id");
  c_report->add_option("--out", report.out, "Also write CSV/JSON digests here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "fexprobe 0.1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    error_line(err, "UsageError", kUsageExit, e.what());
    return kUsageExit;
  }

  try {
    if (*c_assemble) cmd_assemble(assemble, err);
    if (*c_analyze) cmd_analyze(analyze, err);
    if (*c_baseline) cmd_baseline(baseline, err);
    if (*c_threshold) cmd_threshold(threshold, err);
    if (*c_prune) cmd_prune(prune_opts, err);
    if (*c_synth) cmd_synth(synth, err);
    if (*c_report) cmd_report(report, out);
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    error_line(err, error_code_name(e.code()), code, e.what());
    return code;
  } catch (const std::bad_alloc&) {
    error_line(err, "OutOfMemory", 3, "allocation failed");
    return 3;
  }
  return 0;
}

}  // namespace fexprobe::cli
