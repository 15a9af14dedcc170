#pragma once

// CSV / JSON writers shared by the CLI commands. Numbers are written with
// the shortest round-trip representation so repeated runs produce
// byte-identical files.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fexprobe/analysis.hpp"
#include "fexprobe/labels.hpp"
#include "fexprobe/noise.hpp"

namespace fexprobe::cli {

using Json = nlohmann::ordered_json;

std::string format_number(double v);
std::string format_number(float v);

/// JSON number whose printed form is the shortest float representation.
Json json_number(float v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
void ensure_directory(const std::filesystem::path& dir);

std::string histogram_csv(const std::vector<KsHistogramBin>& bins);
std::string accumulated_curve_csv(const AccumulatedCurve& curve);
std::string avg_distance_csv(const AvgDistanceCurve& curve);
std::string retained_csv(const std::vector<std::vector<RetainedFeature>>& retained, const LabelTable& labels);

Json modality_json(const std::vector<ModalitySummary>& summaries, const LayerTable& layers);
Json pairs_json(const std::vector<PairEntry>& pairs, const LabelTable& labels);
std::string pairs_csv(const std::vector<PairEntry>& pairs, const LabelTable& labels);

}  // namespace fexprobe::cli
