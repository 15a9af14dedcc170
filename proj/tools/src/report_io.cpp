#include "report_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fexprobe/error.hpp"

namespace fexprobe::cli {

namespace {

template <typename T>
std::string shortest(T v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::string format_number(double v) { return shortest(v); }
std::string format_number(float v) { return shortest(v); }

Json json_number(float v) {
  const auto text = shortest(v);
  double d = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), d);
  return d;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "cannot create directory '" + dir.string() + "'");
  }
}

std::string histogram_csv(const std::vector<KsHistogramBin>& bins) {
  std::ostringstream s;
  s << "bin_lo,bin_hi,percent\n";
  for (const auto& b : bins) {
    s << format_number(b.lo) << ',' << format_number(b.hi) << ',' << format_number(b.percent) << '\n';
  }
  return s.str();
}

std::string accumulated_curve_csv(const AccumulatedCurve& curve) {
  std::ostringstream s;
  s << "x,count\n";
  for (std::size_t k = 0; k < curve.x.size(); ++k) {
    s << format_number(curve.x[k]) << ',' << curve.counts[k] << '\n';
  }
  return s.str();
}

std::string avg_distance_csv(const AvgDistanceCurve& curve) {
  std::ostringstream s;
  s << "x,d_avg\n";
  for (std::size_t k = 0; k < curve.x.size(); ++k) {
    s << format_number(curve.x[k]) << ',' << format_number(curve.d_avg[k]) << '\n';
  }
  return s.str();
}

std::string retained_csv(const std::vector<std::vector<RetainedFeature>>& retained, const LabelTable& labels) {
  std::ostringstream s;
  s << "class_id,feature_id,sign,d_ks\n";
  for (std::size_t c = 0; c < retained.size(); ++c) {
    const auto id = labels.classes()[c].id;
    for (const auto& r : retained[c]) {
      s << id << ',' << r.feature << ',' << (r.sign > 0 ? "+" : "-") << ',' << format_number(r.value) << '\n';
    }
  }
  return s.str();
}

Json modality_json(const std::vector<ModalitySummary>& summaries, const LayerTable& layers) {
  auto side = [](const SideSummary& s) -> Json {
    if (!s.present) return nullptr;
    return Json{{"mode", s.mode}, {"lower", s.lower}, {"upper", s.upper}};
  };
  Json out = Json::array();
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& m = summaries[i];
    out.push_back(Json{{"layer", m.layer},
                       {"kind", std::string(to_string(layers[i].kind))},
                       {"n_positive", m.n_positive},
                       {"n_negative", m.n_negative},
                       {"n_zero", m.n_zero},
                       {"positive", side(m.positive)},
                       {"negative", side(m.negative)}});
  }
  return out;
}

Json pairs_json(const std::vector<PairEntry>& pairs, const LabelTable& labels) {
  Json out = Json::array();
  for (const auto& p : pairs) {
    const auto& cls = labels.classes()[p.class_index];
    out.push_back(Json{{"feature_id", p.feature},
                       {"layer", p.layer},
                       {"class_id", cls.id},
                       {"class_name", cls.name},
                       {"d_ks", json_number(p.value)}});
  }
  return out;
}

std::string pairs_csv(const std::vector<PairEntry>& pairs, const LabelTable& labels) {
  std::ostringstream s;
  s << "rank,feature_id,layer,class_id,class_name,d_ks\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const auto& cls = labels.classes()[p.class_index];
    s << i + 1 << ',' << p.feature << ',' << csv_field(p.layer) << ',' << cls.id << ',' << csv_field(cls.name) << ','
      << format_number(p.value) << '\n';
  }
  return s.str();
}

}  // namespace fexprobe::cli
