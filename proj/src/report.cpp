#include "phantom/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "phantom/error.hpp"
#include "phantom/io.hpp"

namespace phantom {

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

FidelityStats force_fidelity(std::span<const ForcePairs> traces) {
  std::vector<double> cos_frames, amp_frames, cos_traces, amp_traces;
  FidelityStats stats;

  for (const auto& pairs : traces) {
    if (pairs.truth.size() != pairs.measured.size()) {
      throw InvariantError("force_fidelity: true and measured sequences are not aligned");
    }
    ForceVec truth_sum, measured_sum;
    std::int64_t used = 0;
    for (std::size_t i = 0; i < pairs.truth.size(); ++i) {
      const ForceVec& t = pairs.truth[i];
      const ForceVec& m = pairs.measured[i];
      if (!(t.magnitude() > kDegenerateEpsilon)) continue;
      amp_frames.push_back(amplitude_ratio(t, m));
      if (m.magnitude() > kDegenerateEpsilon) {
        cos_frames.push_back(cosine_similarity(t, m));
      } else {
        ++stats.degenerate_frames;
      }
      truth_sum += t;
      measured_sum += m;
      ++used;
    }
    if (used == 0) continue;
    const ForceVec truth_mean = truth_sum * (1.0 / static_cast<double>(used));
    const ForceVec measured_mean = measured_sum * (1.0 / static_cast<double>(used));
    if (!(truth_mean.magnitude() > kDegenerateEpsilon)) continue;
    amp_traces.push_back(amplitude_ratio(truth_mean, measured_mean));
    if (measured_mean.magnitude() > kDegenerateEpsilon) {
      cos_traces.push_back(cosine_similarity(truth_mean, measured_mean));
      stats.max_angle_deg =
          std::max(stats.max_angle_deg, angle_between_deg(truth_mean, measured_mean));
    }
  }

  stats.cosine_frames = summarize(cos_frames);
  stats.amplitude_frames = summarize(amp_frames);
  stats.cosine_traces = summarize(cos_traces);
  stats.amplitude_traces = summarize(amp_traces);
  return stats;
}

namespace {

nlohmann::json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

Summary summary_from(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("count").get<std::int64_t>()};
}

std::string cell(const Summary& s, int precision) {
  return fmt::format("{:.{}f} ({:.{}f})", s.mean, precision, s.std, precision);
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : report.cases) {
    const auto& f = c.fidelity;
    cases.push_back(
        {{"label", c.label},
         {"fidelity",
          {{"cosine_traces", summary_json(f.cosine_traces)},
           {"amplitude_traces", summary_json(f.amplitude_traces)},
           {"cosine_frames", summary_json(f.cosine_frames)},
           {"amplitude_frames", summary_json(f.amplitude_frames)},
           {"max_angle_deg", f.max_angle_deg},
           {"degenerate_frames", f.degenerate_frames}}},
         {"precision", summary_json(c.precision)},
         {"recall", summary_json(c.recall)},
         {"f1", c.f1 ? summary_json(*c.f1) : nlohmann::json(nullptr)}});
  }
  return {{"format", "phantom-report"},
          {"version", 1},
          {"cases", cases},
          {"provenance",
           {{"config_hash", report.provenance.config_hash},
            {"seeds", report.provenance.seeds},
            {"tool_version", report.provenance.tool_version}}}};
}

MetricsReport report_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "phantom-report") throw ConfigError("not a report document");
    MetricsReport r;
    for (const auto& c : doc.at("cases")) {
      CaseReport cr;
      cr.label = c.at("label");
      const auto& f = c.at("fidelity");
      cr.fidelity.cosine_traces = summary_from(f.at("cosine_traces"));
      cr.fidelity.amplitude_traces = summary_from(f.at("amplitude_traces"));
      cr.fidelity.cosine_frames = summary_from(f.at("cosine_frames"));
      cr.fidelity.amplitude_frames = summary_from(f.at("amplitude_frames"));
      cr.fidelity.max_angle_deg = f.at("max_angle_deg");
      cr.fidelity.degenerate_frames = f.at("degenerate_frames");
      cr.precision = summary_from(c.at("precision"));
      cr.recall = summary_from(c.at("recall"));
      if (!c.at("f1").is_null()) cr.f1 = summary_from(c.at("f1"));
      r.cases.push_back(std::move(cr));
    }
    const auto& p = doc.at("provenance");
    r.provenance.config_hash = p.at("config_hash");
    r.provenance.seeds = p.at("seeds").get<std::vector<std::uint64_t>>();
    r.provenance.tool_version = p.at("tool_version");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report document: ") + e.what());
  }
}

std::string report_table(const MetricsReport& report) {
  std::string out;
  out += fmt::format("{:<12} {:<20} {:<20} {:<14} {:<14} {:<14}\n", "Cases", "Cos. Sim.",
                     "Amp. Rat.", "P", "R", "F1");
  out += fmt::format("{:<12} {:<20} {:<20} {:<14} {:<14} {:<14}\n", "", "mu (sigma)", "mu (sigma)",
                     "mu (sigma)", "mu (sigma)", "mu (sigma)");
  for (const auto& c : report.cases) {
    out += fmt::format("{:<12} {:<20} {:<20} {:<14} {:<14} {:<14}\n", c.label,
                       cell(c.fidelity.cosine_traces, 4), cell(c.fidelity.amplitude_traces, 4),
                       cell(c.precision, 2), cell(c.recall, 2), c.f1 ? cell(*c.f1, 2) : "--");
  }
  out += "\nPer-frame pooled fidelity and largest per-trace deviation:\n";
  for (const auto& c : report.cases) {
    out += fmt::format("{:<12} cos {} amp {} max angle {:.1f} deg\n", c.label,
                       cell(c.fidelity.cosine_frames, 4), cell(c.fidelity.amplitude_frames, 4),
                       c.fidelity.max_angle_deg);
  }
  out += fmt::format("\nconfig {}  seeds", report.provenance.config_hash);
  for (auto s : report.provenance.seeds) out += fmt::format(" {}", s);
  out += fmt::format("  version {}\n", report.provenance.tool_version);
  return out;
}

std::vector<std::filesystem::path> emit_report(const MetricsReport& report,
                                               const std::filesystem::path& dir,
                                               const SimTrace* trace) {
  std::vector<std::filesystem::path> written;
  write_file_atomic(dir / "report.txt", report_table(report));
  written.push_back(dir / "report.txt");
  write_file_atomic(dir / "report.json", report_to_json(report).dump(2) + "\n");
  written.push_back(dir / "report.json");
  if (trace) {
    write_file_atomic(dir / "plot.csv", plot_csv(*trace));
    written.push_back(dir / "plot.csv");
  }
  return written;
}

}  // namespace phantom
