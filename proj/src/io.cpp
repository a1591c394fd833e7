#include "phantom/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "phantom/error.hpp"

namespace phantom {

std::string format_double(double v) { return fmt::format("{}", v); }

void write_file_atomic(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

/// Calls `row(fields, line_no)` for each data line after checking the header.
template <typename RowFn>
void for_each_row(const std::string& text, const std::string& expected_header, RowFn row) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(expected_header, 0) != 0) {
    throw ConfigError("csv: unexpected header '" + line + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    row(split_fields(line), line_no);
  }
}

void append_vec(std::string& out, const ForceVec& v) {
  out += format_double(v.fx);
  out += ',';
  out += format_double(v.fy);
  out += ',';
  out += format_double(v.fz);
}

constexpr const char* kSensorHeader = "frame,time_s,true_fx,true_fy,true_fz,meas_fx,meas_fy,meas_fz";
constexpr const char* kSimHeader =
    "frame,time_s,cmd_n,real_fx,real_fy,real_fz,meas_fx,meas_fy,meas_fz,events";

}  // namespace

std::string sensor_trace_csv(const std::vector<SensorFrame>& frames) {
  std::string out = kSensorHeader;
  out += '\n';
  for (const auto& f : frames) {
    out += std::to_string(f.frame_index);
    out += ',';
    out += format_double(f.time_s);
    out += ',';
    append_vec(out, f.true_force);
    out += ',';
    append_vec(out, f.measured_force);
    out += '\n';
  }
  return out;
}

std::vector<SensorFrame> parse_sensor_trace_csv(const std::string& text) {
  std::vector<SensorFrame> frames;
  for_each_row(text, kSensorHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
    if (f.size() != 8) throw ConfigError("csv line " + std::to_string(ln) + ": expected 8 fields");
    SensorFrame s;
    s.frame_index = parse_int(f[0], ln);
    s.time_s = parse_double(f[1], ln);
    s.true_force = {parse_double(f[2], ln), parse_double(f[3], ln), parse_double(f[4], ln)};
    s.measured_force = {parse_double(f[5], ln), parse_double(f[6], ln), parse_double(f[7], ln)};
    frames.push_back(s);
  });
  return frames;
}

namespace {

std::string sim_csv_impl(const SimTrace& trace, const std::vector<bool>* flags) {
  if (flags && flags->size() != trace.frames.size()) {
    throw InvariantError("sim_trace_csv: flag count does not match frame count");
  }
  std::string out = kSimHeader;
  if (flags) out += ",flag";
  out += '\n';
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const auto& f = trace.frames[i];
    out += std::to_string(f.frame_index);
    out += ',';
    out += format_double(f.time_s);
    out += ',';
    out += format_double(f.commanded_grip_n);
    out += ',';
    append_vec(out, f.true_force);
    out += ',';
    append_vec(out, f.spoofed_reading);
    out += ',';
    out += format_events(f.events);
    if (flags) out += (*flags)[i] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

}  // namespace

std::string sim_trace_csv(const SimTrace& trace) { return sim_csv_impl(trace, nullptr); }

std::string sim_trace_csv(const SimTrace& trace, const std::vector<bool>& flags) {
  return sim_csv_impl(trace, &flags);
}

SimTrace parse_sim_trace_csv(const std::string& text, double sample_rate_hz) {
  SimTrace trace;
  trace.sample_rate_hz = sample_rate_hz;
  for_each_row(text, kSimHeader, [&](const std::vector<std::string>& f, std::size_t ln) {
    if (f.size() != 10 && f.size() != 11) {
      throw ConfigError("csv line " + std::to_string(ln) + ": expected 10 or 11 fields");
    }
    SimFrame s;
    s.frame_index = parse_int(f[0], ln);
    s.time_s = parse_double(f[1], ln);
    s.commanded_grip_n = parse_double(f[2], ln);
    s.true_force = {parse_double(f[3], ln), parse_double(f[4], ln), parse_double(f[5], ln)};
    s.spoofed_reading = {parse_double(f[6], ln), parse_double(f[7], ln), parse_double(f[8], ln)};
    s.events = parse_events(f[9]);
    trace.frames.push_back(s);
  });
  return trace;
}

std::string plot_csv(const SimTrace& trace) {
  std::string out = "frame,real_force_n,spoofed_force_n,grip_cmd_n\n";
  for (const auto& f : trace.frames) {
    out += fmt::format("{},{},{},{}\n", f.frame_index, f.true_force.magnitude(),
                       f.spoofed_reading.magnitude(), f.commanded_grip_n);
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "frequency_hz,gain\n";
  for (const auto& p : result.curve) out += fmt::format("{},{}\n", p.freq_hz, p.gain);
  return out;
}

json to_json(const PressProtocol& p) {
  return {{"weight_classes_g", p.weight_classes_g}, {"press_s", p.press_s},
          {"dwell_s", p.dwell_s},                   {"release_s", p.release_s},
          {"repetitions", p.repetitions},           {"angle_jitter_deg", p.angle_jitter_deg},
          {"magnitude_jitter", p.magnitude_jitter}, {"train_fraction", p.train_fraction},
          {"seed", p.seed}};
}

json to_json(const SensorModel& s) {
  return {{"sample_rate_hz", s.sample_rate_hz}, {"noise_sigma_n", s.noise_sigma_n},
          {"saturation_n", s.saturation_n},     {"quantization_n", s.quantization_n},
          {"axis_gain", s.axis_gain}};
}

json to_json(const CouplingModel& c) {
  return {{"resonant_freq_hz", c.resonant_freq_hz},
          {"quality_factor", c.quality_factor},
          {"peak_gain_n_per_w", c.peak_gain_n_per_w},
          {"path_loss_exponent", c.path_loss_exponent},
          {"reference_distance_m", c.reference_distance_m},
          {"direction", {c.direction.fx, c.direction.fy, c.direction.fz}},
          {"mode", to_string(c.mode)},
          {"offset_n_per_unit", c.offset_n_per_unit}};
}

json to_json(const AttackConfig& a) {
  return {{"carrier_freq_hz", a.carrier_freq_hz},
          {"emitter_power_w", a.emitter_power_w},
          {"standoff_m", a.standoff_distance_m},
          {"start_frame", a.start_frame},
          {"end_frame", a.end_frame},
          {"envelope", a.envelope.kind == EnvelopeKind::constant ? "constant" : "on_off_keyed"},
          {"ook_period_frames", a.envelope.period_frames},
          {"ook_duty", a.envelope.duty}};
}

json to_json(const Evaluation& e) {
  json per_class = json::array();
  for (const auto& m : e.per_class) {
    per_class.push_back({{"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"precision_defined", m.precision_defined},
                         {"recall_defined", m.recall_defined},
                         {"f1_defined", m.f1_defined},
                         {"support", m.support}});
  }
  return {{"macro_precision", e.macro_precision},
          {"macro_recall", e.macro_recall},
          {"macro_f1", e.macro_f1 ? json(*e.macro_f1) : json(nullptr)},
          {"accuracy", e.accuracy},
          {"count", e.count},
          {"confusion", e.confusion},
          {"per_class", per_class}};
}

namespace {

PressProtocol protocol_from_json(const json& j) {
  PressProtocol p;
  p.weight_classes_g = j.at("weight_classes_g").get<std::vector<double>>();
  p.press_s = j.at("press_s");
  p.dwell_s = j.at("dwell_s");
  p.release_s = j.at("release_s");
  p.repetitions = j.at("repetitions");
  p.angle_jitter_deg = j.at("angle_jitter_deg");
  p.magnitude_jitter = j.at("magnitude_jitter");
  p.train_fraction = j.at("train_fraction");
  p.seed = j.at("seed");
  return p;
}

SensorModel sensor_from_json(const json& j) {
  SensorModel s;
  s.sample_rate_hz = j.at("sample_rate_hz");
  s.noise_sigma_n = j.at("noise_sigma_n");
  s.saturation_n = j.at("saturation_n");
  s.quantization_n = j.at("quantization_n");
  s.axis_gain = j.at("axis_gain").get<std::array<double, 3>>();
  return s;
}

CouplingModel coupling_from_json(const json& j) {
  CouplingModel c;
  c.resonant_freq_hz = j.at("resonant_freq_hz");
  c.quality_factor = j.at("quality_factor");
  c.peak_gain_n_per_w = j.at("peak_gain_n_per_w");
  c.path_loss_exponent = j.at("path_loss_exponent");
  c.reference_distance_m = j.at("reference_distance_m");
  const auto d = j.at("direction").get<std::array<double, 3>>();
  c.direction = {d[0], d[1], d[2]};
  c.mode = parse_perturb_mode(j.at("mode"));
  c.offset_n_per_unit = j.at("offset_n_per_unit");
  return c;
}

AttackConfig attack_from_json(const json& j) {
  AttackConfig a;
  a.carrier_freq_hz = j.at("carrier_freq_hz");
  a.emitter_power_w = j.at("emitter_power_w");
  a.standoff_distance_m = j.at("standoff_m");
  a.start_frame = j.at("start_frame");
  a.end_frame = j.at("end_frame");
  a.envelope.kind = j.at("envelope") == "constant" ? EnvelopeKind::constant
                                                   : EnvelopeKind::on_off_keyed;
  a.envelope.period_frames = j.at("ook_period_frames");
  a.envelope.duty = j.at("ook_duty");
  return a;
}

constexpr int kForestFormatVersion = 1;
constexpr int kDatasetFormatVersion = 1;

}  // namespace

json forest_to_json(const Forest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), votes = json::array();
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      votes.push_back(n.votes);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"votes", votes}});
  }
  return {{"format", "phantom-forest"},
          {"version", kForestFormatVersion},
          {"seed", forest.seed},
          {"n_classes", forest.n_classes},
          {"params",
           {{"n_trees", forest.params.n_trees},
            {"max_depth", forest.params.max_depth},
            {"min_leaf", forest.params.min_leaf},
            {"feature_subsample", forest.params.feature_subsample}}},
          {"trees", trees}};
}

Forest forest_from_json(const json& doc) {
  try {
    if (doc.at("format") != "phantom-forest") throw ConfigError("not a forest document");
    if (doc.at("version") != kForestFormatVersion) {
      throw ConfigError("unsupported forest format version " + doc.at("version").dump());
    }
    Forest f;
    f.seed = doc.at("seed");
    f.n_classes = doc.at("n_classes");
    const auto& p = doc.at("params");
    f.params.n_trees = p.at("n_trees");
    f.params.max_depth = p.at("max_depth");
    f.params.min_leaf = p.at("min_leaf");
    f.params.feature_subsample = p.at("feature_subsample");
    for (const auto& t : doc.at("trees")) {
      DecisionTree tree;
      const auto& feature = t.at("feature");
      for (std::size_t i = 0; i < feature.size(); ++i) {
        DecisionTree::Node n;
        n.feature = feature[i];
        n.threshold = t.at("threshold")[i];
        n.left = t.at("left")[i];
        n.right = t.at("right")[i];
        n.votes = t.at("votes")[i].get<std::vector<std::uint32_t>>();
        const auto count = static_cast<int>(feature.size());
        if (!n.is_leaf() && (n.feature >= static_cast<int>(kFeatureCount) || n.left <= 0 ||
                             n.right <= 0 || n.left >= count || n.right >= count)) {
          throw ConfigError("forest: malformed node");
        }
        tree.nodes.push_back(std::move(n));
      }
      if (tree.nodes.empty()) throw ConfigError("forest: empty tree");
      f.trees.push_back(std::move(tree));
    }
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("forest document: ") + e.what());
  }
}

void write_dataset(const Dataset& ds, const fs::path& dir, const std::string& config_hash) {
  json index = json::array();
  for (const auto& trace : ds.traces) {
    const std::string file =
        "traces/c" + std::to_string(trace.label) + "_r" + std::to_string(trace.repetition) + ".csv";
    write_file_atomic(dir / file, sensor_trace_csv(trace.frames));
    index.push_back({{"file", file},
                     {"label", trace.label},
                     {"repetition", trace.repetition},
                     {"dwell_begin", trace.dwell_begin},
                     {"dwell_end", trace.dwell_end},
                     {"frames", trace.frames.size()}});
  }
  json attack = nullptr;
  if (ds.attack) attack = {{"coupling", to_json(ds.attack->coupling)}, {"attack", to_json(ds.attack->attack)}};
  const json doc = {{"format", "phantom-dataset"},
                    {"version", kDatasetFormatVersion},
                    {"config_hash", config_hash},
                    {"seed", ds.protocol.seed},
                    {"protocol", to_json(ds.protocol)},
                    {"sensor", to_json(ds.sensor)},
                    {"attack", attack},
                    {"split", {{"train", ds.split.train}, {"test", ds.split.test}}},
                    {"traces", index}};
  write_file_atomic(dir / "dataset.json", doc.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  json doc;
  try {
    doc = json::parse(read_file(dir / "dataset.json"));
  } catch (const json::exception& e) {
    throw ConfigError((dir / "dataset.json").string() + ": " + e.what());
  }
  try {
    if (doc.at("format") != "phantom-dataset" || doc.at("version") != kDatasetFormatVersion) {
      throw ConfigError((dir / "dataset.json").string() + ": unsupported dataset format");
    }
    Dataset ds;
    ds.protocol = protocol_from_json(doc.at("protocol"));
    ds.sensor = sensor_from_json(doc.at("sensor"));
    if (!doc.at("attack").is_null()) {
      ds.attack = DatasetAttack{coupling_from_json(doc["attack"].at("coupling")),
                                attack_from_json(doc["attack"].at("attack"))};
    }
    ds.split.train = doc.at("split").at("train").get<std::vector<std::size_t>>();
    ds.split.test = doc.at("split").at("test").get<std::vector<std::size_t>>();
    for (const auto& entry : doc.at("traces")) {
      LabeledTrace t;
      t.label = entry.at("label");
      t.repetition = entry.at("repetition");
      t.dwell_begin = entry.at("dwell_begin");
      t.dwell_end = entry.at("dwell_end");
      t.frames = parse_sensor_trace_csv(read_file(dir / entry.at("file").get<std::string>()));
      ds.traces.push_back(std::move(t));
    }
    for (std::size_t i : ds.split.train) {
      if (i >= ds.traces.size()) throw ConfigError("dataset split references a missing trace");
    }
    for (std::size_t i : ds.split.test) {
      if (i >= ds.traces.size()) throw ConfigError("dataset split references a missing trace");
    }
    return ds;
  } catch (const json::exception& e) {
    throw ConfigError((dir / "dataset.json").string() + ": " + e.what());
  }
}

}  // namespace phantom
