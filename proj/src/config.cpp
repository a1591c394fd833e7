#include "phantom/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "phantom/error.hpp"

namespace phantom {

namespace pt = boost::property_tree;

namespace {

std::string format_number(double v) { return fmt::format("{}", v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

const char* envelope_name(EnvelopeKind k) {
  return k == EnvelopeKind::constant ? "constant" : "on_off_keyed";
}

EnvelopeKind parse_envelope(const std::string& s) {
  if (s == "constant") return EnvelopeKind::constant;
  if (s == "on_off_keyed") return EnvelopeKind::on_off_keyed;
  throw ConfigError("unknown envelope '" + s + "'");
}

/// Reads values out of a parsed INI tree, remembering which keys it consumed.
class Reader {
 public:
  Reader(const pt::ptree& tree, std::string origin) : tree_(tree), origin_(std::move(origin)) {}

  bool has_section(const std::string& section) const {
    return tree_.get_child_optional(section).has_value();
  }

  void field(const std::string& section, const std::string& key, double& v) {
    if (auto raw = take(section, key)) v = to_double(section, key, *raw);
  }
  void field(const std::string& section, const std::string& key, int& v) {
    if (auto raw = take(section, key)) v = static_cast<int>(to_int(section, key, *raw));
  }
  void field(const std::string& section, const std::string& key, std::int64_t& v) {
    if (auto raw = take(section, key)) v = to_int(section, key, *raw);
  }
  void field(const std::string& section, const std::string& key, std::uint64_t& v) {
    if (auto raw = take(section, key)) {
      const auto parsed = to_int(section, key, *raw);
      if (parsed < 0) fail(section, key, "must be non-negative");
      v = static_cast<std::uint64_t>(parsed);
    }
  }
  void field(const std::string& section, const std::string& key, std::vector<double>& v) {
    if (auto raw = take(section, key)) {
      v.clear();
      for (const auto& item : split_list(*raw)) v.push_back(to_double(section, key, item));
    }
  }
  void field(const std::string& section, const std::string& key, std::array<double, 3>& v) {
    if (auto raw = take(section, key)) {
      const auto items = split_list(*raw);
      if (items.size() != 3) fail(section, key, "expects three comma-separated values");
      for (int i = 0; i < 3; ++i) v[i] = to_double(section, key, items[i]);
    }
  }
  void field(const std::string& section, const std::string& key, ForceVec& v) {
    std::array<double, 3> a{v.fx, v.fy, v.fz};
    field(section, key, a);
    v = ForceVec{a[0], a[1], a[2]};
  }
  void field(const std::string& section, const std::string& key, PerturbMode& v) {
    if (auto raw = take(section, key)) v = parse_perturb_mode(*raw);
  }
  void field(const std::string& section, const std::string& key, EnvelopeKind& v) {
    if (auto raw = take(section, key)) v = parse_envelope(*raw);
  }
  void field(const std::string& section, const std::string& key, PhaseFilter& v) {
    if (auto raw = take(section, key)) v = parse_phase_filter(*raw);
  }

  /// Every key in the file must have been consumed.
  void check_all_consumed() const {
    for (const auto& [section, child] : tree_) {
      if (child.empty() && !child.data().empty()) {
        throw ConfigError(origin_ + ": key '" + section + "' outside any section");
      }
      for (const auto& [key, value] : child) {
        if (!consumed_.count(section + "." + key)) {
          throw ConfigError(origin_ + ": unknown key '" + key + "' in section [" + section + "]");
        }
      }
      if (!known_sections_.count(section)) {
        throw ConfigError(origin_ + ": unknown section [" + section + "]");
      }
    }
  }

  void declare_section(const std::string& section) { known_sections_.insert(section); }

 private:
  std::optional<std::string> take(const std::string& section, const std::string& key) {
    known_sections_.insert(section);
    auto child = tree_.get_child_optional(section);
    if (!child) return std::nullopt;
    auto value = child->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!value) return std::nullopt;
    consumed_.insert(section + "." + key);
    return trim(*value);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& why) const {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " " + why);
  }

  double to_double(const std::string& section, const std::string& key, const std::string& s) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) fail(section, key, "is not a number: '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(section, key, "is not a number: '" + s + "'");
    }
  }

  std::int64_t to_int(const std::string& section, const std::string& key, const std::string& s) const {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) fail(section, key, "is not an integer: '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(section, key, "is not an integer: '" + s + "'");
    }
  }

  const pt::ptree& tree_;
  std::string origin_;
  std::set<std::string> consumed_;
  std::set<std::string> known_sections_;
};

/// Emits `key = value` lines grouped by section, in visit order.
class Writer {
 public:
  bool has_section(const std::string&) const { return true; }
  void declare_section(const std::string&) {}

  void field(const std::string& section, const std::string& key, double v) {
    put(section, key, format_number(v));
  }
  void field(const std::string& section, const std::string& key, int v) {
    put(section, key, std::to_string(v));
  }
  void field(const std::string& section, const std::string& key, std::int64_t v) {
    put(section, key, std::to_string(v));
  }
  void field(const std::string& section, const std::string& key, std::uint64_t v) {
    put(section, key, std::to_string(v));
  }
  void field(const std::string& section, const std::string& key, const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
    put(section, key, s);
  }
  void field(const std::string& section, const std::string& key, const std::array<double, 3>& v) {
    put(section, key,
        format_number(v[0]) + ", " + format_number(v[1]) + ", " + format_number(v[2]));
  }
  void field(const std::string& section, const std::string& key, const ForceVec& v) {
    field(section, key, std::array<double, 3>{v.fx, v.fy, v.fz});
  }
  void field(const std::string& section, const std::string& key, PerturbMode v) {
    put(section, key, to_string(v));
  }
  void field(const std::string& section, const std::string& key, EnvelopeKind v) {
    put(section, key, envelope_name(v));
  }
  void field(const std::string& section, const std::string& key, PhaseFilter v) {
    put(section, key, to_string(v));
  }

  std::string text() const { return out_.str(); }

 private:
  void put(const std::string& section, const std::string& key, const std::string& value) {
    if (section != current_) {
      if (!current_.empty()) out_ << '\n';
      out_ << '[' << section << "]\n";
      current_ = section;
    }
    out_ << key << " = " << value << '\n';
  }

  std::ostringstream out_;
  std::string current_;
};

template <typename Visitor, typename Config>
void visit_config(Visitor& v, Config& c) {
  v.field("run", "seed", c.seed);

  v.field("sensor", "sample_rate_hz", c.sensor.sample_rate_hz);
  v.field("sensor", "noise_sigma_n", c.sensor.noise_sigma_n);
  v.field("sensor", "saturation_n", c.sensor.saturation_n);
  v.field("sensor", "quantization_n", c.sensor.quantization_n);
  v.field("sensor", "axis_gain", c.sensor.axis_gain);

  v.field("protocol", "weight_classes_g", c.protocol.weight_classes_g);
  v.field("protocol", "press_s", c.protocol.press_s);
  v.field("protocol", "dwell_s", c.protocol.dwell_s);
  v.field("protocol", "release_s", c.protocol.release_s);
  v.field("protocol", "repetitions", c.protocol.repetitions);
  v.field("protocol", "angle_jitter_deg", c.protocol.angle_jitter_deg);
  v.field("protocol", "magnitude_jitter", c.protocol.magnitude_jitter);
  v.field("protocol", "train_fraction", c.protocol.train_fraction);

  v.field("window", "length", c.window.window_len);
  v.field("window", "stride", c.window.stride);
  v.field("window", "phase", c.window.phase_filter);

  v.field("forest", "n_trees", c.forest.n_trees);
  v.field("forest", "max_depth", c.forest.max_depth);
  v.field("forest", "min_leaf", c.forest.min_leaf);
  v.field("forest", "feature_subsample", c.forest.feature_subsample);

  if (c.coupling) {
    auto& m = *c.coupling;
    v.field("coupling", "resonant_freq_hz", m.resonant_freq_hz);
    v.field("coupling", "quality_factor", m.quality_factor);
    v.field("coupling", "peak_gain_n_per_w", m.peak_gain_n_per_w);
    v.field("coupling", "path_loss_exponent", m.path_loss_exponent);
    v.field("coupling", "reference_distance_m", m.reference_distance_m);
    v.field("coupling", "direction", m.direction);
    v.field("coupling", "mode", m.mode);
    v.field("coupling", "offset_n_per_unit", m.offset_n_per_unit);
  }
  if (c.attack) {
    auto& a = *c.attack;
    v.field("attack", "carrier_freq_hz", a.carrier_freq_hz);
    v.field("attack", "emitter_power_w", a.emitter_power_w);
    v.field("attack", "standoff_m", a.standoff_distance_m);
    v.field("attack", "start_frame", a.start_frame);
    v.field("attack", "end_frame", a.end_frame);
    v.field("attack", "envelope", a.envelope.kind);
    v.field("attack", "ook_period_frames", a.envelope.period_frames);
    v.field("attack", "ook_duty", a.envelope.duty);
  }

  auto& s = c.scenario;
  v.field("scenario", "object_mass_kg", s.object_mass_kg);
  v.field("scenario", "friction_coeff", s.friction_coeff);
  v.field("scenario", "crush_force_n", s.crush_force_n);
  v.field("scenario", "target_normal_n", s.target_normal_n);
  v.field("scenario", "total_frames", s.total_frames);
  v.field("scenario", "grasp_ramp_frames", s.grasp_ramp_frames);
  v.field("scenario", "lift_start_frame", s.lift_start_frame);
  v.field("scenario", "lift_duration_frames", s.lift_duration_frames);

  v.field("controller", "kp", s.controller.kp);
  v.field("controller", "ki", s.controller.ki);
  v.field("controller", "integrator_limit_n", s.controller.integrator_limit_n);
  v.field("controller", "max_grip_n", s.controller.max_grip_n);
  v.field("controller", "ramp_rate_n_per_frame", s.controller.ramp_rate_n_per_frame);

  v.field("detector", "jump_threshold_n", c.detector.jump_threshold_n);
  v.field("detector", "plausibility_max_n", c.detector.plausibility_max_n);
  v.field("detector", "window_frames", c.detector.window_frames);

  v.field("sweep", "start_hz", c.sweep.start_hz);
  v.field("sweep", "end_hz", c.sweep.end_hz);
  v.field("sweep", "step_hz", c.sweep.step_hz);
  v.field("sweep", "probe_distance_m", c.sweep.probe_distance_m);
  v.field("sweep", "probe_power_w", c.sweep.probe_power_w);

  v.field("calibrate", "target_amplitude_ratio", c.calibration.amplitude_ratio);
  v.field("calibrate", "target_cosine", c.calibration.cosine_similarity);

  v.field("report", "repetitions", c.report_repetitions);
}

}  // namespace

std::string ExperimentConfig::canonical_text() const {
  Writer w;
  visit_config(w, *this);
  return w.text();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantError("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_text()); }

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  protocol.seed = s;
  scenario.seed = s;
}

GraspScenario ExperimentConfig::scenario_with_attack() const {
  GraspScenario s = scenario;
  s.attack = attack;
  return s;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig cfg;
  Reader reader(tree, origin);
  if (reader.has_section("coupling")) cfg.coupling.emplace();
  if (reader.has_section("attack")) cfg.attack.emplace();
  // Plausibility defaults to the sensor range unless set explicitly.
  const bool plausibility_set =
      tree.get_optional<std::string>("detector.plausibility_max_n").has_value();
  visit_config(reader, cfg);
  reader.check_all_consumed();

  if (!plausibility_set) cfg.detector.plausibility_max_n = cfg.sensor.saturation_n;
  if (cfg.coupling) {
    try {
      // Already-unit vectors are kept as written so canonical text reloads exactly.
      const ForceVec unit = normalized(cfg.coupling->direction);
      if (std::abs(cfg.coupling->direction.magnitude() - 1.0) > 1e-12) cfg.coupling->direction = unit;
    } catch (const Error&) {
      throw ConfigError(origin + ": [coupling] direction must be non-zero");
    }
  }
  cfg.set_seed(cfg.seed);
  if (cfg.report_repetitions <= 0) throw ConfigError(origin + ": [report] repetitions must be > 0");
  try {
    cfg.sensor.validate();
    cfg.protocol.validate();
    cfg.window.validate();
    cfg.forest.validate();
    cfg.scenario.validate();
    cfg.detector.validate();
    if (cfg.coupling) cfg.coupling->validate();
    if (cfg.attack) cfg.attack->validate();
  } catch (const InvariantError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace phantom
