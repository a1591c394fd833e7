#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "phantom/config.hpp"
#include "phantom/datagen.hpp"
#include "phantom/detect.hpp"
#include "phantom/emi.hpp"
#include "phantom/grasp.hpp"
#include "phantom/learn.hpp"

namespace phantom {

namespace fs = std::filesystem;
using nlohmann::json;

/// Shortest round-trip decimal form; the same double always prints the same way.
std::string format_double(double v);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

// Sensor traces: frame,time_s,true_fx,true_fy,true_fz,meas_fx,meas_fy,meas_fz
std::string sensor_trace_csv(const std::vector<SensorFrame>& frames);
std::vector<SensorFrame> parse_sensor_trace_csv(const std::string& text);

// Grasp traces: frame,time_s,cmd_n,real_fx,real_fy,real_fz,meas_fx,meas_fy,meas_fz,events
std::string sim_trace_csv(const SimTrace& trace);
/// Same columns plus a trailing `flag` (0/1) per frame.
std::string sim_trace_csv(const SimTrace& trace, const std::vector<bool>& flags);
SimTrace parse_sim_trace_csv(const std::string& text, double sample_rate_hz);

/// frame,real_force_n,spoofed_force_n,grip_cmd_n for plotting the hold/attack profile.
std::string plot_csv(const SimTrace& trace);

/// frequency_hz,gain
std::string sweep_csv(const SweepResult& result);

json to_json(const PressProtocol& p);
json to_json(const SensorModel& s);
json to_json(const CouplingModel& c);
json to_json(const AttackConfig& a);
json to_json(const Evaluation& e);

/// Versioned forest document: per tree, parallel arrays of feature index,
/// threshold, children and leaf votes.
json forest_to_json(const Forest& forest);
Forest forest_from_json(const json& doc);

/// Dataset directory: dataset.json (protocol, sensor, attack, seed, split,
/// trace index) plus traces/c<class>_r<rep>.csv.
void write_dataset(const Dataset& ds, const fs::path& dir, const std::string& config_hash);
Dataset read_dataset(const fs::path& dir);

}  // namespace phantom
