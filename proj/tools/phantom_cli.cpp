#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "phantom/config.hpp"
#include "phantom/detect.hpp"
#include "phantom/error.hpp"
#include "phantom/io.hpp"
#include "phantom/pipeline.hpp"
#include "phantom/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phantom;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

struct Run {
  std::string subcommand;
  std::string config_path;
  ExperimentConfig cfg;
  fs::path out_dir;
  std::vector<fs::path> outputs;
  bool quiet = false;

  void say(const std::string& line) const {
    if (!quiet) std::cout << line << '\n';
  }
  void wrote(const fs::path& p) { outputs.push_back(p); }
};

fs::path default_out(const std::string& subcommand) {
  const char* root = std::getenv("PHANTOM_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / subcommand;
}

Run start(const Globals& g, const std::string& subcommand) {
  Run r;
  r.subcommand = subcommand;
  r.config_path = g.config_path;
  r.quiet = g.quiet;
  if (!g.config_path.empty()) r.cfg = load_config(g.config_path);
  if (g.seed) r.cfg.set_seed(*g.seed);
  r.out_dir = g.out.empty() ? default_out(subcommand) : fs::path(g.out);
  std::error_code ec;
  fs::create_directories(r.out_dir, ec);
  if (ec) throw IoError(r.out_dir.string() + ": " + ec.message());
  return r;
}

void write_manifest(const Run& r, double wall_s) {
  json outputs = json::array();
  for (const auto& p : r.outputs) outputs.push_back(p.string());
  const json manifest = {{"subcommand", r.subcommand},
                         {"config_path", r.config_path},
                         {"config_hash", r.cfg.hash()},
                         {"seed", r.cfg.seed},
                         {"tool_version", kToolVersion},
                         {"outputs", outputs},
                         {"wall_time_s", wall_s}};
  write_file_atomic(r.out_dir / "run_manifest.json", manifest.dump(2) + "\n");
}

void put(Run& r, const fs::path& path, const std::string& text) {
  write_file_atomic(path, text);
  r.wrote(path);
}

std::string metrics_line(const Evaluation& e) {
  return fmt::format("macro P {:.4f}  R {:.4f}  F1 {}  accuracy {:.4f}  ({} windows)",
                     e.macro_precision, e.macro_recall,
                     e.macro_f1 ? fmt::format("{:.4f}", *e.macro_f1) : std::string("--"),
                     e.accuracy, e.count);
}

void cmd_gen_data(Run& r, bool with_attack) {
  std::optional<DatasetAttack> attack;
  if (with_attack) {
    attack = attack_profile(r.cfg);
    if (!attack) throw ConfigError("--with-attack needs [coupling] and [attack] in the config");
  }
  const Dataset ds = build_dataset(r.cfg.protocol, r.cfg.sensor, attack);
  const fs::path dir = r.out_dir / "dataset";
  write_dataset(ds, dir, r.cfg.hash());
  r.wrote(dir);
  r.say(fmt::format("{} traces ({} train, {} test) -> {}", ds.traces.size(), ds.split.train.size(),
                    ds.split.test.size(), dir.string()));
}

void cmd_train(Run& r, const std::string& dataset_dir) {
  const Dataset ds = read_dataset(dataset_dir);
  const auto train = make_samples(ds.traces, ds.split.train, r.cfg.window);
  const Forest forest = train_forest(train, r.cfg.forest, r.cfg.seed);
  put(r, r.out_dir / "forest.json", forest_to_json(forest).dump() + "\n");
  r.say(fmt::format("{} trees on {} windows -> {}", forest.trees.size(), train.size(),
                    (r.out_dir / "forest.json").string()));
}

void cmd_eval(Run& r, const std::string& forest_path, const std::string& dataset_dir,
              bool with_attack) {
  const Forest forest = forest_from_json(json::parse(read_file(forest_path), nullptr, false));
  const Dataset ds = read_dataset(dataset_dir);
  std::vector<LabeledTrace> traces = ds.traces;
  if (with_attack) {
    const auto attack = attack_profile(r.cfg);
    if (!attack) throw ConfigError("--with-attack needs [coupling] and [attack] in the config");
    traces = attack_traces(traces, *attack, ds.sensor);
  }
  const Evaluation e = evaluate(forest, make_samples(traces, ds.split.test, r.cfg.window));
  const FidelityStats fid = force_fidelity(dwell_pairs(traces, ds.split.test));
  json doc = {{"evaluation", to_json(e)},
              {"attacked", with_attack},
              {"cosine_similarity_mean", fid.cosine_traces.mean},
              {"amplitude_ratio_mean", fid.amplitude_traces.mean},
              {"config_hash", r.cfg.hash()},
              {"seed", r.cfg.seed}};
  put(r, r.out_dir / "eval.json", doc.dump(2) + "\n");
  r.say(metrics_line(e));
}

void cmd_simulate(Run& r) {
  const CouplingModel coupling = r.cfg.coupling.value_or(CouplingModel{});
  const SimTrace trace = run_scenario(r.cfg.scenario_with_attack(), r.cfg.sensor, coupling);
  put(r, r.out_dir / "trace.csv", sim_trace_csv(trace));
  put(r, r.out_dir / "plot.csv", plot_csv(trace));
  for (auto [ev, name] : {std::pair{kEventAttackOn, "attack_on"}, std::pair{kEventSlip, "slip"},
                          std::pair{kEventDrop, "drop"}, std::pair{kEventCrush, "crush"}}) {
    const auto first = trace.first_event(ev);
    r.say(fmt::format("{:<10} {}", name, first ? std::to_string(*first) : std::string("-")));
  }
}

void cmd_sweep(Run& r) {
  const CouplingModel coupling = r.cfg.coupling.value_or(CouplingModel{});
  const SweepResult result = frequency_sweep(coupling, r.cfg.sensor, r.cfg.sweep);
  put(r, r.out_dir / "sweep.csv", sweep_csv(result));
  // The best frequency is the primary result and prints even with --quiet.
  std::cout << fmt::format("{:.0f}", result.best_freq_hz) << '\n';
}

void cmd_detect(Run& r, const std::string& trace_path, std::optional<std::int64_t> onset) {
  const SimTrace trace = parse_sim_trace_csv(read_file(trace_path), r.cfg.sensor.sample_rate_hz);
  const auto frames = trace.sensor_frames();
  const DetectionResult result = detect(frames, r.cfg.detector);
  put(r, r.out_dir / "flags.csv", sim_trace_csv(trace, result.flags));
  json doc = {{"flagged_count", result.summary.flagged_count},
              {"flagged_fraction", result.summary.flagged_fraction},
              {"first_flag_frame", result.summary.first_flag_frame
                                       ? json(*result.summary.first_flag_frame)
                                       : json(nullptr)},
              {"config_hash", r.cfg.hash()}};
  if (onset) {
    const auto latency = result.latency_from(*onset, frames);
    doc["onset_frame"] = *onset;
    doc["latency_frames"] = latency ? json(*latency) : json(nullptr);
  }
  put(r, r.out_dir / "detection.json", doc.dump(2) + "\n");
  r.say(fmt::format("first flag {}  flagged {:.4f}",
                    result.summary.first_flag_frame
                        ? std::to_string(*result.summary.first_flag_frame)
                        : std::string("-"),
                    result.summary.flagged_fraction));
}

void cmd_report(Run& r, const std::string& trace_path) {
  const MetricsReport report = run_experiment(r.cfg);
  std::optional<SimTrace> trace;
  if (!trace_path.empty()) {
    trace = parse_sim_trace_csv(read_file(trace_path), r.cfg.sensor.sample_rate_hz);
  }
  for (const auto& p : emit_report(report, r.out_dir, trace ? &*trace : nullptr)) r.wrote(p);
  r.say(report_table(report));
}

void cmd_calibrate(Run& r, const std::string& profile_path) {
  const CalibrationResult result = calibrate(r.cfg);
  const ExperimentConfig calibrated = apply_calibration(r.cfg, result);
  const fs::path path = profile_path.empty() ? r.out_dir / "attack.cfg" : fs::path(profile_path);
  put(r, path, calibrated_profile_text(calibrated, result));
  r.say(fmt::format("emitter power {} W, offset {} N/unit: amplitude ratio {:.4f}, cosine {:.4f}",
                    format_double(result.emitter_power_w), format_double(result.offset_n_per_unit),
                    result.achieved_amplitude_ratio, result.achieved_cosine));
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::invariant: return 3;
    case ErrorCategory::io: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated EMI spoofing of a tactile force sensor in a closed-loop gripper."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Globals g;
  app.add_option("--config", g.config_path, "Experiment config file");
  app.add_option("--seed", g.seed, "Seed for every random stream (overrides the config)");
  app.add_option("--out", g.out, "Output directory (default $PHANTOM_OUT_ROOT/<subcommand>, or runs/<subcommand>)");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  bool with_attack = false;
  std::string dataset_dir, forest_path, trace_path, profile_path;
  std::optional<std::int64_t> onset;

  auto* gen = app.add_subcommand("gen-data", "Generate the labeled press dataset");
  gen->add_flag("--with-attack", with_attack, "Apply the config's attack profile to every trace");

  auto* train = app.add_subcommand("train", "Train the random forest on a dataset's train split");
  train->add_option("--dataset", dataset_dir, "Dataset directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a forest on a dataset's test split");
  eval->add_option("--forest", forest_path, "Forest JSON")->required();
  eval->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  eval->add_flag("--with-attack", with_attack, "Attack the test traces with the config's profile");

  auto* sim = app.add_subcommand("simulate", "Run the closed-loop grasp scenario");
  auto* sweep = app.add_subcommand("sweep", "Sweep the carrier and print the resonant frequency");

  auto* det = app.add_subcommand("detect", "Flag implausible readings in a grasp trace");
  det->add_option("--trace", trace_path, "Grasp trace CSV")->required();
  det->add_option("--onset", onset, "Attack onset frame for the latency figure");

  auto* rep = app.add_subcommand("report", "Benign and attacked fidelity/classifier table");
  rep->add_option("--trace", trace_path, "Grasp trace CSV to export as plot data");

  auto* cal = app.add_subcommand("calibrate", "Fit the attack profile to the target metrics");
  cal->add_option("--profile-out", profile_path, "Where to write the profile config");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    fmt::print(stderr, "error[usage]: {}\n", e.what());
    return 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Run r = start(g, chosen->get_name());
    if (chosen == gen) cmd_gen_data(r, with_attack);
    else if (chosen == train) cmd_train(r, dataset_dir);
    else if (chosen == eval) cmd_eval(r, forest_path, dataset_dir, with_attack);
    else if (chosen == sim) cmd_simulate(r);
    else if (chosen == sweep) cmd_sweep(r);
    else if (chosen == det) cmd_detect(r, trace_path, onset);
    else if (chosen == rep) cmd_report(r, trace_path);
    else if (chosen == cal) cmd_calibrate(r, profile_path);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    write_manifest(r, wall.count());
  } catch (const Error& e) {
    std::cerr << "error[" << category_name(e.category()) << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[invariant]: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
