#include <doctest.h>

#include <filesystem>
#include <limits>

#include "phantom/error.hpp"
#include "phantom/io.hpp"
#include "phantom/pipeline.hpp"
#include "phantom/report.hpp"

using namespace phantom;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("phantom_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SimTrace attacked_trace() {
  GraspScenario s;
  AttackConfig a;
  a.emitter_power_w = 1.2;
  a.start_frame = 550;
  a.end_frame = 999;
  s.attack = a;
  CouplingModel c;
  c.mode = PerturbMode::suppression;
  return run_scenario(s, SensorModel{}, c);
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 313e6, 0.981, std::numeric_limits<double>::max()}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(35.0) == "35");
}

TEST_CASE("sensor trace CSV round-trips") {
  std::vector<SensorFrame> frames(3);
  for (int i = 0; i < 3; ++i) {
    frames[i].frame_index = i;
    frames[i].time_s = i / 1000.0;
    frames[i].true_force = {0.1 * i, -0.2, 1.0 / 3};
    frames[i].measured_force = {0.123, 4.5, -6.789};
  }
  const std::string csv = sensor_trace_csv(frames);
  CHECK(csv.rfind("frame,time_s,true_fx,true_fy,true_fz,meas_fx,meas_fy,meas_fz\n", 0) == 0);
  CHECK(parse_sensor_trace_csv(csv) == frames);
  CHECK_THROWS_AS(parse_sensor_trace_csv("frame,bogus\n1,2\n"), ConfigError);
}

TEST_CASE("grasp trace CSV round-trips and carries events") {
  const SimTrace tr = attacked_trace();
  const std::string csv = sim_trace_csv(tr);
  CHECK(csv.rfind("frame,time_s,cmd_n,real_fx,real_fy,real_fz,meas_fx,meas_fy,meas_fz,events\n", 0) == 0);
  const SimTrace back = parse_sim_trace_csv(csv, tr.sample_rate_hz);
  CHECK(back.frames == tr.frames);
  CHECK(sim_trace_csv(back) == csv);
  CHECK(csv.find("\n550,") != std::string::npos);
  CHECK((back.frames[550].events & kEventAttackOn) != 0);

  const std::vector<bool> flags(tr.frames.size(), true);
  const std::string flagged = sim_trace_csv(tr, flags);
  CHECK(flagged.find(",events,flag\n") != std::string::npos);
  CHECK(parse_sim_trace_csv(flagged, tr.sample_rate_hz).frames == tr.frames);
}

TEST_CASE("plot CSV has one row per frame") {
  const SimTrace tr = attacked_trace();
  const std::string csv = plot_csv(tr);
  CHECK(csv.rfind("frame,real_force_n,spoofed_force_n,grip_cmd_n\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == tr.frames.size() + 1);
}

TEST_CASE("forest JSON round-trips") {
  std::vector<Sample> train;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 10; ++i) {
      Sample s;
      s.features[14] = c * 5.0 + i * 0.1;
      s.features[0] = i;
      s.label = c;
      train.push_back(s);
    }
  }
  ForestParams p;
  p.n_trees = 7;
  const Forest f = train_forest(train, p, 5);
  const json doc = forest_to_json(f);
  CHECK(forest_from_json(json::parse(doc.dump())) == f);
  json wrong = doc;
  wrong["version"] = 99;
  CHECK_THROWS_AS(forest_from_json(wrong), ConfigError);
}

TEST_CASE("dataset directory round-trips") {
  PressProtocol p;
  p.repetitions = 3;
  const Dataset ds = build_dataset(p, SensorModel{});
  const fs::path dir = scratch("dataset");
  write_dataset(ds, dir, "abc");
  const Dataset back = read_dataset(dir);
  CHECK(back.traces == ds.traces);
  CHECK(back.split == ds.split);
  CHECK(back.protocol.weight_classes_g == ds.protocol.weight_classes_g);
  CHECK_THROWS_AS(read_dataset(dir / "missing"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("fidelity of identical sequences") {
  ForcePairs p;
  for (int i = 0; i < 10; ++i) {
    p.truth.push_back({0.1 * i, 0, 1});
    p.measured.push_back({0.1 * i, 0, 1});
  }
  p.truth.push_back({0, 0, 0});  // contact-free frame, skipped
  p.measured.push_back({5, 5, 5});
  const std::vector<ForcePairs> traces{p};
  const FidelityStats s = force_fidelity(traces);
  CHECK(s.cosine_frames.mean == 1.0);
  CHECK(s.cosine_frames.std == 0.0);
  CHECK(s.amplitude_frames.mean == 1.0);
  CHECK(s.cosine_frames.count == 10);
  CHECK(s.cosine_traces.count == 1);
  CHECK(s.max_angle_deg == 0.0);
}

TEST_CASE("fidelity pooled statistics match a direct computation") {
  RngStream rng(2, "report/fid");
  std::vector<ForcePairs> traces(3);
  std::vector<double> cosines;
  for (auto& t : traces) {
    for (int i = 0; i < 50; ++i) {
      const ForceVec a{rng.normal(0, 1), rng.normal(0, 1), 2 + rng.uniform()};
      const ForceVec b{rng.normal(0, 1), rng.normal(0, 1), 2 + rng.uniform()};
      t.truth.push_back(a);
      t.measured.push_back(b);
      cosines.push_back(dot(a, b) / (a.magnitude() * b.magnitude()));
    }
  }
  double mean = 0;
  for (double c : cosines) mean += c;
  mean /= cosines.size();
  double var = 0;
  for (double c : cosines) var += (c - mean) * (c - mean);
  const FidelityStats s = force_fidelity(traces);
  CHECK(s.cosine_frames.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(s.cosine_frames.std == doctest::Approx(std::sqrt(var / cosines.size())).epsilon(1e-12));
  CHECK(s.cosine_traces.count == 3);
}

TEST_CASE("suppressed readings count as degenerate frames") {
  ForcePairs p;
  p.truth = {{0, 0, 35}, {0, 0, 35}};
  p.measured = {{0, 0, 0}, {0, 0, 35}};
  const std::vector<ForcePairs> traces{p};
  const FidelityStats s = force_fidelity(traces);
  CHECK(s.degenerate_frames == 1);
  CHECK(s.amplitude_frames.mean == 0.5);
  CHECK(s.cosine_frames.count == 1);
}

TEST_CASE("report JSON, table and files") {
  MetricsReport r;
  CaseReport benign;
  benign.label = "non-attack";
  benign.precision = {0.97, 0.01, 5};
  benign.recall = {0.96, 0.02, 5};
  benign.f1 = Summary{0.965, 0.015, 5};
  CaseReport attack;
  attack.label = "attack";
  attack.fidelity.cosine_traces = {0.56, 0.2, 300};
  r.cases = {benign, attack};
  r.provenance = {"deadbeef", {42, 43}, kToolVersion};

  CHECK(report_from_json(json::parse(report_to_json(r).dump())) == r);

  const std::string table = report_table(r);
  CHECK(table.find("\nnon-attack ") != std::string::npos);
  CHECK(table.find("\nattack ") != std::string::npos);
  CHECK(table.find("--") != std::string::npos);

  const fs::path dir = scratch("report");
  const SimTrace tr = attacked_trace();
  const auto written = emit_report(r, dir, &tr);
  CHECK(written.size() == 3);
  CHECK(read_file(dir / "report.txt") == table);
  const std::string json_first = read_file(dir / "report.json");
  emit_report(r, dir, &tr);
  CHECK(read_file(dir / "report.json") == json_first);
  fs::remove_all(dir);

  CHECK_THROWS_AS(emit_report(r, "/proc/phantom_no_such_dir"), IoError);
}

TEST_CASE("summaries use population std") {
  const std::vector<double> v{1, 3};
  const Summary s = summarize(v);
  CHECK(s.mean == 2.0);
  CHECK(s.std == 1.0);
  CHECK(s.count == 2);
  CHECK(summarize(std::vector<double>{}).count == 0);
}
