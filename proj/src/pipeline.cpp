#include "phantom/pipeline.hpp"

#include <fmt/format.h>

#include <cmath>
#include <utility>

#include "phantom/error.hpp"

namespace phantom {

std::vector<ForcePairs> dwell_pairs(const std::vector<LabeledTrace>& traces,
                                    const std::vector<std::size_t>& selection) {
  std::vector<ForcePairs> out;
  out.reserve(selection.size());
  for (std::size_t idx : selection) {
    const LabeledTrace& t = traces.at(idx);
    ForcePairs p;
    for (std::int64_t i = t.dwell_begin; i < t.dwell_end; ++i) {
      const SensorFrame& f = t.frames.at(static_cast<std::size_t>(i));
      p.truth.push_back(f.true_force);
      p.measured.push_back(f.measured_force);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::optional<DatasetAttack> attack_profile(const ExperimentConfig& cfg) {
  if (!cfg.coupling || !cfg.attack) return std::nullopt;
  return DatasetAttack{*cfg.coupling, *cfg.attack};
}

ExperimentRun run_experiment_once(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentRun run;
  run.seed = seed;
  PressProtocol protocol = cfg.protocol;
  protocol.seed = seed;
  run.dataset = build_dataset(protocol, cfg.sensor);
  const auto& traces = run.dataset.traces;
  const auto& split = run.dataset.split;

  const auto train = make_samples(traces, split.train, cfg.window);
  run.forest = train_forest(train, cfg.forest, seed);

  run.benign = evaluate(run.forest, make_samples(traces, split.test, cfg.window));
  run.benign_pairs = dwell_pairs(traces, split.test);

  const auto profile = attack_profile(cfg);
  if (profile && coupling_amplitude(profile->coupling, profile->attack) > 0.0) {
    const auto attacked = attack_traces(traces, *profile, cfg.sensor);
    run.attack = evaluate(run.forest, make_samples(attacked, split.test, cfg.window));
    run.attack_pairs = dwell_pairs(attacked, split.test);
  }
  return run;
}

std::vector<std::uint64_t> repetition_seeds(std::uint64_t seed, int repetitions) {
  if (repetitions < 1) throw InvariantError("report repetitions must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < repetitions; ++i) seeds.push_back(seed + static_cast<std::uint64_t>(i));
  return seeds;
}

namespace {

CaseReport make_case(const std::string& label, const std::vector<const Evaluation*>& evals,
                     const std::vector<ForcePairs>& pairs) {
  CaseReport c;
  c.label = label;
  c.fidelity = force_fidelity(pairs);
  std::vector<double> p, r, f;
  for (const Evaluation* e : evals) {
    p.push_back(e->macro_precision);
    r.push_back(e->macro_recall);
    if (e->macro_f1) f.push_back(*e->macro_f1);
  }
  c.precision = summarize(p);
  c.recall = summarize(r);
  if (!f.empty()) c.f1 = summarize(f);
  return c;
}

}  // namespace

MetricsReport build_report(const std::vector<ExperimentRun>& runs, const std::string& config_hash) {
  MetricsReport report;
  report.provenance.config_hash = config_hash;
  report.provenance.tool_version = kToolVersion;

  std::vector<const Evaluation*> benign, attack;
  std::vector<ForcePairs> benign_pairs, attack_pairs;
  for (const auto& run : runs) {
    report.provenance.seeds.push_back(run.seed);
    benign.push_back(&run.benign);
    benign_pairs.insert(benign_pairs.end(), run.benign_pairs.begin(), run.benign_pairs.end());
    if (run.attack) {
      attack.push_back(&*run.attack);
      attack_pairs.insert(attack_pairs.end(), run.attack_pairs.begin(), run.attack_pairs.end());
    }
  }
  report.cases.push_back(make_case("non-attack", benign, benign_pairs));
  if (!attack.empty()) report.cases.push_back(make_case("attack", attack, attack_pairs));
  return report;
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  std::vector<ExperimentRun> runs;
  for (auto seed : repetition_seeds(cfg.seed, cfg.report_repetitions)) {
    runs.push_back(run_experiment_once(cfg, seed));
  }
  return build_report(runs, cfg.hash());
}

namespace {

// Attacked-fidelity of the benign training traces as a function of the
// coupling amplitude A and the total offset K = A * offset_n_per_unit.
class CalibrationProblem {
 public:
  explicit CalibrationProblem(const ExperimentConfig& cfg) : sensor_(cfg.sensor) {
    if (!cfg.coupling || !cfg.attack) {
      throw ConfigError("calibrate: config needs [coupling] and [attack] sections");
    }
    coupling_ = *cfg.coupling;
    attack_ = *cfg.attack;
    if (coupling_.mode != PerturbMode::channel_gain) {
      throw ConfigError("calibrate: coupling mode must be channel_gain");
    }
    coupling_.validate();
    gain_ = coupling_gain(coupling_, attack_.carrier_freq_hz, attack_.standoff_distance_m);
    if (!(gain_ > 0.0)) throw InvariantError("calibrate: zero coupling gain at the carrier");

    const Dataset ds = build_dataset(cfg.protocol, cfg.sensor);
    pairs_ = dwell_pairs(ds.traces, ds.split.train);
    for (auto& p : pairs_) {
      std::vector<SensorFrame> frames;
      for (std::size_t i = 0; i < p.truth.size(); ++i) {
        SensorFrame f;
        f.frame_index = static_cast<std::int64_t>(i);
        f.true_force = p.truth[i];
        f.measured_force = p.measured[i];
        frames.push_back(f);
      }
      frames_.push_back(std::move(frames));
    }
  }

  double gain() const { return gain_; }

  // (mean amplitude ratio, mean cosine) over per-trace dwell means.
  std::pair<double, double> metrics(double a, double k) {
    ++evaluations;
    CouplingModel model = coupling_;
    AttackConfig attack = attack_;
    attack.start_frame = 0;
    if (a > 0.0) {
      model.offset_n_per_unit = k / a;
      attack.emitter_power_w = a / gain_;
    } else {
      // No channel gain left: a plain offset of K newtons.
      model.mode = PerturbMode::additive_offset;
      model.offset_n_per_unit = 0.0;
      attack.emitter_power_w = k / gain_;
    }

    double amp_sum = 0.0, cos_sum = 0.0;
    std::size_t n = 0;
    for (const auto& frames : frames_) {
      attack.end_frame = static_cast<std::int64_t>(frames.size()) - 1;
      ForceVec truth, measured;
      for (const auto& f : frames) {
        if (!(f.true_force.magnitude() > kDegenerateEpsilon)) continue;
        truth += f.true_force;
        measured += perturb(model, attack, sensor_, f);
      }
      if (!(truth.magnitude() > kDegenerateEpsilon)) continue;
      amp_sum += amplitude_ratio(truth, measured);
      cos_sum += measured.magnitude() > kDegenerateEpsilon ? cosine_similarity(truth, measured)
                                                           : 0.0;
      ++n;
    }
    if (n == 0) throw InvariantError("calibrate: no usable training traces");
    return {amp_sum / static_cast<double>(n), cos_sum / static_cast<double>(n)};
  }

  int evaluations = 0;

 private:
  SensorModel sensor_;
  CouplingModel coupling_;
  AttackConfig attack_;
  double gain_ = 0.0;
  std::vector<ForcePairs> pairs_;
  std::vector<std::vector<SensorFrame>> frames_;
};

constexpr int kBisectionSteps = 32;
constexpr double kSearchCeiling = 1e6;

// Smallest x in [0, inf) with f(x) >= target, for non-decreasing f.
template <typename F>
double solve_increasing(F&& f, double target, const char* what) {
  double lo = 0.0, hi = 1.0;
  while (f(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > kSearchCeiling) {
      throw InvariantError(fmt::format("calibrate: cannot reach the {} target", what));
    }
  }
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CalibrationResult calibrate(const ExperimentConfig& cfg) {
  const double amp_target = cfg.calibration.amplitude_ratio;
  const double cos_target = cfg.calibration.cosine_similarity;
  if (!(amp_target > 1.0)) throw ConfigError("calibrate: target amplitude ratio must be > 1");
  if (!(cos_target > -1.0 && cos_target < 1.0)) {
    throw ConfigError("calibrate: target cosine must lie in (-1, 1)");
  }

  CalibrationProblem problem(cfg);
  auto amplitude_for = [&](double k) {
    if (problem.metrics(0.0, k).first >= amp_target) return 0.0;
    return solve_increasing([&](double a) { return problem.metrics(a, k).first; }, amp_target,
                            "amplitude ratio");
  };

  const double k_max = solve_increasing([&](double k) { return problem.metrics(0.0, k).first; },
                                        amp_target, "amplitude ratio");
  const double cos_gain_only = problem.metrics(amplitude_for(0.0), 0.0).second;
  const double cos_offset_only = problem.metrics(0.0, k_max).second;
  if (cos_gain_only < cos_target || cos_offset_only > cos_target) {
    throw InvariantError(fmt::format(
        "calibrate: cosine target {} unreachable with this coupling direction "
        "(achievable range [{:.4f}, {:.4f}])",
        cos_target, std::min(cos_gain_only, cos_offset_only),
        std::max(cos_gain_only, cos_offset_only)));
  }

  double lo = 0.0, hi = k_max;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (problem.metrics(amplitude_for(mid), mid).second > cos_target ? lo : hi) = mid;
  }
  const double k = 0.5 * (lo + hi);
  const double a = amplitude_for(k);
  if (!(a > 0.0)) {
    throw InvariantError("calibrate: solution needs no channel gain; use an additive profile");
  }

  const auto [amp, cos] = problem.metrics(a, k);
  CalibrationResult r;
  r.amplitude = a;
  r.emitter_power_w = a / problem.gain();
  r.offset_n_per_unit = k / a;
  r.achieved_amplitude_ratio = amp;
  r.achieved_cosine = cos;
  r.evaluations = problem.evaluations;
  return r;
}

ExperimentConfig apply_calibration(const ExperimentConfig& cfg, const CalibrationResult& result) {
  ExperimentConfig out = cfg;
  out.coupling->offset_n_per_unit = result.offset_n_per_unit;
  out.attack->emitter_power_w = result.emitter_power_w;
  return out;
}

std::string calibrated_profile_text(const ExperimentConfig& calibrated,
                                    const CalibrationResult& result) {
  std::string header = fmt::format(
      "# Attack profile written by `phantom calibrate`; regenerate rather than edit.\n"
      "# targets: amplitude ratio {}, cosine {}\n"
      "# achieved on the benign training split: amplitude ratio {:.6f}, cosine {:.6f}\n"
      "# coupling amplitude {:.6f}, {} search evaluations\n\n",
      calibrated.calibration.amplitude_ratio, calibrated.calibration.cosine_similarity,
      result.achieved_amplitude_ratio, result.achieved_cosine, result.amplitude,
      result.evaluations);
  return header + calibrated.canonical_text();
}

}  // namespace phantom
