#include "phantom/learn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "phantom/error.hpp"

namespace phantom {

const char* to_string(PhaseFilter f) {
  return f == PhaseFilter::dwell_only ? "dwell_only" : "all";
}

PhaseFilter parse_phase_filter(const std::string& text) {
  if (text == "dwell_only") return PhaseFilter::dwell_only;
  if (text == "all") return PhaseFilter::all;
  throw ConfigError("unknown phase filter '" + text + "'");
}

void WindowSpec::validate() const {
  if (window_len <= 0 || stride <= 0) throw InvariantError("window: length and stride must be > 0");
}

void ForestParams::validate() const {
  if (n_trees <= 0) throw InvariantError("forest: n_trees must be > 0");
  if (max_depth < 0) throw InvariantError("forest: max_depth must be >= 0");
  if (min_leaf <= 0) throw InvariantError("forest: min_leaf must be > 0");
  if (feature_subsample <= 0) throw InvariantError("forest: feature_subsample must be > 0");
}

std::string feature_name(std::size_t index) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  static constexpr const char* kStats[] = {"mean", "std", "min", "max", "rms"};
  if (index == kMagnitudeMean) return "mag_mean";
  if (index >= kFeatureCount) return "invalid";
  return std::string(kAxes[index / kStatsPerAxis]) + "_" + kStats[index % kStatsPerAxis];
}

FeatureVector extract_features(std::span<const SensorFrame> window, const WindowSpec& spec) {
  if (static_cast<std::int64_t>(window.size()) != spec.window_len || window.empty()) {
    throw InvariantError("extract_features: window holds " + std::to_string(window.size()) +
                         " frames, expected " + std::to_string(spec.window_len));
  }
  const double n = static_cast<double>(window.size());
  FeatureVector f{};
  for (int axis = 0; axis < 3; ++axis) {
    double sum = 0.0;
    double sum_sq = 0.0;
    double lo = window.front().measured_force[axis];
    double hi = lo;
    for (const auto& frame : window) {
      const double v = frame.measured_force[axis];
      sum += v;
      sum_sq += v * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& frame : window) {
      const double d = frame.measured_force[axis] - mean;
      var += d * d;
    }
    f[feature_index(axis, kStd)] = std::sqrt(var / n);
    // Rounding can put the mean a hair outside [min, max] on constant windows.
    f[feature_index(axis, kMean)] = std::clamp(mean, lo, hi);
    f[feature_index(axis, kMin)] = lo;
    f[feature_index(axis, kMax)] = hi;
    f[feature_index(axis, kRms)] = std::sqrt(sum_sq / n);
  }
  double mag = 0.0;
  for (const auto& frame : window) mag += frame.measured_force.magnitude();
  f[kMagnitudeMean] = mag / n;
  return f;
}

std::vector<std::size_t> window_starts(const LabeledTrace& trace, const WindowSpec& spec) {
  spec.validate();
  std::int64_t begin = 0;
  std::int64_t end = static_cast<std::int64_t>(trace.frames.size());
  if (spec.phase_filter == PhaseFilter::dwell_only) {
    begin = std::max<std::int64_t>(begin, trace.dwell_begin);
    end = std::min<std::int64_t>(end, trace.dwell_end);
  }
  std::vector<std::size_t> starts;
  for (std::int64_t s = begin; s + spec.window_len <= end; s += spec.stride) {
    starts.push_back(static_cast<std::size_t>(s));
  }
  return starts;
}

std::vector<Sample> make_samples(const std::vector<LabeledTrace>& traces,
                                 std::span<const std::size_t> selection, const WindowSpec& spec) {
  std::vector<Sample> samples;
  for (std::size_t idx : selection) {
    const auto& trace = traces.at(idx);
    const std::span<const SensorFrame> frames(trace.frames);
    for (std::size_t s : window_starts(trace, spec)) {
      samples.push_back(
          {extract_features(frames.subspan(s, static_cast<std::size_t>(spec.window_len)), spec),
           trace.label});
    }
  }
  return samples;
}

int majority_vote(std::span<const std::uint32_t> counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = static_cast<int>(c);
  }
  return best;
}

const DecisionTree::Node& DecisionTree::leaf_for(const FeatureVector& x) const {
  const Node* node = &nodes.at(0);
  while (!node->is_leaf()) {
    node = &nodes[x[node->feature] <= node->threshold ? node->left : node->right];
  }
  return *node;
}

int DecisionTree::predict(const FeatureVector& x) const {
  return majority_vote(leaf_for(x).votes);
}

int DecisionTree::depth() const {
  // Children always come after their parent, so one forward pass suffices.
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[nodes[i].left] = level[i] + 1;
      level[nodes[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

namespace {

double gini(std::span<const std::uint32_t> counts, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (std::uint32_t c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const Sample> samples, int n_classes, const ForestParams& params,
              RngStream& rng)
      : samples_(samples), n_classes_(n_classes), params_(params), rng_(rng) {}

  DecisionTree build() {
    std::vector<std::size_t> all(samples_.size());
    std::iota(all.begin(), all.end(), 0);
    tree_.nodes.emplace_back();
    grow(0, all, 0);
    return std::move(tree_);
  }

 private:
  std::vector<std::uint32_t> class_counts(const std::vector<std::size_t>& idx) const {
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(n_classes_), 0);
    for (std::size_t i : idx) ++counts[static_cast<std::size_t>(samples_[i].label)];
    return counts;
  }

  std::optional<SplitChoice> best_split(const std::vector<std::size_t>& idx) {
    const std::size_t n = idx.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    std::optional<SplitChoice> best;

    // Features are visited in a random order until `feature_subsample` of them
    // have shown more than one value here; constant features do not count.
    std::array<int, kFeatureCount> pool;
    std::iota(pool.begin(), pool.end(), 0);
    const auto wanted = static_cast<std::size_t>(params_.feature_subsample);
    std::size_t informative = 0;
    for (std::size_t drawn = 0; drawn < kFeatureCount && informative < wanted; ++drawn) {
      std::swap(pool[drawn], pool[drawn + rng_.below(kFeatureCount - drawn)]);
      const int feature = pool[drawn];
      std::vector<std::size_t> order = idx;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples_[a].features[feature] < samples_[b].features[feature];
      });
      if (!(samples_[order.front()].features[feature] < samples_[order.back()].features[feature])) {
        continue;
      }
      ++informative;
      std::vector<std::uint32_t> left(static_cast<std::size_t>(n_classes_), 0);
      std::vector<std::uint32_t> right = class_counts(idx);

      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto label = static_cast<std::size_t>(samples_[order[i]].label);
        ++left[label];
        --right[label];
        const double lo = samples_[order[i]].features[feature];
        const double hi = samples_[order[i + 1]].features[feature];
        if (!(lo < hi)) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;

        const double impurity = (static_cast<double>(n_left) * gini(left, static_cast<double>(n_left)) +
                                 static_cast<double>(n_right) * gini(right, static_cast<double>(n_right))) /
                                static_cast<double>(n);
        double threshold = lo + (hi - lo) * 0.5;
        if (!(threshold < hi)) threshold = lo;

        const bool better =
            !best || impurity < best->impurity ||
            (impurity == best->impurity &&
             (feature < best->feature ||
              (feature == best->feature && threshold < best->threshold)));
        if (better) best = SplitChoice{feature, threshold, impurity};
      }
    }
    return best;
  }

  void grow(std::size_t node_id, const std::vector<std::size_t>& idx, int depth) {
    auto counts = class_counts(idx);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    const bool too_small = idx.size() < 2 * static_cast<std::size_t>(params_.min_leaf);

    std::optional<SplitChoice> split;
    if (depth < params_.max_depth && !pure && !too_small) split = best_split(idx);
    if (!split) {
      tree_.nodes[node_id].votes = std::move(counts);
      return;
    }

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (std::size_t i : idx) {
      (samples_[i].features[split->feature] <= split->threshold ? left_idx : right_idx).push_back(i);
    }

    const int left_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    auto& node = tree_.nodes[node_id];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left_id;
    node.right = right_id;

    grow(static_cast<std::size_t>(left_id), left_idx, depth + 1);
    grow(static_cast<std::size_t>(right_id), right_idx, depth + 1);
  }

  std::span<const Sample> samples_;
  int n_classes_;
  const ForestParams& params_;
  RngStream& rng_;
  DecisionTree tree_;
};

void check_training_set(std::span<const Sample> train, int& n_classes) {
  if (train.empty()) throw InvariantError("train_forest: degenerate dataset (empty)");
  int max_label = 0;
  for (const auto& s : train) {
    if (s.label < 0) throw InvariantError("train_forest: negative label");
    for (double v : s.features) {
      if (!std::isfinite(v)) throw InvariantError("train_forest: non-finite feature");
    }
    max_label = std::max(max_label, s.label);
  }
  const bool single = std::all_of(train.begin(), train.end(),
                                  [&](const Sample& s) { return s.label == train.front().label; });
  if (single) throw InvariantError("train_forest: degenerate dataset (single class)");
  n_classes = max_label + 1;
}

}  // namespace

DecisionTree grow_tree(std::span<const Sample> samples, int n_classes, const ForestParams& params,
                       RngStream& rng) {
  params.validate();
  if (samples.empty()) throw InvariantError("grow_tree: no samples");
  return TreeBuilder(samples, n_classes, params, rng).build();
}

Forest train_forest(std::span<const Sample> train, const ForestParams& params, std::uint64_t seed) {
  params.validate();
  Forest forest;
  forest.params = params;
  forest.seed = seed;
  check_training_set(train, forest.n_classes);

  const RngStream root(seed, "forest");
  forest.trees.reserve(static_cast<std::size_t>(params.n_trees));
  std::vector<Sample> bag(train.size());
  for (int t = 0; t < params.n_trees; ++t) {
    RngStream rng = root.substream("tree" + std::to_string(t));
    for (auto& s : bag) s = train[rng.below(train.size())];
    forest.trees.push_back(grow_tree(bag, forest.n_classes, params, rng));
  }
  return forest;
}

Prediction Forest::predict(const FeatureVector& x) const {
  std::vector<std::uint32_t> votes(static_cast<std::size_t>(n_classes), 0);
  for (const auto& tree : trees) ++votes[static_cast<std::size_t>(tree.predict(x))];
  Prediction p;
  p.label = majority_vote(votes);
  p.distribution.resize(votes.size());
  for (std::size_t c = 0; c < votes.size(); ++c) {
    p.distribution[c] = static_cast<double>(votes[c]) / static_cast<double>(trees.size());
  }
  return p;
}

Evaluation evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                int n_classes) {
  if (truth.size() != predicted.size()) {
    throw InvariantError("evaluate: truth and prediction counts differ");
  }
  if (truth.empty()) throw InvariantError("evaluate: empty test set");
  const auto k = static_cast<std::size_t>(n_classes);

  Evaluation ev;
  ev.count = static_cast<std::int64_t>(truth.size());
  ev.confusion.assign(k, std::vector<std::int64_t>(k, 0));
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (t >= k || p >= k) throw InvariantError("evaluate: label out of range");
    ++ev.confusion[t][p];
    if (t == p) ++correct;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(ev.count);

  bool any_f1 = false;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = ev.confusion[c][c];
    std::int64_t predicted_c = 0;
    std::int64_t actual_c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      predicted_c += ev.confusion[j][c];
      actual_c += ev.confusion[c][j];
    }
    ClassMetrics m;
    m.support = actual_c;
    m.precision_defined = predicted_c > 0;
    m.recall_defined = actual_c > 0;
    m.precision = m.precision_defined ? static_cast<double>(tp) / static_cast<double>(predicted_c) : 0.0;
    m.recall = m.recall_defined ? static_cast<double>(tp) / static_cast<double>(actual_c) : 0.0;
    m.f1_defined = m.precision_defined && m.recall_defined && (m.precision + m.recall) > 0.0;
    m.f1 = m.f1_defined ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    ev.macro_precision += m.precision;
    ev.macro_recall += m.recall;
    f1_sum += m.f1;
    any_f1 = any_f1 || m.f1_defined;
    ev.per_class.push_back(m);
  }
  ev.macro_precision /= static_cast<double>(k);
  ev.macro_recall /= static_cast<double>(k);
  if (any_f1) ev.macro_f1 = f1_sum / static_cast<double>(k);
  return ev;
}

Evaluation evaluate(const Forest& forest, std::span<const Sample> test) {
  std::vector<int> truth;
  std::vector<int> predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());
  for (const auto& s : test) {
    truth.push_back(s.label);
    predicted.push_back(forest.predict(s.features).label);
  }
  int n_classes = forest.n_classes;
  for (int t : truth) n_classes = std::max(n_classes, t + 1);
  return evaluate_predictions(truth, predicted, n_classes);
}

}  // namespace phantom
