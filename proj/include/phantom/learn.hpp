#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phantom/datagen.hpp"
#include "phantom/sensor.hpp"

namespace phantom {

enum class PhaseFilter { dwell_only, all };

const char* to_string(PhaseFilter f);
PhaseFilter parse_phase_filter(const std::string& text);

struct WindowSpec {
  std::int64_t window_len = 100;
  std::int64_t stride = 50;
  PhaseFilter phase_filter = PhaseFilter::dwell_only;

  void validate() const;
};

/// Per axis (x, y, z): mean, std, min, max, rms; then the mean magnitude.
/// Standard deviations are population (divide by n) throughout.
inline constexpr std::size_t kFeatureCount = 16;
using FeatureVector = std::array<double, kFeatureCount>;

enum FeatureStat { kMean = 0, kStd = 1, kMin = 2, kMax = 3, kRms = 4 };
inline constexpr std::size_t kStatsPerAxis = 5;
inline constexpr std::size_t kMagnitudeMean = 15;

constexpr std::size_t feature_index(int axis, FeatureStat stat) {
  return static_cast<std::size_t>(axis) * kStatsPerAxis + static_cast<std::size_t>(stat);
}

std::string feature_name(std::size_t index);

FeatureVector extract_features(std::span<const SensorFrame> window, const WindowSpec& spec);

/// Window start offsets into `trace.frames` under the phase filter.
std::vector<std::size_t> window_starts(const LabeledTrace& trace, const WindowSpec& spec);

struct Sample {
  FeatureVector features{};
  int label = 0;
};

/// Windows every selected trace and labels each window with its trace label.
std::vector<Sample> make_samples(const std::vector<LabeledTrace>& traces,
                                 std::span<const std::size_t> selection, const WindowSpec& spec);

struct ForestParams {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  int feature_subsample = 4;

  void validate() const;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Flat decision tree. Internal nodes send x[feature] <= threshold left.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::uint32_t> votes;  // leaf only: training samples per class

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  std::vector<Node> nodes;  // nodes[0] is the root

  int predict(const FeatureVector& x) const;
  const Node& leaf_for(const FeatureVector& x) const;
  int depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct Prediction {
  int label = 0;
  std::vector<double> distribution;  // fraction of trees voting for each class
};

struct Forest {
  ForestParams params;
  std::uint64_t seed = 0;
  int n_classes = 0;
  std::vector<DecisionTree> trees;

  Prediction predict(const FeatureVector& x) const;
  friend bool operator==(const Forest&, const Forest&) = default;
};

/// Grows one tree on `samples` (already bootstrapped). Gini splits over a random
/// feature subset per node (features constant at the node are skipped and do
/// not count toward the subset size); thresholds are midpoints between adjacent distinct
/// values; equal impurity prefers the lower feature index, then the lower threshold.
DecisionTree grow_tree(std::span<const Sample> samples, int n_classes, const ForestParams& params,
                       RngStream& rng);

/// Bootstrap + grow per tree, tree i on substream "forest/tree<i>" of `seed`.
Forest train_forest(std::span<const Sample> train, const ForestParams& params, std::uint64_t seed);

/// Majority vote with ties to the lowest class index.
int majority_vote(std::span<const std::uint32_t> counts);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;  // false when the class was never predicted
  bool recall_defined = true;     // false when the class never occurs
  bool f1_defined = true;
  std::int64_t support = 0;
};

struct Evaluation {
  std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  std::optional<double> macro_f1;  // absent when no class has a defined F1
  double accuracy = 0.0;
  std::int64_t count = 0;
};

/// Metrics from (true, predicted) pairs. Undefined per-class values count as 0
/// in the macro averages and carry a flag.
Evaluation evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                int n_classes);

Evaluation evaluate(const Forest& forest, std::span<const Sample> test);

}  // namespace phantom
