#pragma once

// Classification metrics, the subject-disjoint cross-validation harness and
// the top-k core-AU ablation.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aue/engagement.hpp"
#include "aue/ingestion.hpp"
#include "aue/pspi.hpp"
#include "aue/regressor.hpp"

namespace aue {

struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::size_t> counts;  // row = true level, column = predicted level
  std::vector<std::string> class_names;

  std::size_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth * classes + predicted)];
  }
  std::size_t total() const;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, int classes,
                          std::vector<std::string> class_names = {});

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricReport {
  double weighted_accuracy = 0.0;    // overall accuracy
  double unweighted_accuracy = 0.0;  // mean recall over classes present in the labels
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
};

// One-vs-rest per-class metrics; 0 wherever a denominator is 0. Weighted
// aggregates use class support as weights.
MetricReport metrics(const ConfusionMatrix& cm);

// Unweighted average of reports (per-class supports are summed).
MetricReport mean_report(std::span<const MetricReport> reports);

enum class Method { Pspi, Aue, AueWeighted };

std::string method_name(Method method);
std::optional<Method> parse_method(std::string_view text);

struct PipelineConfig {
  Method method = Method::AueWeighted;
  int k = 7;
  TrainConfig train;
  EyeClosureMode eye_mode = EyeClosureMode::Binary;
  // Profile used for every fold. When absent, each fold's profile comes from
  // its own training frames' activation maps.
  std::optional<EngagementProfile> fixed_profile;
  // Share of training subjects held out for regressor model selection.
  double validation_fraction = 0.2;
  // Regress level indices instead of native-scale labels.
  bool regress_levels = false;
};

struct FoldSplit {
  std::vector<std::size_t> train;  // frame indices
  std::vector<std::size_t> test;
};

// Frame index sets per fold. Throws LeakageError if a subject sits in two
// folds and DataError if folds and dataset subjects disagree.
std::vector<FoldSplit> fold_splits(const Dataset& dataset, const FoldSpec& folds);

// Maps a regressor output onto a pain level of the scheme.
int prediction_level(double value, LabelScheme scheme, bool regress_levels = false);
double regression_target(const FrameRecord& frame, bool regress_levels = false);

// Single labelling scheme shared by every frame (DataError otherwise).
LabelScheme dataset_scheme(const Dataset& dataset);

// Returns one predicted level per test frame.
using FoldPipeline = std::function<std::vector<int>(const Dataset& dataset, const FoldSplit& split,
                                                    std::size_t fold_index)>;

FoldPipeline make_pipeline(const PipelineConfig& config);

struct FoldOutcome {
  std::vector<std::size_t> test_frames;
  std::vector<int> predictions;
  std::vector<int> labels;
  ConfusionMatrix confusion;
  MetricReport report;
};

struct CrossValidationResult {
  std::vector<FoldOutcome> folds;
  MetricReport mean;
};

CrossValidationResult cross_validate(const Dataset& dataset, const FoldSpec& folds,
                                     const FoldPipeline& pipeline);
CrossValidationResult cross_validate(const Dataset& dataset, const FoldSpec& folds,
                                     const PipelineConfig& config);

struct AblationResult {
  std::map<int, double> mean_loss;  // k -> validation loss averaged over folds
  int best_k = 0;                   // smallest k attaining the minimum
};

// Trains one regressor per (fold, k) with the held-out fold as validation
// set and records the best validation loss.
AblationResult ablate_top_k(const Dataset& dataset, const FoldSpec& folds, std::span<const int> k_range,
                            const PipelineConfig& config);

// Fixed-width table in the column order method, WA(%), UA(%), Precision(%),
// Recall(%), F1.
std::string format_report_table(std::span<const std::pair<std::string, MetricReport>> rows);
// Machine-readable variant keyed by metric name.
std::string format_report_json(std::span<const std::pair<std::string, MetricReport>> rows);

std::string format_ablation(const AblationResult& result);

}  // namespace aue
