#include "aue/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "aue/error.hpp"
#include "aue/random.hpp"
#include "text.hpp"

namespace aue {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, int classes,
                          std::vector<std::string> class_names) {
  if (predictions.size() != labels.size()) throw DataError("predictions and labels differ in length");
  if (classes < 1) throw UsageError("confusion matrix needs at least one class");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(static_cast<std::size_t>(classes * classes), 0);
  if (class_names.empty()) {
    for (int c = 0; c < classes; ++c) class_names.push_back(std::to_string(c));
  }
  if (class_names.size() != static_cast<std::size_t>(classes)) throw UsageError("one name per class");
  cm.class_names = std::move(class_names);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    if (t < 0 || t >= classes || p < 0 || p >= classes) {
      throw RangeError("level out of range at position " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t * classes + p)];
  }
  return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (cm.classes < 1 || total == 0) throw DataError("cannot compute metrics of an empty confusion matrix");
  const int L = cm.classes;
  MetricReport r;
  r.per_class.resize(static_cast<std::size_t>(L));
  std::size_t diagonal = 0;
  double recall_sum = 0.0;
  int present = 0;
  for (int c = 0; c < L; ++c) {
    std::size_t row = 0;
    std::size_t column = 0;
    for (int o = 0; o < L; ++o) {
      row += cm.at(c, o);
      column += cm.at(o, c);
    }
    const std::size_t tp = cm.at(c, c);
    const std::size_t fp = column - tp;
    const std::size_t fn = row - tp;
    auto& m = r.per_class[static_cast<std::size_t>(c)];
    m.support = row;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = 2 * tp + fp + fn > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn) : 0.0;
    diagonal += tp;
    if (row > 0) {
      recall_sum += m.recall;
      ++present;
    }
    const double weight = static_cast<double>(row) / static_cast<double>(total);
    r.weighted_precision += weight * m.precision;
    r.weighted_recall += weight * m.recall;
    r.weighted_f1 += weight * m.f1;
  }
  r.weighted_accuracy = static_cast<double>(diagonal) / static_cast<double>(total);
  r.unweighted_accuracy = present > 0 ? recall_sum / present : 0.0;
  return r;
}

MetricReport mean_report(std::span<const MetricReport> reports) {
  if (reports.empty()) throw DataError("no reports to average");
  MetricReport mean;
  mean.per_class.resize(reports.front().per_class.size());
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    if (r.per_class.size() != mean.per_class.size()) throw DataError("reports disagree on class count");
    mean.weighted_accuracy += r.weighted_accuracy / n;
    mean.unweighted_accuracy += r.unweighted_accuracy / n;
    mean.weighted_precision += r.weighted_precision / n;
    mean.weighted_recall += r.weighted_recall / n;
    mean.weighted_f1 += r.weighted_f1 / n;
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
      mean.per_class[c].precision += r.per_class[c].precision / n;
      mean.per_class[c].recall += r.per_class[c].recall / n;
      mean.per_class[c].f1 += r.per_class[c].f1 / n;
      mean.per_class[c].support += r.per_class[c].support;
    }
  }
  return mean;
}

std::string method_name(Method method) {
  switch (method) {
    case Method::Pspi: return "pspi";
    case Method::Aue: return "aue";
    case Method::AueWeighted: return "aue-weighted";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "pspi") return Method::Pspi;
  if (text == "aue") return Method::Aue;
  if (text == "aue-weighted") return Method::AueWeighted;
  return std::nullopt;
}

std::vector<FoldSplit> fold_splits(const Dataset& dataset, const FoldSpec& folds) {
  const auto assignment = folds.assignment();
  const auto subjects = dataset.subjects();
  for (const auto& [subject, fold] : assignment) {
    if (!std::binary_search(subjects.begin(), subjects.end(), subject)) {
      throw DataError("fold " + std::to_string(fold) + " references unknown subject '" + subject + "'");
    }
  }
  for (const auto& s : subjects) {
    if (!assignment.contains(s)) throw DataError("subject '" + s + "' is not assigned to any fold");
  }
  std::vector<FoldSplit> splits(folds.folds.size());
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    const std::size_t home = assignment.at(dataset.frames[i].subject_id);
    for (std::size_t f = 0; f < splits.size(); ++f) (f == home ? splits[f].test : splits[f].train).push_back(i);
  }
  // Structural disjointness: no subject on both sides of any split.
  for (std::size_t f = 0; f < splits.size(); ++f) {
    std::set<std::string> train_subjects;
    for (auto i : splits[f].train) train_subjects.insert(dataset.frames[i].subject_id);
    for (auto i : splits[f].test) {
      if (train_subjects.contains(dataset.frames[i].subject_id)) {
        throw LeakageError("subject '" + dataset.frames[i].subject_id + "' in train and test of fold " +
                           std::to_string(f));
      }
    }
  }
  return splits;
}

LabelScheme dataset_scheme(const Dataset& dataset) {
  if (dataset.frames.empty()) throw DataError("dataset has no frames");
  const LabelScheme scheme = dataset.frames.front().scheme;
  for (const auto& f : dataset.frames) {
    if (f.scheme != scheme) throw DataError("dataset mixes labelling schemes");
  }
  return scheme;
}

int prediction_level(double value, LabelScheme scheme, bool regress_levels) {
  if (!std::isfinite(value)) throw NumericError("non-finite prediction");
  if (regress_levels) {
    const double top = level_count(scheme) - 1;
    return static_cast<int>(std::lround(std::clamp(value, 0.0, top)));
  }
  const double v = std::clamp(value, scheme_min(scheme), scheme_max(scheme));
  switch (scheme) {
    case LabelScheme::FLACC4: return bin_label(v, scheme).index;
    case LabelScheme::NFCS2: return v >= 2.0 ? 1 : 0;
    case LabelScheme::BINARY: return v >= 0.5 ? 1 : 0;
  }
  return 0;
}

double regression_target(const FrameRecord& frame, bool regress_levels) {
  return regress_levels ? static_cast<double>(bin_label(frame.label, frame.scheme).index) : frame.label;
}

namespace {

std::vector<TrainingSample> samples_of(const Dataset& dataset, std::span<const std::size_t> indices,
                                       bool regress_levels) {
  std::vector<TrainingSample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back({dataset.frames[i].au, regression_target(dataset.frames[i], regress_levels)});
  return out;
}

// Splits training frames by subject into fit and model-selection subsets.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> inner_split(
    const Dataset& dataset, std::span<const std::size_t> train, double fraction, std::uint64_t seed) {
  std::set<std::string> unique;
  for (auto i : train) unique.insert(dataset.frames[i].subject_id);
  std::vector<std::string> subjects(unique.begin(), unique.end());
  std::size_t held = 0;
  if (fraction > 0.0 && subjects.size() >= 2) {
    held = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * subjects.size())), 1,
                                   subjects.size() - 1);
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(subjects));
  const std::set<std::string> validation(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> fit;
  std::vector<std::size_t> val;
  for (auto i : train) (validation.contains(dataset.frames[i].subject_id) ? val : fit).push_back(i);
  return {fit, val};
}

EngagementProfile fold_profile(const PipelineConfig& config, const Dataset& dataset,
                               std::span<const std::size_t> train) {
  return config.fixed_profile ? *config.fixed_profile : dataset_engagement(dataset, train);
}

std::vector<int> labels_of(const Dataset& dataset, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(bin_label(dataset.frames[i].label, dataset.frames[i].scheme).index);
  return out;
}

}  // namespace

FoldPipeline make_pipeline(const PipelineConfig& config) {
  config.train.validate();
  if (config.method == Method::Pspi) {
    return [config](const Dataset& dataset, const FoldSplit& split, std::size_t) {
      const LabelScheme scheme = dataset_scheme(dataset);
      std::vector<double> scores;
      for (auto i : split.train) scores.push_back(pspi(dataset.frames[i].au, config.eye_mode));
      const auto thresholds = calibrate_thresholds(scores, labels_of(dataset, split.train), level_count(scheme));
      std::vector<int> out;
      for (auto i : split.test) out.push_back(pspi_classify(pspi(dataset.frames[i].au, config.eye_mode), thresholds));
      return out;
    };
  }
  return [config](const Dataset& dataset, const FoldSplit& split, std::size_t fold) {
    const LabelScheme scheme = dataset_scheme(dataset);
    const auto profile = fold_profile(config, dataset, split.train);
    const auto [fit, val] =
        inner_split(dataset, split.train, config.validation_fraction, mix_seed(config.train.seed, 1000 + fold));
    TrainConfig tc = config.train;
    tc.seed = mix_seed(config.train.seed, fold);
    tc.use_engagement_weights = config.method == Method::AueWeighted;
    const auto fit_samples = samples_of(dataset, fit, config.regress_levels);
    const auto val_samples = samples_of(dataset, val, config.regress_levels);
    const auto trained = train(fit_samples, val_samples, profile, config.k, tc);
    std::vector<int> out;
    for (auto i : split.test) {
      out.push_back(prediction_level(predict(trained.model, dataset.frames[i].au), scheme, config.regress_levels));
    }
    return out;
  };
}

CrossValidationResult cross_validate(const Dataset& dataset, const FoldSpec& folds,
                                     const FoldPipeline& pipeline) {
  const LabelScheme scheme = dataset_scheme(dataset);
  const int L = level_count(scheme);
  std::vector<std::string> names;
  for (int c = 0; c < L; ++c) names.push_back(level_name(scheme, c));

  CrossValidationResult result;
  std::vector<MetricReport> reports;
  const auto splits = fold_splits(dataset, folds);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    FoldOutcome outcome;
    outcome.test_frames = splits[f].test;
    outcome.labels = labels_of(dataset, splits[f].test);
    outcome.predictions = pipeline(dataset, splits[f], f);
    if (outcome.predictions.size() != outcome.labels.size()) {
      throw NumericError("pipeline returned the wrong number of predictions");
    }
    outcome.confusion = confusion(outcome.predictions, outcome.labels, L, names);
    outcome.report = metrics(outcome.confusion);
    reports.push_back(outcome.report);
    result.folds.push_back(std::move(outcome));
  }
  result.mean = mean_report(reports);
  return result;
}

CrossValidationResult cross_validate(const Dataset& dataset, const FoldSpec& folds,
                                     const PipelineConfig& config) {
  return cross_validate(dataset, folds, make_pipeline(config));
}

AblationResult ablate_top_k(const Dataset& dataset, const FoldSpec& folds, std::span<const int> k_range,
                            const PipelineConfig& config) {
  if (k_range.empty()) throw UsageError("empty k range");
  for (int k : k_range) {
    if (k < 1 || k > static_cast<int>(kAUCount)) throw UsageError("k range must lie within [1, 12]");
  }
  config.train.validate();
  const auto splits = fold_splits(dataset, folds);
  AblationResult result;
  for (int k : k_range) result.mean_loss[k] = 0.0;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    const auto profile = fold_profile(config, dataset, splits[f].train);
    const auto train_samples = samples_of(dataset, splits[f].train, config.regress_levels);
    const auto val_samples = samples_of(dataset, splits[f].test, config.regress_levels);
    for (auto& [k, loss] : result.mean_loss) {
      TrainConfig tc = config.train;
      tc.seed = mix_seed(mix_seed(config.train.seed, f), static_cast<std::uint64_t>(k));
      tc.use_engagement_weights = config.method != Method::Aue;
      loss += train(train_samples, val_samples, profile, k, tc).best_validation_loss /
              static_cast<double>(splits.size());
    }
  }
  double best = 0.0;
  for (const auto& [k, loss] : result.mean_loss) {
    if (result.best_k == 0 || loss < best) {
      best = loss;
      result.best_k = k;
    }
  }
  return result;
}

std::string format_report_table(std::span<const std::pair<std::string, MetricReport>> rows) {
  std::size_t width = 6;
  for (const auto& [name, r] : rows) width = std::max(width, name.size());
  const auto pad = [width](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
  std::string out = pad("Method") + "WA(%)   UA(%)   Precision(%)   Recall(%)   F1 Score\n";
  for (const auto& [name, r] : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-8.1f%-8.1f%-15.1f%-12.1f%.3f\n", 100.0 * r.weighted_accuracy,
                  100.0 * r.unweighted_accuracy, 100.0 * r.weighted_precision, 100.0 * r.weighted_recall,
                  r.weighted_f1);
    out += pad(name) + line;
  }
  return out;
}

std::string format_report_json(std::span<const std::pair<std::string, MetricReport>> rows) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& [name, r] : rows) {
    nlohmann::ordered_json row;
    row["method"] = name;
    row["weighted_accuracy"] = r.weighted_accuracy;
    row["unweighted_accuracy"] = r.unweighted_accuracy;
    row["weighted_precision"] = r.weighted_precision;
    row["weighted_recall"] = r.weighted_recall;
    row["weighted_f1"] = r.weighted_f1;
    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (const auto& c : r.per_class) {
      classes.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
    }
    row["per_class"] = std::move(classes);
    doc.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string format_ablation(const AblationResult& result) {
  std::string out = "# k mean_validation_loss\n";
  for (const auto& [k, loss] : result.mean_loss) out += std::to_string(k) + ' ' + text::format_exact(loss) + '\n';
  out += "best_k " + std::to_string(result.best_k) + '\n';
  return out;
}

}  // namespace aue
