#include <doctest.h>

#include <algorithm>
#include <json.hpp>

#include "aue/error.hpp"
#include "aue/evaluation.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace aue;

namespace {

MetricReport report_of(const std::vector<int>& pred, const std::vector<int>& truth, int classes) {
  return metrics(confusion(pred, truth, classes));
}

FoldSpec folds_for(const Dataset& d, std::vector<int> sizes, std::uint64_t seed) {
  return subject_folds(d.subjects(), sizes, seed);
}

EngagementProfile planted_profile() {
  std::array<double, kAUCount> raw{};
  raw[au_index(AUId::AU27)] = 1.0;
  raw[au_index(AUId::AU25)] = 0.9;
  raw[au_index(AUId::AU10)] = 0.75;
  raw[au_index(AUId::AU12)] = 0.6;
  raw[au_index(AUId::AU9)] = 0.5;
  raw[au_index(AUId::AU6)] = 0.4;
  for (auto& r : raw) r = std::max(r, 0.05);
  return EngagementProfile::from_raw(raw, 1);
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<int> pred = {0, 1, 1, 2, 0};
  const std::vector<int> truth = {0, 1, 2, 2, 1};
  const auto cm = confusion(pred, truth, 3);
  CHECK(cm.total() == 5);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(2, 1) == 1);
  CHECK(cm.at(2, 2) == 1);
  CHECK(cm.at(1, 0) == 1);
  CHECK(cm.at(0, 1) == 0);

  const std::vector<int> short_truth = {0};
  CHECK_THROWS_AS(confusion(pred, short_truth, 3), DataError);
  const std::vector<int> bad = {0, 1, 5, 2, 0};
  CHECK_THROWS_AS(confusion(bad, truth, 3), DataError);
  CHECK_THROWS_AS(metrics(confusion(std::vector<int>{}, std::vector<int>{}, 3)), DataError);
}

TEST_CASE("binary metrics by hand") {
  // tp 2, fp 1, fn 1 for class 1.
  const auto r = report_of({1, 1, 1, 0, 0}, {1, 1, 0, 1, 0}, 2);
  CHECK(r.per_class[1].precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[1].recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[1].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[0].support == 2);
  CHECK(r.weighted_accuracy == doctest::Approx(0.6));
}

TEST_CASE("perfect predictions") {
  const std::vector<int> labels = {0, 1, 2, 3, 3, 2, 1, 0, 0};
  const auto r = report_of(labels, labels, 4);
  CHECK(r.weighted_accuracy == 1.0);
  CHECK(r.unweighted_accuracy == 1.0);
  CHECK(r.weighted_precision == doctest::Approx(1.0));
  CHECK(r.weighted_recall == doctest::Approx(1.0));
  CHECK(r.weighted_f1 == doctest::Approx(1.0));
}

TEST_CASE("absent classes score zero and do not count towards UA") {
  const auto r = report_of({0, 0, 1, 1}, {0, 0, 1, 0}, 4);
  CHECK(r.per_class[2].support == 0);
  CHECK(r.per_class[2].f1 == 0.0);
  CHECK(r.per_class[3].precision == 0.0);
  CHECK(r.unweighted_accuracy == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
}

TEST_CASE("metrics agree with the count-level reference") {
  Rng rng(60);
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(3));
    const std::size_t n = 1 + rng.below(60);
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
      pred[i] = rng.uniform() < 0.6 ? truth[i] : static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    }
    const auto r = report_of(pred, truth, classes);
    const auto o = oracle::scores(pred, truth, classes);
    CHECK(r.weighted_accuracy == o.wa);
    CHECK(r.unweighted_accuracy == o.ua);
    CHECK(r.weighted_precision == o.precision);
    CHECK(r.weighted_recall == o.recall);
    CHECK(r.weighted_f1 == o.f1);
    // Support-weighted recall is overall accuracy.
    CHECK(std::abs(r.weighted_recall - r.weighted_accuracy) <= 1e-12);
    for (double v : {r.weighted_accuracy, r.unweighted_accuracy, r.weighted_precision, r.weighted_f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }

    // Relabelling the classes consistently changes nothing.
    std::vector<int> perm(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) perm[static_cast<std::size_t>(c)] = c;
    rng.shuffle(std::span<int>(perm));
    std::vector<int> pp(n), pt(n);
    for (std::size_t i = 0; i < n; ++i) {
      pp[i] = perm[static_cast<std::size_t>(pred[i])];
      pt[i] = perm[static_cast<std::size_t>(truth[i])];
    }
    const auto q = report_of(pp, pt, classes);
    CHECK(std::abs(q.weighted_accuracy - r.weighted_accuracy) <= 1e-12);
    CHECK(std::abs(q.unweighted_accuracy - r.unweighted_accuracy) <= 1e-12);
    CHECK(std::abs(q.weighted_f1 - r.weighted_f1) <= 1e-12);
  }
}

TEST_CASE("mean report averages folds") {
  const auto a = report_of({0, 1}, {0, 1}, 2);
  const auto b = report_of({1, 1}, {0, 1}, 2);
  const std::vector<MetricReport> both = {a, b};
  const auto m = mean_report(both);
  CHECK(m.weighted_accuracy == doctest::Approx(0.75));
  CHECK(m.per_class[0].support == 2);
}

TEST_CASE("prediction levels") {
  CHECK(prediction_level(-3.0, LabelScheme::FLACC4) == 0);
  CHECK(prediction_level(2.49, LabelScheme::FLACC4) == 0);
  CHECK(prediction_level(2.5, LabelScheme::FLACC4) == 1);
  CHECK(prediction_level(7.5, LabelScheme::FLACC4) == 3);
  CHECK(prediction_level(42.0, LabelScheme::FLACC4) == 3);
  CHECK(prediction_level(1.99, LabelScheme::NFCS2) == 0);
  CHECK(prediction_level(2.0, LabelScheme::NFCS2) == 1);
  CHECK(prediction_level(0.49, LabelScheme::BINARY) == 0);
  CHECK(prediction_level(0.5, LabelScheme::BINARY) == 1);
  CHECK(prediction_level(1.6, LabelScheme::FLACC4, true) == 2);
  CHECK(prediction_level(9.0, LabelScheme::FLACC4, true) == 3);
  CHECK_THROWS_AS(prediction_level(std::nan(""), LabelScheme::FLACC4), NumericError);

  FrameRecord f;
  f.label = 6.0;
  CHECK(regression_target(f) == 6.0);
  CHECK(regression_target(f, true) == 2.0);
}

TEST_CASE("method names round-trip") {
  for (auto m : {Method::Pspi, Method::Aue, Method::AueWeighted}) CHECK(parse_method(method_name(m)) == m);
  CHECK_FALSE(parse_method("svm").has_value());
}

TEST_CASE("fold splits are subject-disjoint") {
  aue::testing::SyntheticDatasetSpec spec;
  spec.subjects = 12;
  const auto d = aue::testing::synthetic_dataset(spec);
  const auto folds = folds_for(d, {3, 3, 2, 2, 2}, 9);
  const auto splits = fold_splits(d, folds);
  REQUIRE(splits.size() == 5);
  std::vector<std::size_t> all_test;
  for (const auto& s : splits) {
    CHECK(s.train.size() + s.test.size() == d.frames.size());
    for (auto i : s.test) {
      for (auto j : s.train) CHECK(d.frames[i].subject_id != d.frames[j].subject_id);
    }
    all_test.insert(all_test.end(), s.test.begin(), s.test.end());
  }
  std::sort(all_test.begin(), all_test.end());
  CHECK(all_test.size() == d.frames.size());
  CHECK(std::adjacent_find(all_test.begin(), all_test.end()) == all_test.end());

  auto leaky = folds;
  leaky.folds[1].push_back(leaky.folds[0].front());
  CHECK_THROWS_AS(fold_splits(d, leaky), LeakageError);

  auto unknown = folds;
  unknown.folds[0].push_back("ghost");
  CHECK_THROWS_AS(fold_splits(d, unknown), DataError);

  auto missing = folds;
  missing.folds[0].pop_back();
  CHECK_THROWS_AS(fold_splits(d, missing), DataError);
}

TEST_CASE("cross-validation with a label-reading pipeline is perfect") {
  aue::testing::SyntheticDatasetSpec spec;
  spec.subjects = 15;
  const auto d = aue::testing::synthetic_dataset(spec);
  const FoldPipeline oracle_pipeline = [](const Dataset& ds, const FoldSplit& split, std::size_t) {
    std::vector<int> out;
    for (auto i : split.test) out.push_back(bin_label(ds.frames[i].label, ds.frames[i].scheme).index);
    return out;
  };
  const auto result = cross_validate(d, folds_for(d, {3, 3, 3, 3, 3}, 2), oracle_pipeline);
  REQUIRE(result.folds.size() == 5);
  for (const auto& f : result.folds) {
    CHECK(f.report.weighted_accuracy == 1.0);
    CHECK(f.predictions == f.labels);
    CHECK(f.confusion.class_names.size() == 4);
  }
  CHECK(result.mean.weighted_accuracy == 1.0);

  const FoldPipeline short_pipeline = [](const Dataset&, const FoldSplit&, std::size_t) {
    return std::vector<int>{0};
  };
  CHECK_THROWS_AS(cross_validate(d, folds_for(d, {3, 3, 3, 3, 3}, 2), short_pipeline), NumericError);
}

TEST_CASE("cross-validation runs every method end to end") {
  aue::testing::SyntheticDatasetSpec spec;
  spec.subjects = 15;
  spec.frames_per_subject = 8;
  const auto d = aue::testing::synthetic_dataset(spec);
  const auto folds = folds_for(d, {3, 3, 3, 3, 3}, 4);
  for (auto method : {Method::Pspi, Method::Aue, Method::AueWeighted}) {
    PipelineConfig config;
    config.method = method;
    config.k = 3;
    config.train.epochs = 20;
    config.train.seed = 5;
    config.fixed_profile = planted_profile();
    const auto a = cross_validate(d, folds, config);
    const auto b = cross_validate(d, folds, config);
    CHECK(a.folds.size() == 5);
    CHECK(a.mean.weighted_accuracy == b.mean.weighted_accuracy);
    CHECK(a.mean.weighted_accuracy >= 0.0);
  }
}

TEST_CASE("ablation") {
  aue::testing::SyntheticDatasetSpec spec;
  spec.subjects = 30;
  spec.frames_per_subject = 20;
  spec.seed = 61;
  const auto d = aue::testing::synthetic_dataset(spec);
  const auto folds = folds_for(d, {6, 6, 6, 6, 6}, 62);
  PipelineConfig config;
  config.fixed_profile = planted_profile();
  config.train.seed = 63;

  SUBCASE("single k is the best k") {
    const std::vector<int> ks = {7};
    const auto r = ablate_top_k(d, folds, ks, config);
    CHECK(r.best_k == 7);
    CHECK(r.mean_loss.size() == 1);
  }
  SUBCASE("planted three-AU signal") {
    const std::vector<int> ks = {1, 2, 3, 4, 5, 6};
    const auto r = ablate_top_k(d, folds, ks, config);
    CHECK(r.best_k >= 3);
    CHECK(r.best_k <= 4);
    CHECK(r.mean_loss.at(1) > r.mean_loss.at(3));
    const auto text = format_ablation(r);
    CHECK(text.find("best_k " + std::to_string(r.best_k)) != std::string::npos);
  }
  SUBCASE("invalid k") {
    const std::vector<int> ks = {0};
    CHECK_THROWS_AS(ablate_top_k(d, folds, ks, config), UsageError);
  }
}

TEST_CASE("report formats") {
  const auto r = report_of({0, 1, 1, 0}, {0, 1, 0, 0}, 2);
  const std::vector<std::pair<std::string, MetricReport>> rows = {{"aue-weighted", r}, {"pspi", r}};
  const auto table = format_report_table(rows);
  CHECK(table.rfind("Method", 0) == 0);
  CHECK(table.find("WA(%)   UA(%)   Precision(%)   Recall(%)   F1 Score") != std::string::npos);
  CHECK(table.find("75.0") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);

  const auto json = nlohmann::json::parse(format_report_json(rows));
  REQUIRE(json.size() == 2);
  CHECK(json[0]["method"] == "aue-weighted");
  CHECK(json[0]["weighted_accuracy"].get<double>() == r.weighted_accuracy);
  CHECK(json[1]["per_class"].size() == 2);
  CHECK(json[1]["per_class"][0]["support"] == 3);
}
