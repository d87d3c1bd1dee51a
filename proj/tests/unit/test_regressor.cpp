#include <doctest.h>

#include <cmath>

#include "aue/error.hpp"
#include "aue/regressor.hpp"
#include "synthetic.hpp"

using namespace aue;

namespace {

EngagementProfile profile_from(std::initializer_list<std::pair<AUId, double>> values) {
  std::array<double, kAUCount> raw{};
  for (auto [au, v] : values) raw[au_index(au)] = v;
  return EngagementProfile::from_raw(raw, 1);
}

RegressorModel random_model(Rng& rng, int k, double dropout) {
  std::vector<AUId> aus(kAllAUs.begin(), kAllAUs.begin() + k);
  std::vector<double> w;
  for (int i = 0; i < k; ++i) w.push_back(rng.uniform(0.1, 1.0));
  auto m = init_model(aus, w, dropout, rng.next());
  auto p = flatten_parameters(m);
  for (auto& x : p) x = rng.uniform(-1.0, 1.0);
  assign_parameters(m, p);
  return m;
}

}  // namespace

TEST_CASE("init_model") {
  const auto m = init_model({AUId::AU27, AUId::AU25}, {1.0, 0.5}, 0.1, 99);
  CHECK(m.w1.size() == 6);
  const double bound = 1.0 / std::sqrt(2.0);
  for (double w : m.w1) CHECK(std::abs(w) <= bound);
  for (double w : m.w2) CHECK(std::abs(w) <= 1.0 / std::sqrt(3.0));
  for (double b : m.b1) CHECK(b == 0.0);
  CHECK(m.b2 == 0.0);
  CHECK(m == init_model({AUId::AU27, AUId::AU25}, {1.0, 0.5}, 0.1, 99));
  CHECK_FALSE(m == init_model({AUId::AU27, AUId::AU25}, {1.0, 0.5}, 0.1, 100));

  CHECK_THROWS_AS(init_model({}, {}, 0.1, 1), UsageError);
  CHECK_THROWS_AS(init_model({AUId::AU27}, {0.0}, 0.1, 1), UsageError);
  CHECK_THROWS_AS(init_model({AUId::AU27}, {1.5}, 0.1, 1), UsageError);
  CHECK_THROWS_AS(init_model({AUId::AU27, AUId::AU27}, {1, 1}, 0.1, 1), UsageError);
  CHECK_THROWS_AS(init_model({AUId::AU27}, {1.0}, 1.0, 1), UsageError);
}

TEST_CASE("forward pass by hand") {
  auto m = init_model({AUId::AU27, AUId::AU25}, {1.0, 0.5}, 0.0, 1);
  m.w1 = {1.0, 2.0, -1.0, 0.5, 0.25, -3.0};
  m.b1 = {0.5, -0.25, 1.0};
  m.w2 = {2.0, -1.0, 4.0};
  m.b2 = 0.75;
  Rng rng(0);
  const std::vector<double> x = {2.0, 4.0};
  // fused = (2, 2); pre = (2 + 4 + 0.5, -2 + 1 - 0.25, 0.5 - 6 + 1) = (6.5, -1.25, -4.5)
  const auto out = forward(m, x, false, rng);
  CHECK(out.cache.pre_activation[0] == 6.5);
  CHECK(out.cache.pre_activation[1] == -1.25);
  CHECK(out.cache.pre_activation[2] == -4.5);
  CHECK(out.prediction == 2.0 * 6.5 + 0.75);

  AUIntensityVector v;
  v[AUId::AU27] = 2.0;
  v[AUId::AU25] = 4.0;
  CHECK(predict(m, v) == out.prediction);
  CHECK(core_inputs(m, v) == x);
}

TEST_CASE("zero input and zero bias predicts zero") {
  Rng rng(1);
  const auto m = init_model({AUId::AU1, AUId::AU2, AUId::AU4}, {1, 1, 1}, 0.1, 5);
  CHECK(predict(m, AUIntensityVector{}) == 0.0);
  const std::vector<double> zeros(3, 0.0);
  CHECK(forward(m, zeros, true, rng).prediction == 0.0);
}

TEST_CASE("without dropout train and eval modes agree") {
  Rng rng(2);
  const auto m = random_model(rng, 5, 0.0);
  const std::vector<double> x = {1, 2, 3, 4, 5};
  CHECK(forward(m, x, true, rng).prediction == forward(m, x, false, rng).prediction);
}

TEST_CASE("dropout keeps the expected hidden activation") {
  Rng rng(3);
  auto m = random_model(rng, 4, 0.3);
  m.b1 = {1.0, 1.5, 2.0};
  const std::vector<double> x = {1, 2, 3, 4};
  const auto eval = forward(m, x, false, rng).cache.hidden;
  std::array<double, kHiddenSize> mean{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto h = forward(m, x, true, rng).cache.hidden;
    for (std::size_t j = 0; j < kHiddenSize; ++j) mean[j] += h[j] / draws;
  }
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    if (eval[j] > 0.0) CHECK(std::abs(mean[j] - eval[j]) <= 0.02 * eval[j]);
  }
}

TEST_CASE("scaling fusion weights against W1 columns leaves predictions unchanged") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_model(rng, 6, 0.0);
    auto scaled = m;
    const double c = rng.uniform(0.2, 0.9);
    for (std::size_t i = 0; i < 6; ++i) {
      scaled.engagement_weights[i] *= c;
      for (std::size_t u = 0; u < kHiddenSize; ++u) scaled.w1_at(u, i) /= c;
    }
    const auto v = aue::testing::random_au(rng);
    CHECK(predict(scaled, v) == doctest::Approx(predict(m, v)).epsilon(1e-12));
  }
}

TEST_CASE("smooth L1") {
  CHECK(smooth_l1(3.0, 3.0).loss == 0.0);
  CHECK(smooth_l1(3.0, 3.0).gradient == 0.0);
  CHECK(smooth_l1(1.5, 1.0).loss == 0.125);
  CHECK(smooth_l1(1.5, 1.0).gradient == 0.5);
  CHECK(smooth_l1(3.0, 1.0).loss == 1.5);
  CHECK(smooth_l1(3.0, 1.0).gradient == 1.0);
  CHECK(smooth_l1(-1.0, 1.0).gradient == -1.0);
  const double b = 0.7;
  CHECK(smooth_l1(b - 1e-12, 0.0, b).gradient == doctest::Approx(smooth_l1(b + 1e-12, 0.0, b).gradient));
  CHECK_THROWS_AS(smooth_l1(1.0, 0.0, 0.0), UsageError);
}

TEST_CASE("backward") {
  Rng rng(5);
  auto m = random_model(rng, 3, 0.0);
  const std::vector<double> x = {1.0, 2.0, 0.5};
  const auto fwd = forward(m, x, false, rng);
  for (double g : flatten_gradients(backward(m, fwd.cache, 0.0))) CHECK(g == 0.0);

  m.b1[1] = -100.0;
  const auto gated = forward(m, x, false, rng);
  const auto grads = backward(m, gated.cache, 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(grads.w1[1 * 3 + i] == 0.0);
  CHECK(grads.b1[1] == 0.0);

  ForwardCache wrong = gated.cache;
  wrong.fused.push_back(1.0);
  CHECK_THROWS_AS(backward(m, wrong, 1.0), UsageError);
}

TEST_CASE("backward matches finite differences") {
  Rng rng(6);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(12));
    const auto m = random_model(rng, k, 0.0);
    std::vector<double> x;
    for (int i = 0; i < k; ++i) x.push_back(rng.uniform(0, 5));
    const double target = rng.uniform(0, 10);
    const auto fwd = forward(m, x, false, rng);
    bool kink = std::abs(std::abs(fwd.prediction - target) - 1.0) < 1e-3;
    for (double a : fwd.cache.pre_activation) kink = kink || std::abs(a) < 1e-3;
    if (kink) continue;
    const auto analytic = flatten_gradients(backward(m, fwd.cache, smooth_l1(fwd.prediction, target).gradient));
    const auto params = flatten_parameters(m);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto loss = [&](double delta) {
        auto p = params;
        p[i] += delta;
        auto mm = m;
        assign_parameters(mm, p);
        return smooth_l1(forward(mm, x, false, rng).prediction, target).loss;
      };
      const double numeric = (loss(h) - loss(-h)) / (2 * h);
      const double denom = std::max(std::abs(numeric) + std::abs(analytic[i]), 1e-8);
      CHECK(std::abs(numeric - analytic[i]) / denom < 1e-4);
    }
  }
}

TEST_CASE("Adam") {
  AdamConfig cfg;
  SUBCASE("zero gradient is a fixed point") {
    std::vector<double> p = {1.0, -2.0};
    const std::vector<double> g = {0.0, 0.0};
    AdamState s;
    adam_step(p, g, s, cfg);
    CHECK(p == std::vector<double>{1.0, -2.0});
  }
  SUBCASE("first step moves by the learning rate") {
    std::vector<double> p = {0.0};
    const std::vector<double> g = {1.0};
    AdamState s;
    adam_step(p, g, s, cfg);
    CHECK(p[0] == doctest::Approx(-cfg.learning_rate).epsilon(1e-6));
    CHECK(s.step == 1);
  }
  SUBCASE("two steps against a hand-tracked state") {
    std::vector<double> p = {0.5};
    const std::vector<double> g = {2.0};
    AdamState s;
    double m = 0, v = 0, x = 0.5;
    for (int t = 1; t <= 2; ++t) {
      m = 0.9 * m + 0.1 * 2.0;
      v = 0.999 * v + 0.001 * 4.0;
      const double mh = m / (1 - std::pow(0.9, t));
      const double vh = v / (1 - std::pow(0.999, t));
      x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      adam_step(p, g, s, cfg);
      CHECK(s.first_moment[0] == doctest::Approx(m).epsilon(1e-15));
      CHECK(s.second_moment[0] == doctest::Approx(v).epsilon(1e-15));
      CHECK(p[0] == doctest::Approx(x).epsilon(1e-15));
    }
  }
  SUBCASE("shape mismatch") {
    std::vector<double> p = {0.0, 1.0};
    const std::vector<double> g = {1.0};
    AdamState s;
    CHECK_THROWS_AS(adam_step(p, g, s, cfg), UsageError);
  }
}

TEST_CASE("fusion weights") {
  const auto profile = profile_from({{AUId::AU27, 0.8}, {AUId::AU25, 0.4}, {AUId::AU10, 0.0}});
  const std::vector<AUId> core = {AUId::AU27, AUId::AU25, AUId::AU10};
  CHECK(fusion_weights(profile, core, true) == std::vector<double>{1.0, 0.5, kMinEngagementWeight});
  CHECK(fusion_weights(profile, core, false) == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("training recovers a linear AU27 target") {
  Rng rng(7);
  std::vector<TrainingSample> train_set, val_set;
  for (int i = 0; i < 600; ++i) {
    TrainingSample s;
    s.au = aue::testing::random_au(rng);
    s.target = 2.0 * s.au[AUId::AU27];
    (i < 480 ? train_set : val_set).push_back(s);
  }
  const auto profile = profile_from({{AUId::AU27, 1.0}, {AUId::AU4, 0.3}});
  TrainConfig cfg;
  cfg.seed = 11;
  const auto result = train(train_set, val_set, profile, 1, cfg);
  CHECK(result.model.core_aus == std::vector<AUId>{AUId::AU27});
  CHECK(result.history.train_loss.size() == 100);
  double mae = 0.0;
  for (const auto& s : val_set) mae += std::abs(predict(result.model, s.au) - s.target) / val_set.size();
  CHECK(mae < 0.2);
  CHECK(result.best_validation_loss == doctest::Approx(mean_loss(result.model, val_set, 1.0)));
  CHECK(result.best_validation_loss == result.history.validation_loss[result.best_epoch - 1]);
}

TEST_CASE("training edge cases") {
  Rng rng(8);
  std::vector<TrainingSample> data;
  for (int i = 0; i < 40; ++i) data.push_back({aue::testing::random_au(rng), rng.uniform(0, 10)});
  const auto profile = profile_from({{AUId::AU27, 1.0}, {AUId::AU25, 0.9}});
  TrainConfig cfg;
  cfg.seed = 3;

  cfg.epochs = 0;
  const auto none = train(data, data, profile, 2, cfg);
  CHECK(none.history.train_loss.empty());
  CHECK(none.model == init_model(none.model.core_aus, none.model.engagement_weights, cfg.dropout_rate,
                                 none.model.seed));

  cfg.epochs = 15;
  const auto a = train(data, {}, profile, 2, cfg);
  const auto b = train(data, {}, profile, 2, cfg);
  CHECK(a.history.train_loss == b.history.train_loss);
  CHECK(a.history.validation_loss == b.history.validation_loss);
  CHECK(a.model == b.model);

  CHECK_THROWS_AS(train({}, data, profile, 2, cfg), DataError);
  CHECK_THROWS_AS(train(data, data, profile, 13, cfg), UsageError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(data, data, profile, 2, cfg), UsageError);
}

TEST_CASE("model file round-trips bit-exactly") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_model(rng, 1 + static_cast<int>(rng.below(12)), 0.1);
    const auto text = format_model(m);
    const auto back = parse_model(text);
    CHECK(back == m);
    CHECK(format_model(back) == text);
  }
  CHECK_THROWS_AS(parse_model("aue-regressor 2\n"), ParseError);
  auto text = format_model(random_model(rng, 2, 0.1));
  text.replace(text.find("engagement_weights"), 18, "engagement_weightz");
  CHECK_THROWS_AS(parse_model(text), ParseError);
}
