#include "aue/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "aue/error.hpp"
#include "text.hpp"

namespace aue {
namespace {

void check_finite(const RegressorModel& model) {
  const auto flat = flatten_parameters(model);
  for (double v : flat) {
    if (!std::isfinite(v)) throw NumericError("regressor parameters became non-finite");
  }
}

}  // namespace

RegressorModel init_model(std::vector<AUId> core_aus, std::vector<double> engagement_weights,
                          double dropout_rate, std::uint64_t seed) {
  if (core_aus.empty()) throw UsageError("regressor needs at least one core AU");
  if (core_aus.size() != engagement_weights.size()) {
    throw UsageError("engagement weights must align with core AUs");
  }
  if (std::set<AUId>(core_aus.begin(), core_aus.end()).size() != core_aus.size()) {
    throw UsageError("core AUs must be distinct");
  }
  for (double w : engagement_weights) {
    if (!(w > 0.0 && w <= 1.0)) {
      throw UsageError("engagement weight " + text::format_exact(w) + " outside (0, 1]");
    }
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout rate must be in [0, 1)");

  RegressorModel m;
  m.core_aus = std::move(core_aus);
  m.engagement_weights = std::move(engagement_weights);
  m.dropout_rate = dropout_rate;
  m.seed = seed;

  Rng rng(seed);
  const std::size_t k = m.input_size();
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(k));
  m.w1.resize(kHiddenSize * k);
  for (double& w : m.w1) w = rng.uniform(-bound1, bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(kHiddenSize));
  for (double& w : m.w2) w = rng.uniform(-bound2, bound2);
  return m;
}

ForwardResult forward(const RegressorModel& model, std::span<const double> au_values, bool train_mode,
                      Rng& rng) {
  const std::size_t k = model.input_size();
  if (au_values.size() != k) {
    throw UsageError("expected " + std::to_string(k) + " AU inputs, got " + std::to_string(au_values.size()));
  }
  ForwardResult r;
  ForwardCache& c = r.cache;
  c.fused.resize(k);
  for (std::size_t i = 0; i < k; ++i) c.fused[i] = au_values[i] * model.engagement_weights[i];

  const bool drop = train_mode && model.dropout_rate > 0.0;
  const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
  double y = model.b2;
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    double z = model.b1[j];
    for (std::size_t i = 0; i < k; ++i) z += model.w1_at(j, i) * c.fused[i];
    c.pre_activation[j] = z;
    c.mask[j] = drop ? (rng.bernoulli(model.dropout_rate) ? 0.0 : keep_scale) : 1.0;
    c.hidden[j] = std::max(z, 0.0) * c.mask[j];
    y += model.w2[j] * c.hidden[j];
  }
  r.prediction = y;
  return r;
}

LossValue smooth_l1(double prediction, double target, double beta) {
  if (!(beta > 0.0)) throw UsageError("smooth-L1 beta must be positive");
  const double d = prediction - target;
  const double a = std::abs(d);
  if (a < beta) return {0.5 * d * d / beta, d / beta};
  return {a - 0.5 * beta, d > 0.0 ? 1.0 : -1.0};
}

Gradients backward(const RegressorModel& model, const ForwardCache& cache, double dloss_dprediction) {
  const std::size_t k = model.input_size();
  if (cache.fused.size() != k) throw UsageError("forward cache does not match the model");
  Gradients g;
  g.w1.assign(kHiddenSize * k, 0.0);
  g.b2 = dloss_dprediction;
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    g.w2[j] = dloss_dprediction * cache.hidden[j];
    const double gate = cache.pre_activation[j] > 0.0 ? cache.mask[j] : 0.0;
    const double dz = dloss_dprediction * model.w2[j] * gate;
    g.b1[j] = dz;
    for (std::size_t i = 0; i < k; ++i) g.w1[j * k + i] = dz * cache.fused[i];
  }
  return g;
}

std::vector<double> flatten_parameters(const RegressorModel& model) {
  std::vector<double> flat(model.w1);
  flat.insert(flat.end(), model.b1.begin(), model.b1.end());
  flat.insert(flat.end(), model.w2.begin(), model.w2.end());
  flat.push_back(model.b2);
  return flat;
}

void assign_parameters(RegressorModel& model, std::span<const double> flat) {
  const std::size_t n1 = model.w1.size();
  if (flat.size() != n1 + 2 * kHiddenSize + 1) throw UsageError("parameter vector has the wrong length");
  std::copy_n(flat.begin(), n1, model.w1.begin());
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(n1), kHiddenSize, model.b1.begin());
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(n1 + kHiddenSize), kHiddenSize, model.w2.begin());
  model.b2 = flat.back();
}

std::vector<double> flatten_gradients(const Gradients& g) {
  std::vector<double> flat(g.w1);
  flat.insert(flat.end(), g.b1.begin(), g.b1.end());
  flat.insert(flat.end(), g.w2.begin(), g.w2.end());
  flat.push_back(g.b2);
  return flat;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size()) throw UsageError("Adam: parameter and gradient shapes differ");
  if (state.first_moment.empty() && state.step == 0) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw UsageError("Adam: state shape differs from parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = config.beta1 * m + (1.0 - config.beta1) * grads[i];
    v = config.beta2 * v + (1.0 - config.beta2) * grads[i] * grads[i];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (batch_size < 1) throw UsageError("batch size must be positive");
  if (epochs < 0) throw UsageError("epochs must be non-negative");
  if (!(smooth_l1_beta > 0.0)) throw UsageError("smooth-L1 beta must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw UsageError("Adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw UsageError("Adam epsilon must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout rate must be in [0, 1)");
}

std::vector<double> fusion_weights(const EngagementProfile& profile, std::span<const AUId> core_aus,
                                   bool use_engagement_weights) {
  std::vector<double> weights;
  weights.reserve(core_aus.size());
  for (AUId au : core_aus) {
    weights.push_back(use_engagement_weights ? std::max(profile.normalized_of(au), kMinEngagementWeight)
                                             : 1.0);
  }
  return weights;
}

std::vector<double> core_inputs(const RegressorModel& model, const AUIntensityVector& au) {
  std::vector<double> x;
  x.reserve(model.input_size());
  for (AUId id : model.core_aus) x.push_back(au[id]);
  return x;
}

double predict(const RegressorModel& model, const AUIntensityVector& au) {
  Rng unused(0);
  return forward(model, core_inputs(model, au), false, unused).prediction;
}

double mean_loss(const RegressorModel& model, std::span<const TrainingSample> samples, double beta) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += smooth_l1(predict(model, s.au), s.target, beta).loss;
  return total / static_cast<double>(samples.size());
}

TrainResult train(std::span<const TrainingSample> train_set, std::span<const TrainingSample> val_set,
                  const EngagementProfile& profile, int k, const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  const auto core = top_k(profile, k);
  TrainResult result;
  result.model = init_model(core, fusion_weights(profile, core, config.use_engagement_weights),
                            config.dropout_rate, mix_seed(config.seed, 0));
  const auto selection = val_set.empty() ? train_set : val_set;
  result.best_validation_loss = mean_loss(result.model, selection, config.smooth_l1_beta);
  if (config.epochs == 0) return result;

  // Core-AU inputs are extracted once; the model's input order never changes.
  std::vector<std::vector<double>> inputs;
  inputs.reserve(train_set.size());
  for (const auto& s : train_set) inputs.push_back(core_inputs(result.model, s.au));

  RegressorModel model = result.model;
  Rng rng(mix_seed(config.seed, 1));
  const AdamConfig adam{config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps};
  AdamState state;
  std::vector<double> params = flatten_parameters(model);
  std::vector<double> batch_grad(params.size());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);

  bool have_best = false;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(start + batch, order.size());
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        const auto fwd = forward(model, inputs[idx], true, rng);
        const auto loss = smooth_l1(fwd.prediction, train_set[idx].target, config.smooth_l1_beta);
        epoch_loss += loss.loss;
        const auto grad = flatten_gradients(backward(model, fwd.cache, loss.gradient));
        for (std::size_t p = 0; p < grad.size(); ++p) batch_grad[p] += grad[p] * inv;
      }
      adam_step(params, batch_grad, state, adam);
      assign_parameters(model, params);
    }
    check_finite(model);
    const double val_loss = mean_loss(model, selection, config.smooth_l1_beta);
    result.history.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    result.history.validation_loss.push_back(val_loss);
    if (!have_best || val_loss < result.best_validation_loss) {
      have_best = true;
      result.best_validation_loss = val_loss;
      result.best_epoch = static_cast<std::size_t>(epoch) + 1;
      result.model = model;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr std::string_view kModelMagic = "aue-regressor";

std::string join_exact(std::span<const double> values) {
  std::string out;
  for (double v : values) out += ' ' + text::format_exact(v);
  return out;
}

}  // namespace

std::string format_model(const RegressorModel& m) {
  const std::size_t k = m.input_size();
  std::string out = std::string(kModelMagic) + " 1\n";
  out += "k " + std::to_string(k) + '\n';
  out += "core_aus";
  for (AUId au : m.core_aus) out += ' ' + std::to_string(au_number(au));
  out += '\n';
  out += "dropout_rate " + text::format_exact(m.dropout_rate) + '\n';
  out += "seed " + std::to_string(m.seed) + '\n';
  out += "engagement_weights" + join_exact(m.engagement_weights) + '\n';
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    out += "W1" + join_exact(std::span<const double>(m.w1).subspan(j * k, k)) + '\n';
  }
  out += "b1" + join_exact(m.b1) + '\n';
  out += "W2" + join_exact(m.w2) + '\n';
  out += "b2 " + text::format_exact(m.b2) + '\n';
  return out;
}

RegressorModel parse_model(std::string_view content, const std::string& source) {
  std::vector<std::pair<std::string, std::vector<std::string_view>>> records;
  const auto rows = text::lines(content);
  for (auto row : rows) {
    row = text::trim(row);
    if (row.empty() || row.front() == '#') continue;
    std::vector<std::string_view> fields;
    for (auto f : text::split(row, ' ')) {
      if (!f.empty()) fields.push_back(f);
    }
    records.emplace_back(std::string(fields.front()), std::vector<std::string_view>(fields.begin() + 1, fields.end()));
  }
  std::size_t next = 0;
  const auto expect = [&](std::string_view key) -> const std::vector<std::string_view>& {
    if (next >= records.size() || records[next].first != key) {
      throw ParseError(source + ": expected '" + std::string(key) + "' record");
    }
    return records[next++].second;
  };
  const auto numbers = [&](const std::vector<std::string_view>& fields, std::size_t count,
                           std::string_view key) {
    if (fields.size() != count) {
      throw ParseError(source + ": '" + std::string(key) + "' needs " + std::to_string(count) + " values");
    }
    std::vector<double> out;
    for (auto f : fields) {
      const auto v = text::parse_double(f);
      if (!v || !std::isfinite(*v)) throw ParseError(source + ": non-finite value in '" + std::string(key) + "'");
      out.push_back(*v);
    }
    return out;
  };

  const auto& magic = expect(kModelMagic);
  if (magic.size() != 1 || magic[0] != "1") throw ParseError(source + ": unsupported model version");
  const auto& k_field = expect("k");
  const auto k = k_field.size() == 1 ? text::parse_int<std::size_t>(k_field[0]) : std::nullopt;
  if (!k || *k < 1 || *k > kAUCount) throw ParseError(source + ": k must be in [1, 12]");

  RegressorModel m;
  const auto& aus = expect("core_aus");
  if (aus.size() != *k) throw ParseError(source + ": core_aus must list k AUs");
  for (auto a : aus) {
    const auto au = parse_au(a);
    if (!au) throw ParseError(source + ": unknown AU '" + std::string(a) + "'");
    m.core_aus.push_back(*au);
  }
  m.dropout_rate = numbers(expect("dropout_rate"), 1, "dropout_rate")[0];
  const auto& seed_field = expect("seed");
  const auto seed = seed_field.size() == 1 ? text::parse_int<std::uint64_t>(seed_field[0]) : std::nullopt;
  if (!seed) throw ParseError(source + ": invalid seed");
  m.seed = *seed;
  m.engagement_weights = numbers(expect("engagement_weights"), *k, "engagement_weights");
  for (std::size_t j = 0; j < kHiddenSize; ++j) {
    const auto row = numbers(expect("W1"), *k, "W1");
    m.w1.insert(m.w1.end(), row.begin(), row.end());
  }
  const auto b1 = numbers(expect("b1"), kHiddenSize, "b1");
  const auto w2 = numbers(expect("W2"), kHiddenSize, "W2");
  std::copy(b1.begin(), b1.end(), m.b1.begin());
  std::copy(w2.begin(), w2.end(), m.w2.begin());
  m.b2 = numbers(expect("b2"), 1, "b2")[0];
  if (next != records.size()) throw ParseError(source + ": unexpected trailing records");

  // Re-check the structural invariants init_model enforces.
  try {
    (void)init_model(m.core_aus, m.engagement_weights, m.dropout_rate, 0);
  } catch (const UsageError& e) {
    throw ParseError(source + ": " + e.what());
  }
  return m;
}

RegressorModel load_model(const std::filesystem::path& path) {
  return parse_model(text::read_file(path), path.string());
}

void write_model(const RegressorModel& model, const std::filesystem::path& path) {
  text::write_file(path, format_model(model));
}

}  // namespace aue
