#pragma once

// Engagement-weighted pain-intensity regressor: core-AU intensities are
// multiplied element-wise by their engagement weights, passed through a
// 3-unit rectified hidden layer with inverted dropout, and reduced to one
// output. Trained with smooth-L1 loss and Adam on mini-batches.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aue/engagement.hpp"
#include "aue/random.hpp"
#include "aue/types.hpp"

namespace aue {

inline constexpr std::size_t kHiddenSize = 3;

// Engagement weights below this are raised to it when a profile is turned
// into fusion weights (zero engagement would otherwise be rejected).
inline constexpr double kMinEngagementWeight = 1e-3;

struct RegressorModel {
  std::vector<AUId> core_aus;
  std::vector<double> engagement_weights;  // aligned with core_aus, each in (0, 1]
  std::vector<double> w1;                  // kHiddenSize x k, row-major
  std::array<double, kHiddenSize> b1{};
  std::array<double, kHiddenSize> w2{};
  double b2 = 0.0;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;

  std::size_t input_size() const { return core_aus.size(); }
  double w1_at(std::size_t unit, std::size_t input) const { return w1[unit * input_size() + input]; }
  double& w1_at(std::size_t unit, std::size_t input) { return w1[unit * input_size() + input]; }

  friend bool operator==(const RegressorModel&, const RegressorModel&) = default;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
RegressorModel init_model(std::vector<AUId> core_aus, std::vector<double> engagement_weights,
                          double dropout_rate, std::uint64_t seed);

struct ForwardCache {
  std::vector<double> fused;                        // inputs times engagement weights
  std::array<double, kHiddenSize> pre_activation{};  // W1 x + b1
  std::array<double, kHiddenSize> mask{};            // 0 or 1/(1-p); 1 in eval mode
  std::array<double, kHiddenSize> hidden{};          // relu(pre) * mask
};

struct ForwardResult {
  double prediction = 0.0;
  ForwardCache cache;
};

// au_values are the core-AU intensities in model order. rng is only drawn
// from in train mode with a non-zero dropout rate.
ForwardResult forward(const RegressorModel& model, std::span<const double> au_values, bool train_mode,
                      Rng& rng);

struct LossValue {
  double loss = 0.0;
  double gradient = 0.0;  // d loss / d prediction
};

LossValue smooth_l1(double prediction, double target, double beta = 1.0);

struct Gradients {
  std::vector<double> w1;
  std::array<double, kHiddenSize> b1{};
  std::array<double, kHiddenSize> w2{};
  double b2 = 0.0;
};

Gradients backward(const RegressorModel& model, const ForwardCache& cache, double dloss_dprediction);

// Flat parameter order: w1 (row-major), b1, w2, b2.
std::vector<double> flatten_parameters(const RegressorModel& model);
void assign_parameters(RegressorModel& model, std::span<const double> flat);
std::vector<double> flatten_gradients(const Gradients& gradients);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

// Bias-corrected Adam update in place. The state is sized on first use.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 8;
  int epochs = 100;
  double smooth_l1_beta = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double dropout_rate = 0.02;
  // When false every fusion weight is 1 (plain core-AU regression).
  bool use_engagement_weights = true;
  std::uint64_t seed = 0;

  // Throws UsageError for out-of-range settings.
  void validate() const;
};

struct TrainingSample {
  AUIntensityVector au;
  double target = 0.0;
};

struct TrainHistory {
  std::vector<double> train_loss;       // mean train-mode loss per epoch
  std::vector<double> validation_loss;  // mean eval-mode loss per epoch
};

struct TrainResult {
  RegressorModel model;  // parameters from the epoch with the lowest validation loss
  TrainHistory history;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_validation_loss = 0.0;
};

// Fusion weights for the top-k AUs of a profile: their max-normalized
// engagement, floored at kMinEngagementWeight (or all ones when disabled).
std::vector<double> fusion_weights(const EngagementProfile& profile, std::span<const AUId> core_aus,
                                   bool use_engagement_weights);

// Uses the training set for model selection when the validation set is empty.
TrainResult train(std::span<const TrainingSample> train_set, std::span<const TrainingSample> val_set,
                  const EngagementProfile& profile, int k, const TrainConfig& config);

// Eval-mode mean smooth-L1 loss.
double mean_loss(const RegressorModel& model, std::span<const TrainingSample> samples, double beta);

std::vector<double> core_inputs(const RegressorModel& model, const AUIntensityVector& au);
double predict(const RegressorModel& model, const AUIntensityVector& au);

std::string format_model(const RegressorModel& model);
RegressorModel parse_model(std::string_view content, const std::string& source = "model");
RegressorModel load_model(const std::filesystem::path& path);
void write_model(const RegressorModel& model, const std::filesystem::path& path);

}  // namespace aue
