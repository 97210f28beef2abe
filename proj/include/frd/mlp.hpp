#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "frd/rng.hpp"

namespace frd {

enum class OutputHead { Softmax, Linear };
enum class Activation { Tanh, Relu };

struct MlpConfig {
  int input_dim = 4;
  int hidden_layers = 2;  // l
  int hidden_width = 24;  // n, neurons per hidden layer
  int output_dim = 2;
  OutputHead output_head = OutputHead::Softmax;
  Activation activation = Activation::Tanh;

  bool operator==(const MlpConfig&) const = default;
  void validate() const;  // throws std::invalid_argument
};

// Exact number of trainable scalars (weights + biases) of the MLP.
std::int64_t weight_count(const MlpConfig& cfg);

struct MlpModel {
  MlpConfig config;
  // Layer k maps in_k -> out_k; weights[k] is row-major (out_k x in_k).
  std::vector<std::vector<float>> weights;
  std::vector<std::vector<float>> biases;

  std::int64_t parameter_count() const;
};

// Weights ~ U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases zero.
MlpModel init_mlp(const MlpConfig& cfg, std::uint64_t seed);

// Head output; softmax sums to 1 and is strictly positive for finite logits.
// Throws on input dimension mismatch. Math runs in double.
std::vector<double> forward(const MlpModel& m, std::span<const float> input);

enum class LossKind { CrossEntropyVsDistribution, SquaredError, PolicyGradient };

// Per-sample losses (batch loss is their mean):
//   CrossEntropyVsDistribution: -sum_k t_k log p_k       (Softmax head)
//   SquaredError:                sum_k (y_k - t_k)^2     (Linear head)
//   PolicyGradient:             -w * sum_k t_k log p_k   (Softmax head)
struct TrainBatch {
  LossKind kind = LossKind::CrossEntropyVsDistribution;
  std::vector<std::vector<float>> inputs;
  std::vector<std::vector<float>> targets;
  std::vector<float> weights;  // PolicyGradient only: one weight per sample

  void validate(const MlpConfig& cfg) const;
};

struct MlpGradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

// Mean per-sample loss over the batch.
double batch_loss(const MlpModel& m, const TrainBatch& batch);

// Mean gradient of batch_loss. Throws std::runtime_error if the loss is
// not finite. Optionally reports the loss it computed alongside.
MlpGradient backward(const MlpModel& m, const TrainBatch& batch,
                     double* loss_out = nullptr);

// params -= learning_rate * gradient
void apply_update(MlpModel& m, const MlpGradient& g, double learning_rate);

// Parameter-wise weighted mean. Requires identical configs and
// weights with a positive sum.
MlpModel average_models(const std::vector<MlpModel>& models,
                        std::span<const double> weights);

// Flat little-endian float32 buffer: per layer, weights row-major then
// biases. Length is 4 * weight_count(config).
std::vector<std::uint8_t> serialize_model(const MlpModel& m);
MlpModel deserialize_model(std::span<const std::uint8_t> bytes,
                           const MlpConfig& cfg);

}  // namespace frd
