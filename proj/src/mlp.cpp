#include "frd/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "frd/wire.hpp"

namespace frd {

namespace {

struct LayerDims {
  int in;
  int out;
};

std::vector<LayerDims> layer_dims(const MlpConfig& cfg) {
  std::vector<LayerDims> dims;
  int in = cfg.input_dim;
  for (int k = 0; k < cfg.hidden_layers; ++k) {
    dims.push_back({in, cfg.hidden_width});
    in = cfg.hidden_width;
  }
  dims.push_back({in, cfg.output_dim});
  return dims;
}

double activate(Activation a, double z) {
  return a == Activation::Tanh ? std::tanh(z) : (z > 0 ? z : 0.0);
}

double activate_grad(Activation a, double z) {
  if (a == Activation::Tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z > 0 ? 1.0 : 0.0;
}

void softmax_inplace(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// Affine pass of one layer into `out` (resized by caller).
void affine(const std::vector<float>& w, const std::vector<float>& b,
            std::span<const double> in, std::vector<double>& out) {
  const std::size_t n_out = b.size();
  const std::size_t n_in = in.size();
  for (std::size_t i = 0; i < n_out; ++i) {
    double acc = b[i];
    const float* row = w.data() + i * n_in;
    for (std::size_t j = 0; j < n_in; ++j) acc += static_cast<double>(row[j]) * in[j];
    out[i] = acc;
  }
}

}  // namespace

void MlpConfig::validate() const {
  if (input_dim < 1 || output_dim < 1)
    throw std::invalid_argument("MlpConfig: dims must be >= 1");
  if (hidden_layers < 0)
    throw std::invalid_argument("MlpConfig: hidden_layers must be >= 0");
  if (hidden_layers > 0 && hidden_width < 1)
    throw std::invalid_argument("MlpConfig: hidden_width must be >= 1");
}

std::int64_t weight_count(const MlpConfig& cfg) {
  cfg.validate();
  std::int64_t count = 0;
  for (const LayerDims& d : layer_dims(cfg))
    count += static_cast<std::int64_t>(d.in) * d.out + d.out;
  return count;
}

std::int64_t MlpModel::parameter_count() const {
  std::int64_t count = 0;
  for (const auto& w : weights) count += static_cast<std::int64_t>(w.size());
  for (const auto& b : biases) count += static_cast<std::int64_t>(b.size());
  return count;
}

MlpModel init_mlp(const MlpConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  MlpModel m;
  m.config = cfg;
  Rng rng(mix_seed(seed));
  for (const LayerDims& d : layer_dims(cfg)) {
    const double a = std::sqrt(6.0 / (d.in + d.out));
    std::vector<float> w(static_cast<std::size_t>(d.in) * d.out);
    for (float& v : w) v = static_cast<float>(uniform(rng, -a, a));
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(d.out, 0.0f);
  }
  return m;
}

std::vector<double> forward(const MlpModel& m, std::span<const float> input) {
  if (static_cast<int>(input.size()) != m.config.input_dim)
    throw std::invalid_argument("forward: input dimension mismatch");

  std::vector<double> act(input.begin(), input.end());
  std::vector<double> z;
  const std::size_t n_layers = m.weights.size();
  for (std::size_t k = 0; k < n_layers; ++k) {
    z.resize(m.biases[k].size());
    affine(m.weights[k], m.biases[k], act, z);
    if (k + 1 < n_layers) {
      act.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i)
        act[i] = activate(m.config.activation, z[i]);
    } else {
      act = z;
    }
  }
  if (m.config.output_head == OutputHead::Softmax) softmax_inplace(act);
  return act;
}

void TrainBatch::validate(const MlpConfig& cfg) const {
  if (inputs.empty()) throw std::invalid_argument("TrainBatch: empty batch");
  if (inputs.size() != targets.size())
    throw std::invalid_argument("TrainBatch: inputs/targets length mismatch");
  if (kind == LossKind::PolicyGradient && weights.size() != inputs.size())
    throw std::invalid_argument("TrainBatch: one weight per sample required");
  const bool needs_softmax = kind != LossKind::SquaredError;
  if (needs_softmax && cfg.output_head != OutputHead::Softmax)
    throw std::invalid_argument("TrainBatch: loss kind requires a Softmax head");
  if (!needs_softmax && cfg.output_head != OutputHead::Linear)
    throw std::invalid_argument("TrainBatch: SquaredError requires a Linear head");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (static_cast<int>(inputs[i].size()) != cfg.input_dim)
      throw std::invalid_argument("TrainBatch: input dimension mismatch");
    if (static_cast<int>(targets[i].size()) != cfg.output_dim)
      throw std::invalid_argument("TrainBatch: target dimension mismatch");
    if (needs_softmax) {
      double sum = 0.0;
      for (float t : targets[i]) sum += t;
      if (std::abs(sum - 1.0) > 1e-5)
        throw std::invalid_argument("TrainBatch: target distribution must sum to 1");
    }
  }
}

namespace {

double sample_loss(LossKind kind, std::span<const double> output,
                   std::span<const float> target, double weight) {
  double loss = 0.0;
  switch (kind) {
    case LossKind::CrossEntropyVsDistribution:
    case LossKind::PolicyGradient:
      for (std::size_t k = 0; k < output.size(); ++k)
        if (target[k] != 0.0f) loss -= target[k] * std::log(output[k]);
      if (kind == LossKind::PolicyGradient) loss *= weight;
      break;
    case LossKind::SquaredError:
      for (std::size_t k = 0; k < output.size(); ++k) {
        const double d = output[k] - target[k];
        loss += d * d;
      }
      break;
  }
  return loss;
}

// dLoss/dz for the output layer (z = pre-head logits / linear outputs).
void output_delta(LossKind kind, std::span<const double> output,
                  std::span<const float> target, double weight,
                  std::vector<double>& delta) {
  delta.resize(output.size());
  switch (kind) {
    case LossKind::CrossEntropyVsDistribution:
      for (std::size_t k = 0; k < output.size(); ++k)
        delta[k] = output[k] - target[k];
      break;
    case LossKind::PolicyGradient:
      for (std::size_t k = 0; k < output.size(); ++k)
        delta[k] = weight * (output[k] - target[k]);
      break;
    case LossKind::SquaredError:
      for (std::size_t k = 0; k < output.size(); ++k)
        delta[k] = 2.0 * (output[k] - target[k]);
      break;
  }
}

}  // namespace

double batch_loss(const MlpModel& m, const TrainBatch& batch) {
  batch.validate(m.config);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    const auto out = forward(m, batch.inputs[i]);
    const double w =
        batch.kind == LossKind::PolicyGradient ? batch.weights[i] : 1.0;
    total += sample_loss(batch.kind, out, batch.targets[i], w);
  }
  return total / static_cast<double>(batch.inputs.size());
}

MlpGradient backward(const MlpModel& m, const TrainBatch& batch,
                     double* loss_out) {
  batch.validate(m.config);
  const std::size_t n_layers = m.weights.size();
  const std::size_t n_samples = batch.inputs.size();

  MlpGradient grad;
  grad.weights.resize(n_layers);
  grad.biases.resize(n_layers);
  for (std::size_t k = 0; k < n_layers; ++k) {
    grad.weights[k].assign(m.weights[k].size(), 0.0);
    grad.biases[k].assign(m.biases[k].size(), 0.0);
  }

  // Scratch reused across samples.
  std::vector<std::vector<double>> layer_in(n_layers);   // activations fed to layer k
  std::vector<std::vector<double>> pre_act(n_layers);    // z of layer k
  std::vector<double> output, delta, delta_prev;
  double total_loss = 0.0;

  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto& input = batch.inputs[i];
    layer_in[0].assign(input.begin(), input.end());
    for (std::size_t k = 0; k < n_layers; ++k) {
      pre_act[k].resize(m.biases[k].size());
      affine(m.weights[k], m.biases[k], layer_in[k], pre_act[k]);
      if (k + 1 < n_layers) {
        layer_in[k + 1].resize(pre_act[k].size());
        for (std::size_t j = 0; j < pre_act[k].size(); ++j)
          layer_in[k + 1][j] = activate(m.config.activation, pre_act[k][j]);
      }
    }
    output = pre_act[n_layers - 1];
    if (m.config.output_head == OutputHead::Softmax) softmax_inplace(output);

    const double w =
        batch.kind == LossKind::PolicyGradient ? batch.weights[i] : 1.0;
    total_loss += sample_loss(batch.kind, output, batch.targets[i], w);
    output_delta(batch.kind, output, batch.targets[i], w, delta);

    for (std::size_t k = n_layers; k-- > 0;) {
      const std::size_t n_out = m.biases[k].size();
      const std::size_t n_in = layer_in[k].size();
      for (std::size_t r = 0; r < n_out; ++r) {
        grad.biases[k][r] += delta[r];
        double* grow = grad.weights[k].data() + r * n_in;
        const double d = delta[r];
        for (std::size_t c = 0; c < n_in; ++c) grow[c] += d * layer_in[k][c];
      }
      if (k == 0) break;
      delta_prev.assign(n_in, 0.0);
      for (std::size_t r = 0; r < n_out; ++r) {
        const float* wrow = m.weights[k].data() + r * n_in;
        const double d = delta[r];
        for (std::size_t c = 0; c < n_in; ++c)
          delta_prev[c] += static_cast<double>(wrow[c]) * d;
      }
      for (std::size_t c = 0; c < n_in; ++c)
        delta_prev[c] *= activate_grad(m.config.activation, pre_act[k - 1][c]);
      std::swap(delta, delta_prev);
    }
  }

  const double mean_loss = total_loss / static_cast<double>(n_samples);
  if (!std::isfinite(mean_loss))
    throw std::runtime_error("backward: non-finite loss (" +
                             std::to_string(mean_loss) + ") over " +
                             std::to_string(n_samples) + " samples");
  if (loss_out) *loss_out = mean_loss;

  const double inv_n = 1.0 / static_cast<double>(n_samples);
  for (std::size_t k = 0; k < n_layers; ++k) {
    for (double& g : grad.weights[k]) g *= inv_n;
    for (double& g : grad.biases[k]) g *= inv_n;
  }
  return grad;
}

void apply_update(MlpModel& m, const MlpGradient& g, double learning_rate) {
  if (g.weights.size() != m.weights.size())
    throw std::invalid_argument("apply_update: gradient shape mismatch");
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    if (g.weights[k].size() != m.weights[k].size() ||
        g.biases[k].size() != m.biases[k].size())
      throw std::invalid_argument("apply_update: gradient shape mismatch");
    for (std::size_t i = 0; i < m.weights[k].size(); ++i)
      m.weights[k][i] = static_cast<float>(
          static_cast<double>(m.weights[k][i]) - learning_rate * g.weights[k][i]);
    for (std::size_t i = 0; i < m.biases[k].size(); ++i)
      m.biases[k][i] = static_cast<float>(
          static_cast<double>(m.biases[k][i]) - learning_rate * g.biases[k][i]);
  }
}

MlpModel average_models(const std::vector<MlpModel>& models,
                        std::span<const double> weights) {
  if (models.empty()) throw std::invalid_argument("average_models: no models");
  if (weights.size() != models.size())
    throw std::invalid_argument("average_models: one weight per model required");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("average_models: negative weight");
    wsum += w;
  }
  if (!(wsum > 0)) throw std::invalid_argument("average_models: weights sum to 0");
  for (const MlpModel& m : models)
    if (!(m.config == models[0].config))
      throw std::invalid_argument(
          "average_models: heterogeneous model structure");

  MlpModel avg = models[0];
  for (std::size_t k = 0; k < avg.weights.size(); ++k) {
    for (std::size_t i = 0; i < avg.weights[k].size(); ++i) {
      double acc = 0.0;
      for (std::size_t mi = 0; mi < models.size(); ++mi)
        acc += weights[mi] * static_cast<double>(models[mi].weights[k][i]);
      avg.weights[k][i] = static_cast<float>(acc / wsum);
    }
    for (std::size_t i = 0; i < avg.biases[k].size(); ++i) {
      double acc = 0.0;
      for (std::size_t mi = 0; mi < models.size(); ++mi)
        acc += weights[mi] * static_cast<double>(models[mi].biases[k][i]);
      avg.biases[k][i] = static_cast<float>(acc / wsum);
    }
  }
  return avg;
}

std::vector<std::uint8_t> serialize_model(const MlpModel& m) {
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(m.parameter_count()) * 4);
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    for (float v : m.weights[k]) wire::put_f32(out, v);
    for (float v : m.biases[k]) wire::put_f32(out, v);
  }
  return out;
}

MlpModel deserialize_model(std::span<const std::uint8_t> bytes,
                           const MlpConfig& cfg) {
  if (static_cast<std::int64_t>(bytes.size()) != 4 * weight_count(cfg))
    throw std::runtime_error("deserialize_model: buffer length mismatch");
  MlpModel m;
  m.config = cfg;
  std::size_t off = 0;
  for (const LayerDims& d : layer_dims(cfg)) {
    std::vector<float> w(static_cast<std::size_t>(d.in) * d.out);
    for (float& v : w) {
      v = wire::get_f32(bytes, off);
      off += 4;
    }
    std::vector<float> b(d.out);
    for (float& v : b) {
      v = wire::get_f32(bytes, off);
      off += 4;
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

}  // namespace frd
