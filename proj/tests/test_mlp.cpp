#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "frd/mlp.hpp"
#include "oracles.hpp"

using namespace frd;

namespace {

MlpConfig small_softmax() {
  MlpConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_layers = 1;
  cfg.hidden_width = 8;
  cfg.output_dim = 2;
  return cfg;
}

MlpModel zero_model(const MlpConfig& cfg) {
  MlpModel m = init_mlp(cfg, 0);
  for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0f);
  return m;
}

std::vector<float> random_input(Rng& rng, int dim, double lo = -5.0, double hi = 5.0) {
  std::vector<float> v(dim);
  for (float& x : v) x = (float)uniform(rng, lo, hi);
  return v;
}

std::vector<float> random_distribution(Rng& rng, int dim) {
  std::vector<float> v(dim);
  double sum = 0.0;
  for (float& x : v) {
    x = (float)uniform(rng, 0.05, 1.0);
    sum += x;
  }
  for (float& x : v) x = (float)(x / sum);
  // Nudge so the floats sum to 1 within the batch tolerance.
  float total = 0.0f;
  for (float x : v) total += x;
  v[0] += 1.0f - total;
  return v;
}

double max_rel_error(const std::vector<double>& analytic,
                     const std::vector<double>& numeric) {
  REQUIRE(analytic.size() == numeric.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("init is deterministic and zero-biased") {
  const MlpConfig cfg = small_softmax();
  const MlpModel a = init_mlp(cfg, 9);
  const MlpModel b = init_mlp(cfg, 9);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
  for (const auto& layer : a.biases)
    for (float v : layer) CHECK(v == 0.0f);
  const MlpModel c = init_mlp(cfg, 10);
  CHECK(a.weights != c.weights);
}

TEST_CASE("weight counts match the closed form") {
  MlpConfig cfg;
  cfg.input_dim = 4;
  cfg.output_dim = 2;

  cfg.hidden_layers = 2;
  cfg.hidden_width = 50;
  CHECK(weight_count(cfg) == 2902);

  cfg.hidden_width = 24;
  CHECK(weight_count(cfg) == 770);  // 4*24+24 + 24*24+24 + 24*2+2

  cfg.hidden_layers = 1;
  CHECK(weight_count(cfg) == 170);

  cfg.hidden_layers = 0;
  CHECK(weight_count(cfg) == 10);

  CHECK(init_mlp(small_softmax(), 1).parameter_count() ==
        weight_count(small_softmax()));
}

TEST_CASE("zero weights: softmax gives the uniform pair, linear gives zero") {
  const MlpModel zs = zero_model(small_softmax());
  const std::vector<float> input{0.3f, -1.0f, 2.0f, 0.7f};
  const auto p = forward(zs, input);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

  MlpConfig lin = small_softmax();
  lin.output_dim = 1;
  lin.output_head = OutputHead::Linear;
  CHECK(forward(zero_model(lin), input)[0] == 0.0);
}

TEST_CASE("forward rejects dimension mismatches") {
  const MlpModel m = init_mlp(small_softmax(), 3);
  const std::vector<float> bad{1.0f, 2.0f};
  CHECK_THROWS_AS(forward(m, bad), std::invalid_argument);
}

TEST_CASE("softmax outputs are a strict distribution on random inputs") {
  const MlpModel m = init_mlp(small_softmax(), 17);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto out = forward(m, random_input(rng, 4));
    double sum = 0.0;
    for (double v : out) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(21);
  for (int rep = 0; rep < 8; ++rep) {
    MlpConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden_layers = rep % 3;
    cfg.hidden_width = 8;
    cfg.activation = rep % 2 == 0 ? Activation::Tanh : Activation::Relu;

    for (LossKind kind : {LossKind::CrossEntropyVsDistribution,
                          LossKind::SquaredError, LossKind::PolicyGradient}) {
      cfg.output_dim = kind == LossKind::SquaredError ? 1 : 2;
      cfg.output_head = kind == LossKind::SquaredError ? OutputHead::Linear
                                                       : OutputHead::Softmax;

      // Re-roll batches whose ReLU pre-activations sit near the kink, where
      // finite differences are meaningless.
      MlpModel m = init_mlp(cfg, 100 + rep);
      TrainBatch batch;
      for (int attempt = 0; attempt < 50; ++attempt) {
        batch = TrainBatch{};
        batch.kind = kind;
        for (int s = 0; s < 5; ++s) {
          batch.inputs.push_back(random_input(rng, cfg.input_dim, -2.0, 2.0));
          batch.targets.push_back(kind == LossKind::SquaredError
                                      ? random_input(rng, cfg.output_dim)
                                      : random_distribution(rng, cfg.output_dim));
          batch.weights.push_back((float)uniform(rng, -2.0, 2.0));
        }
        if (kind != LossKind::PolicyGradient) batch.weights.clear();
        if (cfg.activation == Activation::Tanh ||
            oracle::min_abs_preactivation(cfg, oracle::flatten_params(m), batch) >
                5e-3)
          break;
      }

      double loss = 0.0;
      const MlpGradient grad = backward(m, batch, &loss);
      CHECK(loss == doctest::Approx(batch_loss(m, batch)).epsilon(1e-12));
      CHECK(max_rel_error(oracle::flatten_grad(grad),
                          oracle::fd_gradient(cfg, m, batch)) < 1e-3);
    }
  }
}

TEST_CASE("policy gradient with zero advantages is zero") {
  const MlpModel m = init_mlp(small_softmax(), 5);
  TrainBatch batch;
  batch.kind = LossKind::PolicyGradient;
  batch.inputs = {{1.0f, 0.0f, -1.0f, 0.5f}, {0.2f, 0.1f, 0.0f, -0.3f}};
  batch.targets = {{1.0f, 0.0f}, {0.0f, 1.0f}};
  batch.weights = {0.0f, 0.0f};
  const MlpGradient grad = backward(m, batch);
  for (const auto& layer : grad.weights)
    for (double g : layer) CHECK(g == 0.0);
  for (const auto& layer : grad.biases)
    for (double g : layer) CHECK(g == 0.0);
}

TEST_CASE("squared error at the current outputs is a stationary point") {
  MlpConfig cfg = small_softmax();
  cfg.output_dim = 1;
  cfg.output_head = OutputHead::Linear;
  const MlpModel m = init_mlp(cfg, 6);
  TrainBatch batch;
  batch.kind = LossKind::SquaredError;
  batch.inputs = {{0.4f, -0.2f, 1.0f, 0.0f}};
  batch.targets = {{(float)forward(m, batch.inputs[0])[0]}};
  const MlpGradient grad = backward(m, batch);
  for (const auto& layer : grad.weights)
    for (double g : layer) CHECK(std::abs(g) < 1e-6);
}

TEST_CASE("apply_update: zero rate is a no-op, reverse restores parameters") {
  const MlpModel m = init_mlp(small_softmax(), 7);
  TrainBatch batch;
  batch.kind = LossKind::CrossEntropyVsDistribution;
  batch.inputs = {{1.0f, -0.5f, 0.25f, 2.0f}};
  batch.targets = {{0.9f, 0.1f}};
  const MlpGradient grad = backward(m, batch);

  MlpModel same = m;
  apply_update(same, grad, 0.0);
  CHECK(same.weights == m.weights);
  CHECK(same.biases == m.biases);

  MlpModel roundtrip = m;
  apply_update(roundtrip, grad, 0.05);
  apply_update(roundtrip, grad, -0.05);
  for (std::size_t k = 0; k < m.weights.size(); ++k)
    for (std::size_t i = 0; i < m.weights[k].size(); ++i)
      CHECK(std::abs(roundtrip.weights[k][i] - m.weights[k][i]) <= 1e-7);
}

TEST_CASE("one gradient step reduces a convex single-layer loss") {
  MlpConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_layers = 0;
  cfg.output_dim = 1;
  cfg.output_head = OutputHead::Linear;
  MlpModel m = init_mlp(cfg, 8);
  TrainBatch batch;
  batch.kind = LossKind::SquaredError;
  batch.inputs = {{1.0f, 2.0f}, {-1.0f, 0.5f}, {0.0f, 1.0f}};
  batch.targets = {{1.0f}, {-2.0f}, {0.5f}};
  const double before = batch_loss(m, batch);
  apply_update(m, backward(m, batch), 0.05);
  CHECK(batch_loss(m, batch) < before);
}

TEST_CASE("backward reports non-finite losses instead of continuing") {
  const MlpModel m = init_mlp(small_softmax(), 11);
  TrainBatch batch;
  batch.kind = LossKind::PolicyGradient;
  batch.inputs = {{1.0f, 1.0f, 1.0f, 1.0f}};
  batch.targets = {{1.0f, 0.0f}};
  batch.weights = {std::numeric_limits<float>::quiet_NaN()};
  CHECK_THROWS_AS(backward(m, batch), std::runtime_error);
}

TEST_CASE("average_models: identity, idempotence, plain mean, mismatch") {
  const MlpConfig cfg = small_softmax();
  const MlpModel a = init_mlp(cfg, 1);
  const MlpModel b = init_mlp(cfg, 2);

  const std::vector<double> one{1.0};
  const MlpModel only = average_models({a}, one);
  CHECK(only.weights == a.weights);

  const std::vector<double> three{1.0, 1.0, 1.0};
  const MlpModel copies = average_models({a, a, a}, three);
  CHECK(copies.weights == a.weights);
  CHECK(copies.biases == a.biases);

  const std::vector<double> pair{1.0, 1.0};
  const MlpModel mean = average_models({a, b}, pair);
  const MlpModel swapped = average_models({b, a}, pair);
  for (std::size_t k = 0; k < mean.weights.size(); ++k)
    for (std::size_t i = 0; i < mean.weights[k].size(); ++i) {
      const double naive =
          0.5 * ((double)a.weights[k][i] + (double)b.weights[k][i]);
      CHECK(mean.weights[k][i] == doctest::Approx(naive).epsilon(1e-7));
      CHECK(mean.weights[k][i] == swapped.weights[k][i]);
    }

  MlpConfig other = cfg;
  other.hidden_width = 9;
  CHECK_THROWS_AS(average_models({a, init_mlp(other, 3)}, pair),
                  std::invalid_argument);
  CHECK_THROWS_AS(average_models({a, b}, std::vector<double>{0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("model serialization round-trips and has 4 bytes per parameter") {
  const MlpConfig cfg = small_softmax();
  const MlpModel m = init_mlp(cfg, 33);
  const auto bytes = serialize_model(m);
  CHECK((std::int64_t)bytes.size() == 4 * weight_count(cfg));
  const MlpModel back = deserialize_model(bytes, cfg);
  CHECK(back.weights == m.weights);
  CHECK(back.biases == m.biases);

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(deserialize_model(truncated, cfg), std::runtime_error);
}

TEST_CASE("batch validation rejects malformed batches") {
  const MlpModel m = init_mlp(small_softmax(), 4);
  TrainBatch batch;
  batch.kind = LossKind::CrossEntropyVsDistribution;
  CHECK_THROWS_AS(backward(m, batch), std::invalid_argument);  // empty

  batch.inputs = {{1.0f, 2.0f, 3.0f, 4.0f}};
  batch.targets = {{0.7f, 0.7f}};  // not a distribution
  CHECK_THROWS_AS(backward(m, batch), std::invalid_argument);

  batch.targets = {{0.7f, 0.3f}};
  batch.kind = LossKind::SquaredError;  // wrong head for this loss
  CHECK_THROWS_AS(backward(m, batch), std::invalid_argument);
}
