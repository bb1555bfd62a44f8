#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srbfl/bytes.hpp"
#include "srbfl/rng.hpp"

namespace srbfl {

enum class LossKind { LogisticBinary, SquaredError };

// A device's local data. Labels are 0/1 for LogisticBinary and real targets
// for SquaredError. All feature vectors share one dimension.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<double> labels;
  std::string data_type_tag;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
};

// Throws ContractViolation if the dataset invariants do not hold.
void check_dataset(const Dataset& data);

// Model parameters: one weight per feature plus a trailing bias term,
// so dimension l = m + 1. Prediction is w[0..m-1]·x + w[m], passed through
// a sigmoid for the logistic loss.
struct ModelParams {
  std::vector<double> weights;

  std::size_t dim() const { return weights.size(); }
  static ModelParams zeros(std::size_t l) { return ModelParams{std::vector<double>(l, 0.0)}; }
};

bool all_finite(const ModelParams& params);

struct TrainConfig {
  double step_size = 0.1;
  std::size_t epochs = 1;
  LossKind loss = LossKind::LogisticBinary;
};

void check_train_config(const TrainConfig& cfg);

// Sum of per-sample losses over the device's dataset. The sum convention
// makes the global objective exactly the pooled per-sample mean.
double local_loss(const ModelParams& params, const Dataset& data, LossKind loss);

// (1/D) · Σ_k local_loss(params, D_k), D = total sample count.
double global_loss(const ModelParams& params, std::span<const Dataset> datasets,
                   LossKind loss);

// Analytic gradient of local_loss (sum convention).
std::vector<double> local_gradient(const ModelParams& params, const Dataset& data,
                                   LossKind loss);

// Full-batch gradient descent for cfg.epochs steps. Deterministic; throws
// DivergenceError naming the epoch if parameters stop being finite.
ModelParams local_train(const ModelParams& start, const Dataset& data,
                        const TrainConfig& cfg);

// Sample-size-weighted average of updates: Σ (|D_k|/D) · w_k.
ModelParams aggregate(std::span<const std::pair<ModelParams, std::size_t>> updates);

// Fraction of samples whose thresholded prediction equals the label.
// Only defined for the classification loss.
double evaluate_accuracy(const ModelParams& params, const Dataset& data,
                         LossKind loss);

// Canonical payload encoding of parameters (u32 dim + big-endian f64 each);
// this is what lives in the off-chain store and gets content-addressed.
Bytes serialize_params(const ModelParams& params);
ModelParams deserialize_params(const Bytes& payload);

// Two balanced Gaussian clusters centered at ±separation per coordinate,
// labels 0/1. The workhorse synthetic classification task.
Dataset make_two_gaussian(std::size_t count, std::size_t dim, double separation,
                          Rng rng, std::string tag = "gauss2");

// Copy of `data` with a seeded fraction of labels flipped (0 <-> 1).
Dataset flip_labels(const Dataset& data, double fraction, Rng rng);

}  // namespace srbfl
