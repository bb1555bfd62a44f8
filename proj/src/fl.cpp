#include "srbfl/fl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srbfl/errors.hpp"

namespace srbfl {

namespace {

double margin(const ModelParams& params, const std::vector<double>& x) {
  const std::size_t m = x.size();
  double z = params.weights[m];  // bias
  for (std::size_t j = 0; j < m; ++j) z += params.weights[j] * x[j];
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ln(1 + e^z) - y·z, evaluated without overflow on either side.
double logistic_sample_loss(double z, double y) {
  if (z > 0.0) return (1.0 - y) * z + std::log1p(std::exp(-z));
  return -y * z + std::log1p(std::exp(z));
}

void check_dims(const ModelParams& params, const Dataset& data) {
  check_dataset(data);
  if (params.dim() != data.dim() + 1)
    throw ContractViolation("parameter dimension " + std::to_string(params.dim()) +
                            " does not match dataset dimension " +
                            std::to_string(data.dim()) + " + 1");
}

}  // namespace

void check_dataset(const Dataset& data) {
  if (data.features.empty())
    throw ContractViolation("dataset must contain at least one sample");
  if (data.features.size() != data.labels.size())
    throw ContractViolation("dataset has " + std::to_string(data.features.size()) +
                            " feature rows but " + std::to_string(data.labels.size()) +
                            " labels");
  const std::size_t m = data.features.front().size();
  for (const auto& row : data.features)
    if (row.size() != m)
      throw ContractViolation("feature vectors must share one dimension");
}

bool all_finite(const ModelParams& params) {
  return std::all_of(params.weights.begin(), params.weights.end(),
                     [](double w) { return std::isfinite(w); });
}

void check_train_config(const TrainConfig& cfg) {
  if (!(cfg.step_size > 0.0))
    throw ContractViolation("step_size must be > 0");
  if (cfg.epochs < 1)
    throw ContractViolation("epochs must be >= 1");
}

double local_loss(const ModelParams& params, const Dataset& data, LossKind loss) {
  check_dims(params, data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = margin(params, data.features[i]);
    const double y = data.labels[i];
    if (loss == LossKind::LogisticBinary) {
      total += logistic_sample_loss(z, y);
    } else {
      const double r = z - y;
      total += r * r;
    }
  }
  return total;
}

double global_loss(const ModelParams& params, std::span<const Dataset> datasets,
                   LossKind loss) {
  if (datasets.empty())
    throw ContractViolation("global_loss requires at least one dataset");
  double sum = 0.0;
  std::size_t total_samples = 0;
  for (const Dataset& d : datasets) {
    sum += local_loss(params, d, loss);
    total_samples += d.size();
  }
  return sum / static_cast<double>(total_samples);
}

std::vector<double> local_gradient(const ModelParams& params, const Dataset& data,
                                   LossKind loss) {
  check_dims(params, data);
  const std::size_t m = data.dim();
  std::vector<double> grad(m + 1, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = margin(params, data.features[i]);
    const double y = data.labels[i];
    const double coeff = loss == LossKind::LogisticBinary
                             ? sigmoid(z) - y
                             : 2.0 * (z - y);
    for (std::size_t j = 0; j < m; ++j) grad[j] += coeff * data.features[i][j];
    grad[m] += coeff;
  }
  return grad;
}

ModelParams local_train(const ModelParams& start, const Dataset& data,
                        const TrainConfig& cfg) {
  check_train_config(cfg);
  check_dims(start, data);
  ModelParams params = start;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto grad = local_gradient(params, data, cfg.loss);
    for (std::size_t j = 0; j < params.weights.size(); ++j)
      params.weights[j] -= cfg.step_size * grad[j];
    if (!all_finite(params))
      throw DivergenceError(epoch, "training diverged at epoch " +
                                       std::to_string(epoch));
  }
  return params;
}

ModelParams aggregate(std::span<const std::pair<ModelParams, std::size_t>> updates) {
  if (updates.empty())
    throw ContractViolation("aggregate requires at least one update");
  const std::size_t l = updates.front().first.dim();
  std::size_t total = 0;
  for (const auto& [params, count] : updates) {
    if (params.dim() != l)
      throw ContractViolation("aggregate: parameter dimensions differ");
    if (count < 1)
      throw ContractViolation("aggregate: sample_count must be >= 1");
    total += count;
  }
  ModelParams out = ModelParams::zeros(l);
  for (const auto& [params, count] : updates) {
    const double w = static_cast<double>(count) / static_cast<double>(total);
    for (std::size_t j = 0; j < l; ++j) out.weights[j] += w * params.weights[j];
  }
  return out;
}

double evaluate_accuracy(const ModelParams& params, const Dataset& data,
                         LossKind loss) {
  if (loss != LossKind::LogisticBinary)
    throw UnsupportedMetric("accuracy is only defined for the classification loss");
  check_dims(params, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double predicted = margin(params, data.features[i]) >= 0.0 ? 1.0 : 0.0;
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Bytes serialize_params(const ModelParams& params) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(params.dim()));
  for (double v : params.weights) w.f64(v);
  return w.take();
}

ModelParams deserialize_params(const Bytes& payload) {
  if (payload.size() < 4)
    throw ContractViolation("parameter payload too short");
  std::uint32_t l = 0;
  for (int i = 0; i < 4; ++i) l = (l << 8) | payload[i];
  if (payload.size() != 4 + 8ull * l)
    throw ContractViolation("parameter payload length does not match dimension");
  ModelParams params;
  params.weights.reserve(l);
  for (std::uint32_t j = 0; j < l; ++j) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits = (bits << 8) | payload[4 + 8 * j + i];
    params.weights.push_back(std::bit_cast<double>(bits));
  }
  return params;
}

Dataset make_two_gaussian(std::size_t count, std::size_t dim, double separation,
                          Rng rng, std::string tag) {
  Dataset data;
  data.data_type_tag = std::move(tag);
  data.features.reserve(count);
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double label = (i % 2 == 0) ? 0.0 : 1.0;
    const double center = label == 1.0 ? separation : -separation;
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = center + rng.next_normal();
    data.features.push_back(std::move(x));
    data.labels.push_back(label);
  }
  return data;
}

Dataset flip_labels(const Dataset& data, double fraction, Rng rng) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ContractViolation("flip fraction must lie in (0, 1]");
  Dataset out = data;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const auto flips = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(data.size())));
  for (std::size_t i = 0; i < flips && i < order.size(); ++i)
    out.labels[order[i]] = 1.0 - out.labels[order[i]];
  return out;
}

}  // namespace srbfl
