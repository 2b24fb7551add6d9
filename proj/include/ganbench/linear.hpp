/*
 * Regularized logistic regression over fixed feature vectors, with
 * train-set standardization baked into the model.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/trainconfig.hpp"

namespace ganbench {

struct LinearModel {
  std::string extractor;        // feature set tag the model was fit on
  std::vector<double> weights;  // one per standardized feature
  double bias = 0.0;
  std::vector<double> mean;   // train-set feature means
  std::vector<double> scale;  // train-set feature stds, floored at 1e-8
};

constexpr double kLinearWeightDecay = 1e-4;

/// Full-batch gradient descent with momentum on mean binary cross-entropy
/// plus kLinearWeightDecay * |w|^2. cfg.epochs counts full-batch steps.
/// Weights start at zero, so the result is seed-independent.
inline LinearModel train_linear(const std::vector<std::vector<double>>& features,
                                const std::vector<int>& labels,
                                const TrainConfig& cfg,
                                const std::string& extractor = "",
                                std::vector<double>* loss_history = nullptr) {
  cfg.validate();
  if (features.size() != labels.size())
    throw InvalidInput("train_linear: feature/label count mismatch");
  const std::size_t n = features.size();
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidInput("train_linear: labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos < 2 || n - pos < 2)
    throw DegenerateData("train_linear: need at least 2 examples per class");
  const std::size_t dim = features[0].size();
  if (dim == 0) throw InvalidInput("train_linear: empty feature vectors");
  for (const auto& f : features)
    if (f.size() != dim)
      throw InvalidInput("train_linear: inconsistent feature lengths");

  LinearModel model;
  model.extractor = extractor;
  model.mean.assign(dim, 0.0);
  model.scale.assign(dim, 0.0);
  for (const auto& f : features)
    for (std::size_t j = 0; j < dim; ++j) model.mean[j] += f[j];
  for (auto& m : model.mean) m /= static_cast<double>(n);
  for (const auto& f : features)
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = f[j] - model.mean[j];
      model.scale[j] += d * d;
    }
  for (auto& s : model.scale) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-8);

  // Standardized copy; all iterations reuse it.
  std::vector<double> x(n * dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      x[i * dim + j] = (features[i][j] - model.mean[j]) / model.scale[j];

  model.weights.assign(dim, 0.0);
  model.bias = 0.0;
  std::vector<double> vel_w(dim, 0.0), grad_w(dim);
  double vel_b = 0.0;
  if (loss_history) loss_history->clear();
  for (int it = 0; it < cfg.epochs; ++it) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0, loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = &x[i * dim];
      double z = model.bias;
      for (std::size_t j = 0; j < dim; ++j) z += model.weights[j] * xi[j];
      const double y = static_cast<double>(labels[i]);
      const double dz = sigmoid(z) - y;
      for (std::size_t j = 0; j < dim; ++j) grad_w[j] += dz * xi[j];
      grad_b += dz;
      loss += bce_with_logits(z, y);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double l2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      grad_w[j] = grad_w[j] * inv_n + 2.0 * kLinearWeightDecay * model.weights[j];
      l2 += model.weights[j] * model.weights[j];
    }
    grad_b *= inv_n;
    if (loss_history) loss_history->push_back(loss * inv_n + kLinearWeightDecay * l2);
    for (std::size_t j = 0; j < dim; ++j) {
      vel_w[j] = cfg.momentum * vel_w[j] + grad_w[j];
      model.weights[j] -= cfg.learning_rate * vel_w[j];
    }
    vel_b = cfg.momentum * vel_b + grad_b;
    model.bias -= cfg.learning_rate * vel_b;
  }
  return model;
}

/// Pre-sigmoid score of one feature vector.
inline double predict_linear(const LinearModel& model, const std::vector<double>& feat) {
  if (feat.size() != model.weights.size())
    throw InvalidInput("predict_linear: feature length " + std::to_string(feat.size()) +
                       " does not match model dimension " +
                       std::to_string(model.weights.size()));
  double z = model.bias;
  for (std::size_t j = 0; j < feat.size(); ++j)
    z += model.weights[j] * (feat[j] - model.mean[j]) / model.scale[j];
  return z;
}

inline double predict_linear(const LinearModel& model, const std::vector<double>& feat,
                             const std::string& extractor) {
  if (model.extractor != extractor)
    throw InvalidInput("predict_linear: model was fit on '" + model.extractor +
                       "' features, asked to score '" + extractor + "'");
  return predict_linear(model, feat);
}

}  // namespace ganbench
