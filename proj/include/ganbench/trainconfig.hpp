/*
 * Shared training configuration and loss helpers for the trainable
 * detectors.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "ganbench/degrade.hpp"
#include "ganbench/errors.hpp"

namespace ganbench {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  int input_side = 64;  // power of two
  std::optional<AugmentPolicy> augment;

  void validate() const {
    if (epochs <= 0) throw InvalidInput("TrainConfig: epochs must be positive");
    if (batch_size <= 0) throw InvalidInput("TrainConfig: batch size must be positive");
    if (!(learning_rate > 0.0))
      throw InvalidInput("TrainConfig: learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
      throw InvalidInput("TrainConfig: momentum must lie in [0,1)");
    if (input_side < 8 || (input_side & (input_side - 1)) != 0)
      throw InvalidInput("TrainConfig: input side must be a power of two, at least 8");
    if (augment) augment->validate();
  }
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Binary cross-entropy evaluated from the logit, stable for large |z|.
inline double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace ganbench
