#pragma once

#include <cstdint>
#include <vector>

#include "shapemap/tensor.hpp"

namespace shapemap {

struct AdamConfig {
    double learning_rate = 0.0001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Optimizer state over a fixed list of parameter tensors. Weight decay is an
// additive decay*theta term on the gradient before the moment update.
class AdamState {
  public:
    AdamState() = default;
    explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    std::int64_t step_count() const { return step_; }

    // weight_decay: one value per parameter (empty = no decay anywhere).
    void step(std::vector<Tensor>& params, const std::vector<double>& weight_decay = {});

  private:
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

void adam_step(std::vector<Tensor>& params, AdamState& state,
               const std::vector<double>& weight_decay = {});

}  // namespace shapemap
