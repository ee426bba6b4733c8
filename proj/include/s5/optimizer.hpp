#pragma once

#include "s5/model.hpp"

namespace s5 {

struct OptimizerConfig {
    double lr = 1e-3;        // global group
    double ssm_lr = 1e-4;    // Lambda, B_tilde, log_delta (no weight decay)
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t epochs = 1;
    std::size_t warmup = 0;  // linear warmup steps before the cosine decay
    std::size_t total_steps = 1;
    GroupFlags groups;
};

// Cosine annealing factor: 1 at step 0, 0 at the final step.
double cosine_factor(std::size_t step, std::size_t total_steps);

// Scheduled multiplier including optional linear warmup.
double schedule_factor(std::size_t step, const OptimizerConfig& cfg);

class AdamWState {
public:
    AdamWState(ModelParams& params, const OptimizerConfig& cfg);

    // One decoupled-weight-decay Adam step under the cosine schedule. The SSM
    // group uses ssm_lr and no weight decay; everything else lr/weight_decay.
    void step(ModelParams& params, ModelGrads& grads, std::size_t step_index);

    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    RealVector m_;
    RealVector v_;
    std::size_t t_ = 0;  // bias-correction counter
};

}  // namespace s5
