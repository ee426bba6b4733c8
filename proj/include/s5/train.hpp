#pragma once

#include "s5/data.hpp"
#include "s5/model.hpp"
#include "s5/optimizer.hpp"

namespace s5 {

struct EpochMetrics {
    double mean_loss = 0.0;
    double accuracy = 0.0;
    std::size_t steps = 0;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t workers = 1;
    std::uint64_t shuffle_seed = 0;
};

// One pass over a shuffled dataset. Batch items run on independent workers;
// per-item gradients are reduced in item order, so the result is bitwise
// identical for any worker count.
EpochMetrics train_epoch(ModelParams& model, const ModelConfig& model_cfg, AdamWState& opt,
                         const SequenceBatch& data, const TrainConfig& cfg, std::size_t epoch_index,
                         std::size_t* global_step);

struct EvalMetrics {
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

EvalMetrics evaluate(const ModelParams& model, const ModelConfig& model_cfg,
                     const SequenceBatch& data, std::size_t workers);

}  // namespace s5
