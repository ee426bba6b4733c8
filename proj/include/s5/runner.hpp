#pragma once

#include <string>

#include "s5/checkpoint.hpp"
#include "s5/config.hpp"
#include "s5/train.hpp"

namespace s5 {

// Datasets, model and optimizer assembled from a RunConfig.
struct RunSetup {
    ModelParams model;
    ModelConfig model_cfg;
    OptimizerConfig opt_cfg;
    SequenceBatch train_data;
    SequenceBatch test_data;
};

RunSetup build_run(const RunConfig& cfg);

struct RunResult {
    double final_train_loss = 0.0;
    double final_train_accuracy = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
    std::string metrics_csv;  // epoch,step,loss,accuracy,lr
    Checkpoint checkpoint;
};

// Full training run: epochs of train_epoch, a final evaluation, metrics CSV
// and the final parameters as a checkpoint.
RunResult run_training(const RunConfig& cfg);

Checkpoint model_to_checkpoint(const ModelParams& model);
void model_from_checkpoint(ModelParams& model, const Checkpoint& ckpt);

}  // namespace s5
