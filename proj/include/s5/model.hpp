#pragma once

#include <functional>
#include <string>

#include "s5/grad.hpp"
#include "s5/layer.hpp"

namespace s5 {

// Linear encoder -> stacked S5 layers -> temporal mean pool -> linear decoder.
struct ModelParams {
    RealMatrix encoder_w;   // H x U
    RealVector encoder_b;   // H
    std::vector<S5LayerParams> layers;
    RealMatrix decoder_w;   // classes x H
    RealVector decoder_b;   // classes

    std::size_t feature_dim() const { return encoder_w.rows; }
    std::size_t input_dim() const { return encoder_w.cols; }
    std::size_t num_classes() const { return decoder_w.rows; }
};

struct ModelGrads {
    RealMatrix d_encoder_w;
    RealVector d_encoder_b;
    std::vector<LayerGrads> layers;
    RealMatrix d_decoder_w;
    RealVector d_decoder_b;

    static ModelGrads zeros_like(const ModelParams& params);
    void add(const ModelGrads& other);
};

struct ModelConfig {
    LayerConfig layer;
    std::uint64_t seed = 0;
};

// Fresh model: HiPPO-initialized SSMs, zero gate, unit norm scale, Gaussian
// encoder/decoder scaled by 1/sqrt(fan_in).
ModelParams init_model(std::size_t input_dim, std::size_t feature_dim, std::size_t state_size,
                       std::size_t depth, std::size_t classes, const HippoSpec& ssm_spec,
                       std::uint64_t seed, bool bidirectional);

// Logits for one item (L x U in, classes out).
RealVector model_forward(const ModelParams& model, const ModelConfig& cfg, const RealMatrix& item,
                         const RealVector* intervals = nullptr);

// Forward + reverse for one item given the loss gradient at the logits.
// Parameter gradients accumulate into grads.
RealVector model_forward_backward(const ModelParams& model, const ModelConfig& cfg,
                                  const RealMatrix& item, const RealVector* intervals,
                                  const std::function<RealVector(const RealVector&)>& logit_grad,
                                  ModelGrads& grads);

struct CrossEntropyResult {
    double loss = 0.0;
    RealVector d_logits;
};

// Numerically stable softmax cross-entropy; gradient = softmax - onehot.
CrossEntropyResult cross_entropy(const RealVector& logits, std::size_t label);

// Parameter groups for the optimizer split.
enum class ParamGroup { Ssm, Global };

struct ParamRef {
    std::string name;
    ParamGroup group;
    double* values;       // complex buffers exposed as interleaved (re, im)
    const double* grads;  // same layout; null when traversing params only
    std::size_t size;
    bool is_complex;
};

struct GroupFlags {
    bool c_tilde_in_ssm_group = false;   // Speech-style exception
    bool b_tilde_in_global_group = false;  // ListOps-style exception
};

// Fixed-order traversal of every parameter buffer (with matching grads when
// given); the order defines the checkpoint layout and optimizer state layout.
void for_each_param(ModelParams& params, ModelGrads* grads, const GroupFlags& flags,
                    const std::function<void(const ParamRef&)>& fn);

}  // namespace s5
