#pragma once

#include "s5/layer.hpp"

namespace s5 {

// Gradients of a real scalar loss with respect to one layer's parameters.
// Complex parameters are held as (d/dRe + i d/dIm) pairs, so each complex
// buffer lines up component-for-component with its parameter.
struct LayerGrads {
    ComplexVector d_lambda;
    ComplexMatrix d_b_tilde;
    ComplexMatrix d_c_tilde;
    RealVector d_d;
    RealVector d_log_delta;
    RealMatrix d_w_gate;
    RealVector d_norm_scale;
    RealVector d_norm_bias;

    static LayerGrads zeros_like(const S5LayerParams& params);
    void add(const LayerGrads& other);
};

// Forward intermediates the backward pass consumes.
struct LayerCache {
    RealMatrix u;              // layer input
    RealMatrix v;              // SSM input (normalized under prenorm)
    RealMatrix ln_xhat;        // prenorm: normalized rows before affine
    RealVector ln_inv_std;     // prenorm: per-step 1/sqrt(var+eps)
    DiscreteDiagSSM disc;
    StateSequence x_fwd;       // forward-scan states
    StateSequence x_bwd_rev;   // bidirectional: backward-scan states, reversed order
    RealMatrix y;              // SSM preactivations
    RealMatrix gelu_cdf;       // Gaussian CDF of y (g = y ⊙ gelu_cdf)
    RealMatrix sig;            // sigmoid(W GELU(y))
    RealMatrix post_sum;       // postnorm: u + activation, before the norm
    RealMatrix post_xhat;      // postnorm stats
    RealVector post_inv_std;
    bool has_intervals = false;
    RealVector intervals;
};

// Forward pass that records the cache; output identical to layer_forward.
RealMatrix layer_forward_cached(const S5LayerParams& params, const LayerConfig& cfg,
                                const RealMatrix& u, const RealVector* intervals,
                                LayerCache& cache);

// Reverse pass from a recorded cache. Returns the gradient with respect to
// the layer input; parameter gradients accumulate into `grads`.
RealMatrix layer_backward_cached(const S5LayerParams& params, const LayerConfig& cfg,
                                 const LayerCache& cache, const RealMatrix& upstream,
                                 LayerGrads& grads);

// One-shot forward + backward.
std::pair<LayerGrads, RealMatrix> layer_backward(const S5LayerParams& params,
                                                 const LayerConfig& cfg, const RealMatrix& u,
                                                 const RealMatrix& upstream,
                                                 const RealVector* intervals = nullptr);

}  // namespace s5
