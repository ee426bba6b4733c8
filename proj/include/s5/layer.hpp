#pragma once

#include "s5/discretize.hpp"
#include "s5/hippo.hpp"
#include "s5/linalg.hpp"
#include "s5/scan.hpp"

namespace s5 {

enum class Discretization { Zoh, Bilinear, DirectDiscrete };

struct LayerConfig {
    bool bidirectional = false;
    Discretization discretization = Discretization::Zoh;
    bool prenorm = true;
    bool conj_sym = false;
    std::size_t workers = 1;
};

struct S5LayerParams {
    ContinuousDiagSSM ssm;
    RealMatrix w_gate;       // H x H
    RealVector norm_scale;   // H
    RealVector norm_bias;    // H
};

// u' = GELU(y) ⊙ sigmoid(W GELU(y)), GELU in its exact Gaussian-CDF form.
RealMatrix gated_activation(const RealMatrix& y, const RealMatrix& w_gate);

// Per-timestep feature normalization (mean 0, variance 1 over the H features,
// eps = 1e-6) followed by the affine scale and bias.
RealMatrix sequence_layernorm(const RealMatrix& u, const RealVector& scale, const RealVector& bias);

// Full layer: (pre-)norm, discretize, SSM scan, gated activation, residual.
// intervals enables the per-step ZOH path and is rejected in direct-discrete
// mode. Bidirectional layers need C_tilde with 2 * P_stored columns.
RealMatrix layer_forward(const S5LayerParams& params, const LayerConfig& cfg, const RealMatrix& u,
                         const RealVector* intervals = nullptr);

// The bidirectional SSM output path on its own (normalized input in, SSM
// preactivations out): forward-scan states and re-reversed backward-scan
// states concatenated along the state axis before projection.
RealMatrix bidirectional_ssm(const S5LayerParams& params, const LayerConfig& cfg,
                             const RealMatrix& v, const RealVector* intervals = nullptr);

namespace detail {
double gelu(double x);
double gelu_prime(double x);
double gaussian_cdf(double x);
DiscreteDiagSSM discretize_layer(const ContinuousDiagSSM& ssm, Discretization mode,
                                 const RealVector* intervals);
// Reversed-row copy (step L-1 first).
RealMatrix reverse_rows(const RealMatrix& m);
}  // namespace detail

}  // namespace s5
