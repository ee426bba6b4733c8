#pragma once

#include "s5/linalg.hpp"

namespace s5 {

// Discrete-time diagonal SSM. B_bar factors through the continuous input
// matrix as B_bar = diag(input_scale) * B_tilde, which is what both the scan
// and the backward pass consume; b_bar_at() materializes the matrix form.
// Time-varying systems hold one (lambda_bar, input_scale) row per step.
struct DiscreteDiagSSM {
    bool time_varying = false;
    ComplexVector lambda_bar;     // P (time-invariant)
    ComplexVector input_scale;    // P (time-invariant)
    ComplexMatrix lambda_bar_steps;   // L x P (time-varying)
    ComplexMatrix input_scale_steps;  // L x P (time-varying)
    ComplexMatrix b_tilde;        // P x H, the matrix the scale factors apply to

    std::size_t state_dim() const { return b_tilde.rows; }
    std::size_t feature_dim() const { return b_tilde.cols; }
    std::size_t steps() const { return time_varying ? lambda_bar_steps.rows : 0; }

    ComplexMatrix b_bar() const;                  // time-invariant
    ComplexMatrix b_bar_at(std::size_t k) const;  // time-varying
};

// Zero-order hold: lambda_bar = exp(lambda * delta),
// B_bar row p = (exp(lambda_p delta_p) - 1)/lambda_p * B_tilde row p.
// Near lambda*delta = 0 the factor switches to its Taylor series.
DiscreteDiagSSM zoh(const ComplexVector& lambda, const ComplexMatrix& b_tilde,
                    const RealVector& delta);

// Bilinear (Tustin): lambda_bar = (1 + delta*lambda/2) / (1 - delta*lambda/2),
// B_bar row p = delta_p / (1 - delta_p lambda_p / 2) * B_tilde row p.
DiscreteDiagSSM bilinear(const ComplexVector& lambda, const ComplexMatrix& b_tilde,
                         const RealVector& delta);

// Per-step ZOH for irregular sampling: the step-k timescale of state p is
// intervals[k] * exp(log_delta[p]).
DiscreteDiagSSM zoh_per_step(const ComplexVector& lambda, const ComplexMatrix& b_tilde,
                             const RealVector& log_delta, const RealVector& intervals);

namespace detail {
// (e^{lambda*delta} - 1) / lambda with the guarded Taylor branch, plus the
// analytic derivatives the backward pass needs.
cplx zoh_input_scale(cplx lambda, double delta);
struct ZohScaleGrads {
    cplx d_lambda;  // d scale / d lambda (holomorphic derivative)
    cplx d_delta;   // d scale / d delta
};
ZohScaleGrads zoh_input_scale_grads(cplx lambda, double delta);

constexpr double kZohTaylorThreshold = 1e-8;
}  // namespace detail

}  // namespace s5
