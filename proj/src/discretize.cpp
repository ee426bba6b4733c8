#include "s5/discretize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace s5 {

namespace {

void check_inputs(const ComplexVector& lambda, const ComplexMatrix& b_tilde, const char* who) {
    if (lambda.size() != b_tilde.rows)
        throw std::invalid_argument(std::string(who) + ": Lambda and B_tilde row counts differ");
    if (!all_finite(std::span<const cplx>(lambda)) || !all_finite(std::span<const cplx>(b_tilde.data)))
        throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

namespace detail {

cplx zoh_input_scale(cplx lambda, double delta) {
    const cplx z = lambda * delta;
    if (std::abs(z) < kZohTaylorThreshold)
        return delta * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0))));
    return (std::exp(z) - 1.0) / lambda;
}

ZohScaleGrads zoh_input_scale_grads(cplx lambda, double delta) {
    const cplx z = lambda * delta;
    if (std::abs(z) < kZohTaylorThreshold) {
        // scale = delta(1 + z/2 + z^2/6 + z^3/24) with z = lambda*delta.
        const cplx d_dz = delta * (0.5 + z * (1.0 / 3.0 + z * (1.0 / 8.0)));
        return {d_dz * delta, 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0)))};
    }
    const cplx lbar = std::exp(z);
    const cplx scale = (lbar - 1.0) / lambda;
    return {(delta * lbar - scale) / lambda, lbar};
}

}  // namespace detail

ComplexMatrix DiscreteDiagSSM::b_bar() const {
    if (time_varying) throw std::invalid_argument("b_bar: system is time-varying, use b_bar_at");
    ComplexMatrix out = b_tilde;
    for (std::size_t p = 0; p < out.rows; ++p)
        for (std::size_t h = 0; h < out.cols; ++h) out.at(p, h) = cmul(input_scale[p], out.at(p, h));
    return out;
}

ComplexMatrix DiscreteDiagSSM::b_bar_at(std::size_t k) const {
    if (!time_varying) return b_bar();
    ComplexMatrix out = b_tilde;
    for (std::size_t p = 0; p < out.rows; ++p)
        for (std::size_t h = 0; h < out.cols; ++h)
            out.at(p, h) = cmul(input_scale_steps.at(k, p), out.at(p, h));
    return out;
}

DiscreteDiagSSM zoh(const ComplexVector& lambda, const ComplexMatrix& b_tilde,
                    const RealVector& delta) {
    check_inputs(lambda, b_tilde, "zoh");
    if (delta.size() != lambda.size())
        throw std::invalid_argument("zoh: Delta length does not match state dimension");
    for (std::size_t p = 0; p < delta.size(); ++p)
        if (!(delta[p] > 0.0))
            throw std::invalid_argument("zoh: Delta must be positive (state " + std::to_string(p) + ")");

    DiscreteDiagSSM out;
    out.b_tilde = b_tilde;
    out.lambda_bar.resize(lambda.size());
    out.input_scale.resize(lambda.size());
    for (std::size_t p = 0; p < lambda.size(); ++p) {
        out.lambda_bar[p] = std::exp(lambda[p] * delta[p]);
        out.input_scale[p] = detail::zoh_input_scale(lambda[p], delta[p]);
    }
    return out;
}

DiscreteDiagSSM bilinear(const ComplexVector& lambda, const ComplexMatrix& b_tilde,
                         const RealVector& delta) {
    check_inputs(lambda, b_tilde, "bilinear");
    if (delta.size() != lambda.size())
        throw std::invalid_argument("bilinear: Delta length does not match state dimension");

    DiscreteDiagSSM out;
    out.b_tilde = b_tilde;
    out.lambda_bar.resize(lambda.size());
    out.input_scale.resize(lambda.size());
    for (std::size_t p = 0; p < lambda.size(); ++p) {
        const cplx denom = 1.0 - 0.5 * delta[p] * lambda[p];
        if (std::abs(denom) < 1e-300)
            throw std::runtime_error("bilinear: singular denominator at state " + std::to_string(p));
        out.lambda_bar[p] = (1.0 + 0.5 * delta[p] * lambda[p]) / denom;
        out.input_scale[p] = delta[p] / denom;
    }
    return out;
}

DiscreteDiagSSM zoh_per_step(const ComplexVector& lambda, const ComplexMatrix& b_tilde,
                             const RealVector& log_delta, const RealVector& intervals) {
    check_inputs(lambda, b_tilde, "zoh_per_step");
    if (log_delta.size() != lambda.size())
        throw std::invalid_argument("zoh_per_step: log_delta length does not match state dimension");
    for (std::size_t k = 0; k < intervals.size(); ++k)
        if (!(intervals[k] >= 0.0))
            throw std::invalid_argument("zoh_per_step: negative interval at step " + std::to_string(k));

    const std::size_t dim = lambda.size();
    const std::size_t len = intervals.size();
    DiscreteDiagSSM out;
    out.time_varying = true;
    out.b_tilde = b_tilde;
    out.lambda_bar_steps = ComplexMatrix(len, dim);
    out.input_scale_steps = ComplexMatrix(len, dim);
    RealVector delta(dim);
    for (std::size_t p = 0; p < dim; ++p) delta[p] = std::exp(log_delta[p]);
    for (std::size_t k = 0; k < len; ++k) {
        for (std::size_t p = 0; p < dim; ++p) {
            const double dk = intervals[k] * delta[p];
            out.lambda_bar_steps.at(k, p) = std::exp(lambda[p] * dk);
            out.input_scale_steps.at(k, p) = detail::zoh_input_scale(lambda[p], dk);
        }
    }
    return out;
}

}  // namespace s5
