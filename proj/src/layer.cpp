#include "s5/layer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace s5 {

namespace detail {

double gaussian_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu(double x) { return x * gaussian_cdf(x); }

double gelu_prime(double x) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return gaussian_cdf(x) + x * pdf;
}

DiscreteDiagSSM discretize_layer(const ContinuousDiagSSM& ssm, Discretization mode,
                                 const RealVector* intervals) {
    if (mode == Discretization::DirectDiscrete) {
        if (intervals)
            throw std::invalid_argument("layer_forward: direct-discrete mode takes no intervals");
        // Stored (Lambda, B_tilde) are already the discrete parameters.
        DiscreteDiagSSM disc;
        disc.lambda_bar = ssm.lambda;
        disc.b_tilde = ssm.b_tilde;
        disc.input_scale.assign(ssm.lambda.size(), cplx(1.0, 0.0));
        return disc;
    }
    if (intervals) {
        if (mode != Discretization::Zoh)
            throw std::invalid_argument("layer_forward: per-step intervals require ZOH");
        return zoh_per_step(ssm.lambda, ssm.b_tilde, ssm.log_delta, *intervals);
    }
    RealVector delta(ssm.log_delta.size());
    for (std::size_t p = 0; p < delta.size(); ++p) delta[p] = std::exp(ssm.log_delta[p]);
    return mode == Discretization::Zoh ? zoh(ssm.lambda, ssm.b_tilde, delta)
                                       : bilinear(ssm.lambda, ssm.b_tilde, delta);
}

RealMatrix reverse_rows(const RealMatrix& m) {
    RealMatrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        std::copy(m.row(m.rows - 1 - i).begin(), m.row(m.rows - 1 - i).end(), out.row(i).begin());
    return out;
}

}  // namespace detail

RealMatrix gated_activation(const RealMatrix& y, const RealMatrix& w_gate) {
    const std::size_t feats = y.cols;
    if (w_gate.rows != feats || w_gate.cols != feats)
        throw std::invalid_argument("gated_activation: W must be H x H");
    RealMatrix g(y.rows, feats);
    for (std::size_t i = 0; i < y.data.size(); ++i) g.data[i] = detail::gelu(y.data[i]);
    RealMatrix out(y.rows, feats);
    for (std::size_t k = 0; k < y.rows; ++k) {
        const double* grow = g.row(k).data();
        double* orow = out.row(k).data();
        for (std::size_t i = 0; i < feats; ++i) {
            const double* wrow = w_gate.row(i).data();
            double z = 0.0;
            for (std::size_t j = 0; j < feats; ++j) z += wrow[j] * grow[j];
            orow[i] = grow[i] / (1.0 + std::exp(-z));
        }
    }
    return out;
}

RealMatrix sequence_layernorm(const RealMatrix& u, const RealVector& scale, const RealVector& bias) {
    const std::size_t feats = u.cols;
    if (feats == 0) throw std::invalid_argument("sequence_layernorm: H must be >= 1");
    if (scale.size() != feats || bias.size() != feats)
        throw std::invalid_argument("sequence_layernorm: scale/bias length mismatch");
    constexpr double eps = 1e-6;
    RealMatrix out(u.rows, feats);
    for (std::size_t k = 0; k < u.rows; ++k) {
        const double* urow = u.row(k).data();
        double* orow = out.row(k).data();
        double mean = 0.0;
        for (std::size_t i = 0; i < feats; ++i) mean += urow[i];
        mean /= static_cast<double>(feats);
        double var = 0.0;
        for (std::size_t i = 0; i < feats; ++i) var += (urow[i] - mean) * (urow[i] - mean);
        var /= static_cast<double>(feats);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < feats; ++i)
            orow[i] = scale[i] * (urow[i] - mean) * inv_std + bias[i];
    }
    return out;
}

RealMatrix bidirectional_ssm(const S5LayerParams& params, const LayerConfig& cfg,
                             const RealMatrix& v, const RealVector* intervals) {
    const ContinuousDiagSSM& ssm = params.ssm;
    const std::size_t dim = ssm.state_dim();
    const std::size_t feats = ssm.feature_dim();
    const std::size_t len = v.rows;
    if (ssm.c_tilde.cols != 2 * dim)
        throw std::invalid_argument("bidirectional_ssm: C_tilde must have 2 * P_stored columns");
    if (v.cols != feats) throw std::invalid_argument("bidirectional_ssm: feature width mismatch");

    const DiscreteDiagSSM disc = detail::discretize_layer(ssm, cfg.discretization, intervals);
    if (disc.time_varying && disc.steps() != len)
        throw std::invalid_argument("bidirectional_ssm: interval count does not match L");

    ElementSequence fwd(len, dim);
    detail::fill_forcing(disc, v, fwd);
    const StateSequence xf = parallel_scan(fwd, cfg.workers);

    // Backward direction: the reversed sequence is scanned with the per-step
    // parameters taken in reversed order, then re-reversed.
    ElementSequence bwd(len, dim);
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t src = len - 1 - k;
        std::copy(fwd.bu(src).begin(), fwd.bu(src).end(), bwd.bu(k).begin());
        std::copy(fwd.a(src).begin(), fwd.a(src).end(), bwd.a(k).begin());
    }
    const StateSequence xb_rev = parallel_scan(bwd, cfg.workers);

    const double scale = ssm.conj_sym ? 2.0 : 1.0;
    const PlanarMatrix c = PlanarMatrix::from(ssm.c_tilde);
    RealVector xr(2 * dim), xi(2 * dim);
    RealMatrix y(len, feats);
    for (std::size_t k = 0; k < len; ++k) {
        const cplx* xfk = xf.row(k).data();
        const cplx* xbk = xb_rev.row(len - 1 - k).data();
        for (std::size_t p = 0; p < dim; ++p) {
            xr[p] = xfk[p].real();
            xi[p] = xfk[p].imag();
            xr[dim + p] = xbk[p].real();
            xi[dim + p] = xbk[p].imag();
        }
        const double* vrow = v.row(k).data();
        double* yrow = y.row(k).data();
        for (std::size_t h = 0; h < feats; ++h) {
            const double* cr = c.re.row(h).data();
            const double* ci = c.im.row(h).data();
            double acc = 0.0;
            for (std::size_t p = 0; p < 2 * dim; ++p) acc += cr[p] * xr[p] - ci[p] * xi[p];
            yrow[h] = scale * acc + ssm.d[h] * vrow[h];
        }
    }
    return y;
}

RealMatrix layer_forward(const S5LayerParams& params, const LayerConfig& cfg, const RealMatrix& u,
                         const RealVector* intervals) {
    const ContinuousDiagSSM& ssm = params.ssm;
    const std::size_t feats = ssm.feature_dim();
    if (u.cols != feats) throw std::invalid_argument("layer_forward: input width mismatch");
    if (cfg.conj_sym != ssm.conj_sym)
        throw std::invalid_argument("layer_forward: config and parameter conj_sym flags disagree");
    if (intervals && intervals->size() != u.rows)
        throw std::invalid_argument("layer_forward: interval count does not match L");

    const RealMatrix v =
        cfg.prenorm ? sequence_layernorm(u, params.norm_scale, params.norm_bias) : u;

    RealMatrix y;
    if (cfg.bidirectional) {
        y = bidirectional_ssm(params, cfg, v, intervals);
    } else {
        const DiscreteDiagSSM disc = detail::discretize_layer(ssm, cfg.discretization, intervals);
        y = apply_ssm(disc, ssm.c_tilde, ssm.d, v, ssm.conj_sym, cfg.workers);
    }

    RealMatrix act = gated_activation(y, params.w_gate);
    for (std::size_t i = 0; i < act.data.size(); ++i) act.data[i] += u.data[i];
    if (!cfg.prenorm) return sequence_layernorm(act, params.norm_scale, params.norm_bias);
    return act;
}

}  // namespace s5
