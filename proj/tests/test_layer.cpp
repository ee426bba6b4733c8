#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "s5/layer.hpp"
#include "s5/rng.hpp"

using namespace s5;

namespace {

S5LayerParams make_layer(std::size_t p, std::size_t h, std::uint64_t seed, bool conj_sym = false,
                         bool bidirectional = false) {
    HippoSpec spec;
    spec.state_size = p;
    spec.feature_size = h;
    spec.conj_sym = conj_sym;
    spec.bidirectional = bidirectional;
    spec.seed = seed;
    S5LayerParams params;
    params.ssm = init_continuous_ssm(spec);
    params.w_gate = RealMatrix(h, h);
    Rng rng(seed + 1);
    for (double& x : params.w_gate.data) x = 0.3 * rng.next_gaussian();
    params.norm_scale.assign(h, 1.0);
    params.norm_bias.assign(h, 0.0);
    return params;
}

RealMatrix random_input(std::size_t len, std::size_t h, std::uint64_t seed) {
    RealMatrix u(len, h);
    Rng rng(seed);
    for (double& x : u.data) x = rng.next_gaussian();
    return u;
}

}  // namespace

TEST_CASE("gated_activation special cases") {
    RealMatrix w(1, 1);
    w.at(0, 0) = 1.0;

    RealMatrix zero(3, 1);
    const RealMatrix out0 = gated_activation(zero, w);
    for (double v : out0.data) CHECK(v == 0.0);

    // W = 0: sigma(0) = 1/2.
    RealMatrix y(1, 1);
    y.at(0, 0) = 0.7;
    const RealMatrix out_half = gated_activation(y, RealMatrix(1, 1));
    CHECK(out_half.at(0, 0) == doctest::Approx(0.5 * detail::gelu(0.7)).epsilon(1e-14));

    // Scalar y = 1, W = [[1]]: GELU(1) * sigmoid(GELU(1)), high-precision value.
    y.at(0, 0) = 1.0;
    const RealMatrix out1 = gated_activation(y, w);
    CHECK(out1.at(0, 0) == doctest::Approx(0.58788826105374885).epsilon(1e-12));
}

TEST_CASE("sequence_layernorm basics") {
    const RealVector ones(2, 1.0), zeros(2, 0.0);

    RealMatrix constant(1, 2);
    constant.at(0, 0) = constant.at(0, 1) = 5.0;
    const RealMatrix n0 = sequence_layernorm(constant, ones, zeros);
    CHECK(std::abs(n0.at(0, 0)) < 1e-9);  // zero variance guarded by eps

    RealMatrix two(1, 2);
    two.at(0, 0) = 1.0;
    two.at(0, 1) = 3.0;
    const RealMatrix n1 = sequence_layernorm(two, ones, zeros);
    CHECK(n1.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(n1.at(0, 1) == doctest::Approx(1.0).epsilon(1e-3));

    const RealMatrix u = random_input(16, 8, 31);
    const RealMatrix n2 = sequence_layernorm(u, RealVector(8, 1.0), RealVector(8, 0.0));
    for (std::size_t k = 0; k < 16; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 8; ++i) mean += n2.at(k, i);
        CHECK(std::abs(mean / 8.0) <= 1e-9);
    }
}

TEST_CASE("layer_forward residual identity with zeroed SSM path") {
    S5LayerParams params = make_layer(4, 3, 5);
    for (cplx& c : params.ssm.c_tilde.data) c = 0.0;
    for (double& d : params.ssm.d) d = 0.0;
    LayerConfig cfg;
    const RealMatrix u = random_input(10, 3, 6);
    const RealMatrix out = layer_forward(params, cfg, u);
    for (std::size_t i = 0; i < u.data.size(); ++i) CHECK(out.data[i] == u.data[i]);
}

TEST_CASE("layer_forward shape and mode handling") {
    const S5LayerParams params = make_layer(4, 3, 7);
    LayerConfig cfg;
    const RealMatrix u = random_input(12, 3, 8);
    const RealMatrix out = layer_forward(params, cfg, u);
    CHECK(out.rows == 12);
    CHECK(out.cols == 3);

    // Intervals are rejected in direct-discrete mode.
    LayerConfig direct = cfg;
    direct.discretization = Discretization::DirectDiscrete;
    const RealVector intervals(12, 1.0);
    CHECK_THROWS_AS((void)layer_forward(params, direct, u, &intervals), std::invalid_argument);

    // Bilinear runs.
    LayerConfig bil = cfg;
    bil.discretization = Discretization::Bilinear;
    const RealMatrix out_bil = layer_forward(params, bil, u);
    CHECK(all_finite(std::span<const double>(out_bil.data)));
}

TEST_CASE("all-ones intervals reduce to the fixed-delta path") {
    const S5LayerParams params = make_layer(6, 2, 9, /*conj_sym=*/true);
    LayerConfig cfg;
    cfg.conj_sym = true;
    const RealMatrix u = random_input(20, 2, 10);
    const RealVector ones(20, 1.0);
    const RealMatrix fixed = layer_forward(params, cfg, u);
    const RealMatrix varying = layer_forward(params, cfg, u, &ones);
    for (std::size_t i = 0; i < fixed.data.size(); ++i)
        CHECK(std::abs(fixed.data[i] - varying.data[i]) <= 1e-12);
}

TEST_CASE("bidirectional single step uses the same state twice") {
    const S5LayerParams params = make_layer(4, 2, 11, false, /*bidirectional=*/true);
    LayerConfig cfg;
    cfg.bidirectional = true;
    const RealMatrix v = random_input(1, 2, 12);
    const RealMatrix y = bidirectional_ssm(params, cfg, v);

    // Oracle: x = B_bar v_0 once, projected through both halves of C.
    const ContinuousDiagSSM& ssm = params.ssm;
    RealVector delta(4);
    for (std::size_t p = 0; p < 4; ++p) delta[p] = std::exp(ssm.log_delta[p]);
    const DiscreteDiagSSM disc = zoh(ssm.lambda, ssm.b_tilde, delta);
    const ComplexMatrix b_bar = disc.b_bar();
    for (std::size_t h = 0; h < 2; ++h) {
        cplx acc{};
        for (std::size_t p = 0; p < 4; ++p) {
            cplx x{};
            for (std::size_t j = 0; j < 2; ++j) x += b_bar.at(p, j) * v.at(0, j);
            acc += ssm.c_tilde.at(h, p) * x + ssm.c_tilde.at(h, 4 + p) * x;
        }
        const double want = acc.real() + ssm.d[h] * v.at(0, h);
        CHECK(y.at(0, h) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("bidirectional matches a naive two-pass oracle") {
    const std::size_t p = 6, h = 3, len = 24;
    const S5LayerParams params = make_layer(p, h, 13, false, true);
    LayerConfig cfg;
    cfg.bidirectional = true;
    const RealMatrix v = random_input(len, h, 14);
    const RealMatrix y = bidirectional_ssm(params, cfg, v);

    // Oracle: two explicit sequential recurrences and a concatenated projection.
    const ContinuousDiagSSM& ssm = params.ssm;
    RealVector delta(p);
    for (std::size_t i = 0; i < p; ++i) delta[i] = std::exp(ssm.log_delta[i]);
    const DiscreteDiagSSM disc = zoh(ssm.lambda, ssm.b_tilde, delta);
    const ComplexMatrix b_bar = disc.b_bar();
    ComplexMatrix xf(len, p), xb(len, p);
    ComplexVector state(p);
    for (std::size_t k = 0; k < len; ++k) {
        for (std::size_t i = 0; i < p; ++i) {
            cplx forced{};
            for (std::size_t j = 0; j < h; ++j) forced += b_bar.at(i, j) * v.at(k, j);
            state[i] = disc.lambda_bar[i] * state[i] + forced;
            xf.at(k, i) = state[i];
        }
    }
    state.assign(p, cplx{});
    for (std::size_t k = len; k-- > 0;) {
        for (std::size_t i = 0; i < p; ++i) {
            cplx forced{};
            for (std::size_t j = 0; j < h; ++j) forced += b_bar.at(i, j) * v.at(k, j);
            state[i] = disc.lambda_bar[i] * state[i] + forced;
            xb.at(k, i) = state[i];
        }
    }
    for (std::size_t k = 0; k < len; ++k)
        for (std::size_t row = 0; row < h; ++row) {
            cplx acc{};
            for (std::size_t i = 0; i < p; ++i)
                acc += ssm.c_tilde.at(row, i) * xf.at(k, i) +
                       ssm.c_tilde.at(row, p + i) * xb.at(k, i);
            const double want = acc.real() + ssm.d[row] * v.at(k, row);
            CHECK(std::abs(y.at(k, row) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
}

TEST_CASE("bidirectional zero input gives zero SSM contribution") {
    const S5LayerParams params = make_layer(4, 2, 15, false, true);
    LayerConfig cfg;
    cfg.bidirectional = true;
    const RealMatrix zero(8, 2);
    const RealMatrix y = bidirectional_ssm(params, cfg, zero);
    for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("bidirectional output is reversal-equivariant with swapped C halves") {
    const std::size_t p = 4, h = 2, len = 16;
    S5LayerParams params = make_layer(p, h, 16, false, true);
    LayerConfig cfg;
    cfg.bidirectional = true;
    const RealMatrix v = random_input(len, h, 17);
    const RealMatrix y = bidirectional_ssm(params, cfg, v);

    S5LayerParams swapped = params;
    for (std::size_t row = 0; row < h; ++row)
        for (std::size_t i = 0; i < p; ++i) {
            swapped.ssm.c_tilde.at(row, i) = params.ssm.c_tilde.at(row, p + i);
            swapped.ssm.c_tilde.at(row, p + i) = params.ssm.c_tilde.at(row, i);
        }
    const RealMatrix v_rev = detail::reverse_rows(v);
    const RealMatrix y_rev = bidirectional_ssm(swapped, cfg, v_rev);
    for (std::size_t k = 0; k < len; ++k)
        for (std::size_t row = 0; row < h; ++row)
            CHECK(std::abs(y.at(k, row) - y_rev.at(len - 1 - k, row)) <= 1e-12);
}

TEST_CASE("bidirectional rejects a narrow C") {
    S5LayerParams params = make_layer(4, 2, 18);  // C is H x P only
    LayerConfig cfg;
    cfg.bidirectional = true;
    const RealMatrix v = random_input(4, 2, 19);
    CHECK_THROWS_AS((void)bidirectional_ssm(params, cfg, v), std::invalid_argument);
}
