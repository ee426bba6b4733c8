#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "s5/discretize.hpp"
#include "s5/equivalence.hpp"
#include "s5/rng.hpp"

using namespace s5;

namespace {

ComplexMatrix single_column(std::initializer_list<cplx> values) {
    ComplexMatrix m(values.size(), 1);
    std::size_t i = 0;
    for (const cplx& v : values) m.at(i++, 0) = v;
    return m;
}

}  // namespace

TEST_CASE("zoh scalar closed form") {
    const DiscreteDiagSSM d = zoh({cplx(-1.0, 0.0)}, single_column({cplx(2.0, 0.0)}), {0.1});
    CHECK(d.lambda_bar[0].real() == doctest::Approx(0.9048374).epsilon(1e-6));
    CHECK(d.lambda_bar[0].imag() == 0.0);
    const ComplexMatrix b_bar = d.b_bar();
    CHECK(b_bar.at(0, 0).real() == doctest::Approx(0.1903252).epsilon(1e-6));
}

TEST_CASE("zoh complex exponential") {
    const cplx lambda(-0.5, 3.0);
    const DiscreteDiagSSM d = zoh({lambda}, single_column({cplx(1.0, 0.0)}), {0.01});
    const cplx expected = std::exp(lambda * 0.01);
    CHECK(std::abs(d.lambda_bar[0] - expected) < 1e-15);
    CHECK(d.lambda_bar[0].real() == doctest::Approx(0.9945647).epsilon(1e-6));
    CHECK(d.lambda_bar[0].imag() == doctest::Approx(0.0298459).epsilon(1e-5));
}

TEST_CASE("zoh input factor approaches delta as lambda -> 0") {
    const double delta = 0.37;
    const DiscreteDiagSSM d = zoh({cplx(1e-12, 0.0)}, single_column({cplx(1.0, 0.0)}), {delta});
    CHECK(std::abs(d.input_scale[0] - delta) < 1e-12);
}

TEST_CASE("zoh rejects bad inputs") {
    CHECK_THROWS_AS((void)zoh({cplx(-1.0, 0.0)}, single_column({cplx(1.0, 0.0)}), {0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)zoh({cplx(-1.0, 0.0)}, single_column({cplx(1.0, 0.0)}), {-0.5}),
                    std::invalid_argument);
    const double nan = std::nan("");
    CHECK_THROWS_AS((void)zoh({cplx(nan, 0.0)}, single_column({cplx(1.0, 0.0)}), {0.1}),
                    std::invalid_argument);
}

TEST_CASE("bilinear fixed point and rational value") {
    const DiscreteDiagSSM zero = bilinear({cplx(0.0, 0.0)}, single_column({cplx(1.0, 0.0)}), {0.3});
    CHECK(zero.lambda_bar[0] == cplx(1.0, 0.0));

    const DiscreteDiagSSM d = bilinear({cplx(-1.0, 0.0)}, single_column({cplx(1.0, 0.0)}), {0.1});
    CHECK(d.lambda_bar[0].real() == doctest::Approx(0.95 / 1.05).epsilon(1e-12));
}

TEST_CASE("bilinear agrees with zoh to third order at small delta") {
    const ComplexVector lambda{cplx(-1.0, 0.0)};
    const ComplexMatrix b = single_column({cplx(1.0, 0.0)});
    const DiscreteDiagSSM dz = zoh(lambda, b, {0.001});
    const DiscreteDiagSSM db = bilinear(lambda, b, {0.001});
    CHECK(std::abs(db.lambda_bar[0] - dz.lambda_bar[0]) <= 1e-9);
}

TEST_CASE("stability is preserved for random stable systems") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const cplx lambda(-std::exp(rng.next_uniform(-6.0, 2.0)), rng.next_uniform(-30.0, 30.0));
        const double delta = std::exp(rng.next_uniform(-7.0, 0.0));
        const DiscreteDiagSSM d = zoh({lambda}, single_column({cplx(1.0, 0.0)}), {delta});
        CHECK(std::abs(d.lambda_bar[0]) < 1.0);
    }
}

TEST_CASE("zoh matches a high-accuracy ODE integration over one step") {
    // One ZOH step of the complex scalar system embedded as a real 2x2 system,
    // driven by a constant input.
    Rng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        const cplx lambda(rng.next_uniform(-2.0, -0.1), rng.next_uniform(-3.0, 3.0));
        const cplx b_tilde(rng.next_gaussian(), rng.next_gaussian());
        const double delta = rng.next_uniform(0.05, 0.5);
        const double u = rng.next_gaussian();
        const cplx x0(rng.next_gaussian(), rng.next_gaussian());

        RealMatrix a(2, 2);
        a.at(0, 0) = lambda.real();
        a.at(0, 1) = -lambda.imag();
        a.at(1, 0) = lambda.imag();
        a.at(1, 1) = lambda.real();
        RealMatrix b(2, 1);
        b.at(0, 0) = b_tilde.real();
        b.at(1, 0) = b_tilde.imag();
        const RealMatrix traj = rk4_integrate(
            a, b, [&](double) { return RealVector{u}; }, {x0.real(), x0.imag()}, delta / 4096.0,
            4096);

        const DiscreteDiagSSM d = zoh({lambda}, single_column({b_tilde}), {delta});
        const cplx x1 = cmul(d.lambda_bar[0], x0) + cmul(d.input_scale[0], b_tilde) * u;
        CHECK(std::abs(x1.real() - traj.at(4096, 0)) < 1e-9);
        CHECK(std::abs(x1.imag() - traj.at(4096, 1)) < 1e-9);
    }
}

TEST_CASE("input factor is continuous through lambda = 0") {
    // Inside the guarded region the implementation must evaluate the Taylor
    // polynomial; compare against an independent evaluation of it.
    const double delta = 0.7;
    for (double sign : {1.0, -1.0}) {
        const cplx lambda(sign * 1e-9, 0.0);
        const cplx z = lambda * delta;
        const cplx taylor = delta * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0);
        CHECK(std::abs(detail::zoh_input_scale(lambda, delta) - taylor) <= 1e-12);
    }
}

TEST_CASE("zoh_per_step reductions") {
    const ComplexVector lambda{cplx(-1.0, 0.5)};
    const ComplexMatrix b = single_column({cplx(1.0, -0.3)});
    const RealVector log_delta{-2.0};

    // All intervals 1 reduces to the constant-delta path.
    const RealVector ones(4, 1.0);
    const DiscreteDiagSSM varying = zoh_per_step(lambda, b, log_delta, ones);
    const DiscreteDiagSSM fixed = zoh(lambda, b, {std::exp(-2.0)});
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(varying.lambda_bar_steps.at(k, 0) - fixed.lambda_bar[0]) < 1e-15);
        CHECK(std::abs(varying.input_scale_steps.at(k, 0) - fixed.input_scale[0]) < 1e-15);
    }

    // Zero-width hold.
    const DiscreteDiagSSM zero = zoh_per_step(lambda, b, log_delta, {0.0});
    CHECK(zero.lambda_bar_steps.at(0, 0) == cplx(1.0, 0.0));
    CHECK(std::abs(zero.input_scale_steps.at(0, 0)) == 0.0);

    // Scalar exponential evaluation.
    const DiscreteDiagSSM d =
        zoh_per_step({cplx(-1.0, 0.0)}, single_column({cplx(1.0, 0.0)}), {0.0}, {0.5, 2.0});
    CHECK(d.lambda_bar_steps.at(0, 0).real() == doctest::Approx(0.6065307).epsilon(1e-6));
    CHECK(d.lambda_bar_steps.at(1, 0).real() == doctest::Approx(0.1353353).epsilon(1e-6));

    CHECK_THROWS_AS((void)zoh_per_step(lambda, b, log_delta, {-0.1}), std::invalid_argument);
}
