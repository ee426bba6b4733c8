#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "s5/rng.hpp"
#include "s5/scan.hpp"

using namespace s5;

namespace {

ScanElement random_element(Rng& rng, std::size_t dim, double a_radius = 1.0) {
    ScanElement e{ComplexVector(dim), ComplexVector(dim)};
    for (std::size_t p = 0; p < dim; ++p) {
        const double r = a_radius * rng.next_uniform();
        const double phi = rng.next_uniform(0.0, 6.283185307179586);
        e.a[p] = std::polar(r, phi);
        e.bu[p] = cplx(rng.next_gaussian(), rng.next_gaussian());
    }
    return e;
}

ElementSequence random_sequence(Rng& rng, std::size_t len, std::size_t dim) {
    ElementSequence elems(len, dim);
    for (std::size_t k = 0; k < len; ++k) {
        const ScanElement e = random_element(rng, dim);
        std::copy(e.a.begin(), e.a.end(), elems.a(k).begin());
        std::copy(e.bu.begin(), e.bu.end(), elems.bu(k).begin());
    }
    return elems;
}

double rel_deviation(const StateSequence& got, const StateSequence& want) {
    double scale = 1e-300;
    for (const cplx& x : want.states) scale = std::max(scale, std::abs(x));
    double dev = 0.0;
    for (std::size_t i = 0; i < want.states.size(); ++i)
        dev = std::max(dev, std::abs(got.states[i] - want.states[i]));
    return dev / scale;
}

}  // namespace

TEST_CASE("scan_binop identity element") {
    Rng rng(1);
    const ScanElement c = random_element(rng, 4);
    const ScanElement id{ComplexVector(4, cplx(1.0, 0.0)), ComplexVector(4, cplx(0.0, 0.0))};
    const ScanElement out = scan_binop(id, c);
    for (std::size_t p = 0; p < 4; ++p) {
        CHECK(std::abs(out.a[p] - c.a[p]) == 0.0);
        CHECK(std::abs(out.bu[p] - c.bu[p]) == 0.0);
    }
}

TEST_CASE("scan_binop two-step composition") {
    // (A, Bu1) • (A, Bu2) = (A^2, A Bu1 + Bu2)
    Rng rng(2);
    const std::size_t dim = 3;
    ComplexVector a(dim), bu1(dim), bu2(dim);
    for (std::size_t p = 0; p < dim; ++p) {
        a[p] = cplx(rng.next_gaussian(), rng.next_gaussian());
        bu1[p] = cplx(rng.next_gaussian(), rng.next_gaussian());
        bu2[p] = cplx(rng.next_gaussian(), rng.next_gaussian());
    }
    const ScanElement out = scan_binop({a, bu1}, {a, bu2});
    for (std::size_t p = 0; p < dim; ++p) {
        CHECK(std::abs(out.a[p] - a[p] * a[p]) < 1e-14);
        CHECK(std::abs(out.bu[p] - (a[p] * bu1[p] + bu2[p])) < 1e-14);
    }
}

TEST_CASE("scan_binop associativity over random triples") {
    Rng rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const ScanElement e1 = random_element(rng, 2);
        const ScanElement e2 = random_element(rng, 2);
        const ScanElement e3 = random_element(rng, 2);
        const ScanElement left = scan_binop(scan_binop(e1, e2), e3);
        const ScanElement right = scan_binop(e1, scan_binop(e2, e3));
        for (std::size_t p = 0; p < 2; ++p) {
            const double scale = std::max({1.0, std::abs(left.a[p]), std::abs(left.bu[p])});
            CHECK(std::abs(left.a[p] - right.a[p]) / scale < 1e-12);
            CHECK(std::abs(left.bu[p] - right.bu[p]) / scale < 1e-12);
        }
    }
}

TEST_CASE("scan_binop rejects mismatched lengths") {
    const ScanElement a{ComplexVector(2), ComplexVector(2)};
    const ScanElement b{ComplexVector(3), ComplexVector(3)};
    CHECK_THROWS_AS((void)scan_binop(a, b), std::invalid_argument);
}

TEST_CASE("sequential_scan hand recurrences") {
    ElementSequence elems(4, 1);
    for (std::size_t k = 0; k < 4; ++k) {
        elems.a(k)[0] = 0.5;
        elems.bu(k)[0] = 1.0;
    }
    const StateSequence xs = sequential_scan(elems);
    const double expect[4] = {1.0, 1.5, 1.75, 1.875};
    for (std::size_t k = 0; k < 4; ++k) CHECK(xs.row(k)[0].real() == doctest::Approx(expect[k]));

    // a = 0: memoryless
    ElementSequence memoryless(3, 1);
    for (std::size_t k = 0; k < 3; ++k) {
        memoryless.a(k)[0] = 0.0;
        memoryless.bu(k)[0] = cplx(static_cast<double>(k), 1.0);
    }
    const StateSequence ys = sequential_scan(memoryless);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::abs(ys.row(k)[0] - cplx(static_cast<double>(k), 1.0)) == 0.0);

    // a = 1, bu = 1: cumulative sum
    ElementSequence cumsum(8, 1);
    for (std::size_t k = 0; k < 8; ++k) {
        cumsum.a(k)[0] = 1.0;
        cumsum.bu(k)[0] = 1.0;
    }
    const StateSequence zs = sequential_scan(cumsum);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(zs.row(k)[0].real() == doctest::Approx(static_cast<double>(k + 1)));

    CHECK_THROWS_AS((void)sequential_scan(ElementSequence(0, 1)), std::invalid_argument);
}

TEST_CASE("parallel_scan matches the worked L=4 structure") {
    Rng rng(4);
    ElementSequence elems = random_sequence(rng, 4, 3);
    const StateSequence seq = sequential_scan(elems);
    // chunk=2 reproduces the even-then-odd evaluation order of the example.
    const StateSequence par = parallel_scan(elems, 2, 2);
    CHECK(rel_deviation(par, seq) < 1e-14);
}

TEST_CASE("parallel_scan single element") {
    ElementSequence elems(1, 2);
    elems.a(0)[0] = cplx(0.3, 0.1);
    elems.a(0)[1] = cplx(-0.2, 0.0);
    elems.bu(0)[0] = cplx(1.0, 2.0);
    elems.bu(0)[1] = cplx(-1.0, 0.5);
    const StateSequence xs = parallel_scan(elems, 4);
    CHECK(std::abs(xs.row(0)[0] - cplx(1.0, 2.0)) == 0.0);
    CHECK(std::abs(xs.row(0)[1] - cplx(-1.0, 0.5)) == 0.0);
}

TEST_CASE("parallel_scan equals the sequential oracle") {
    Rng rng(5);
    for (const std::size_t len : {3, 17, 64, 1000}) {
        for (const std::size_t dim : {1, 2, 7}) {
            ElementSequence elems = random_sequence(rng, len, dim);
            const StateSequence seq = sequential_scan(elems);
            for (const std::size_t workers : {1, 2, 3, 4, 8}) {
                const StateSequence par = parallel_scan(elems, workers);
                CHECK(rel_deviation(par, seq) <= 1e-12);
            }
        }
    }
}

TEST_CASE("parallel_scan is bitwise reproducible") {
    Rng rng(6);
    ElementSequence elems = random_sequence(rng, 257, 5);
    const StateSequence a = parallel_scan(elems, 4, 40);
    const StateSequence b = parallel_scan(elems, 4, 40);
    CHECK(a.states == b.states);
    // One chunk degenerates to the sequential order exactly.
    const StateSequence c = parallel_scan(elems, 1);
    const StateSequence d = sequential_scan(elems);
    CHECK(c.states == d.states);
}

TEST_CASE("scan map is linear in the forcing") {
    Rng rng(7);
    const std::size_t len = 50, dim = 3;
    ElementSequence eu = random_sequence(rng, len, dim);
    ElementSequence ev = random_sequence(rng, len, dim);
    // Share transitions so only the forcing differs.
    for (std::size_t k = 0; k < len; ++k)
        std::copy(eu.a(k).begin(), eu.a(k).end(), ev.a(k).begin());
    const double alpha = 0.7, beta = -1.3;
    ElementSequence mix(len, dim);
    for (std::size_t k = 0; k < len; ++k) {
        std::copy(eu.a(k).begin(), eu.a(k).end(), mix.a(k).begin());
        for (std::size_t p = 0; p < dim; ++p)
            mix.bu(k)[p] = alpha * eu.bu(k)[p] + beta * ev.bu(k)[p];
    }
    const StateSequence xu = sequential_scan(eu);
    const StateSequence xv = sequential_scan(ev);
    const StateSequence xm = sequential_scan(mix);
    double scale = 1.0;
    for (const cplx& x : xm.states) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < xm.states.size(); ++i)
        CHECK(std::abs(xm.states[i] - (alpha * xu.states[i] + beta * xv.states[i])) / scale <= 1e-11);
}

TEST_CASE("apply_ssm feedthrough-only path") {
    DiscreteDiagSSM disc;
    disc.lambda_bar = {cplx(0.5, 0.2), cplx(-0.1, 0.4)};
    disc.input_scale = {cplx(1.0, 0.0), cplx(1.0, 0.0)};
    disc.b_tilde = ComplexMatrix(2, 2);
    disc.b_tilde.at(0, 0) = cplx(0.3, 0.1);
    disc.b_tilde.at(1, 1) = cplx(-0.2, 0.5);
    const ComplexMatrix c_zero(2, 2);
    const RealVector d{2.0, -3.0};
    RealMatrix u(3, 2);
    Rng rng(8);
    for (double& x : u.data) x = rng.next_gaussian();
    const RealMatrix y = apply_ssm(disc, c_zero, d, u, false);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(y.at(k, 0) == u.at(k, 0) * 2.0);
        CHECK(y.at(k, 1) == u.at(k, 1) * -3.0);
    }
}

TEST_CASE("apply_ssm scalar recurrence") {
    DiscreteDiagSSM disc;
    disc.lambda_bar = {cplx(0.5, 0.0)};
    disc.input_scale = {cplx(1.0, 0.0)};
    disc.b_tilde = ComplexMatrix(1, 1);
    disc.b_tilde.at(0, 0) = cplx(1.0, 0.0);
    ComplexMatrix c(1, 1);
    c.at(0, 0) = cplx(1.0, 0.0);
    RealMatrix u(3, 1);
    u.data = {1.0, 1.0, 1.0};
    const RealMatrix y = apply_ssm(disc, c, {0.0}, u, false);
    CHECK(y.at(0, 0) == doctest::Approx(1.0));
    CHECK(y.at(1, 0) == doctest::Approx(1.5));
    CHECK(y.at(2, 0) == doctest::Approx(1.75));
}

TEST_CASE("conjugate-symmetric half system matches the full system") {
    Rng rng(9);
    const std::size_t half = 3, feats = 2, len = 20;
    DiscreteDiagSSM full, stored;
    stored.lambda_bar.resize(half);
    stored.input_scale.assign(half, cplx(1.0, 0.0));
    stored.b_tilde = ComplexMatrix(half, feats);
    full.lambda_bar.resize(2 * half);
    full.input_scale.assign(2 * half, cplx(1.0, 0.0));
    full.b_tilde = ComplexMatrix(2 * half, feats);
    ComplexMatrix c_half(feats, half), c_full(feats, 2 * half);
    for (std::size_t p = 0; p < half; ++p) {
        const cplx lbar = std::polar(rng.next_uniform(), rng.next_uniform(0.0, 3.14));
        stored.lambda_bar[p] = lbar;
        full.lambda_bar[p] = lbar;
        full.lambda_bar[half + p] = std::conj(lbar);
        for (std::size_t h = 0; h < feats; ++h) {
            const cplx b(rng.next_gaussian(), rng.next_gaussian());
            stored.b_tilde.at(p, h) = b;
            full.b_tilde.at(p, h) = b;
            full.b_tilde.at(half + p, h) = std::conj(b);
            const cplx cv(rng.next_gaussian(), rng.next_gaussian());
            c_half.at(h, p) = cv;
            c_full.at(h, p) = cv;
            c_full.at(h, half + p) = std::conj(cv);
        }
    }
    const RealVector d{0.4, -0.8};
    RealMatrix u(len, feats);
    for (double& x : u.data) x = rng.next_gaussian();

    const RealMatrix y_full = apply_ssm(full, c_full, d, u, false);
    const RealMatrix y_half = apply_ssm(stored, c_half, d, u, true);
    double dev = 0.0;
    for (std::size_t i = 0; i < y_full.data.size(); ++i)
        dev = std::max(dev, std::abs(y_full.data[i] - y_half.data[i]));
    CHECK(dev <= 1e-12);
}

TEST_CASE("apply_ssm shape errors") {
    DiscreteDiagSSM disc;
    disc.lambda_bar = {cplx(0.5, 0.0)};
    disc.input_scale = {cplx(1.0, 0.0)};
    disc.b_tilde = ComplexMatrix(1, 2);
    const ComplexMatrix c(2, 1);
    RealMatrix u(3, 1);  // wrong width: disc expects 2 features
    CHECK_THROWS_AS((void)apply_ssm(disc, c, {0.0, 0.0}, u, false), std::invalid_argument);
}
