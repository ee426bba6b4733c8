#include "s5/hippo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace s5 {

HippoLegs make_hippo_legs(std::size_t n) {
    if (n == 0) throw std::invalid_argument("make_hippo_legs: N must be >= 1");
    HippoLegs out{RealMatrix(n, n), RealVector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double si = std::sqrt(2.0 * static_cast<double>(i) + 1.0);
        out.b[i] = si;
        for (std::size_t k = 0; k < i; ++k)
            out.a.at(i, k) = -si * std::sqrt(2.0 * static_cast<double>(k) + 1.0);
        out.a.at(i, i) = -(static_cast<double>(i) + 1.0);
    }
    return out;
}

RealVector make_p_legs(std::size_t n) {
    if (n == 0) throw std::invalid_argument("make_p_legs: N must be >= 1");
    RealVector p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::sqrt(static_cast<double>(i) + 0.5);
    return p;
}

RealMatrix make_hippo_normal(std::size_t n) {
    // Closed form of A_LegS + p p^T: exactly -1/2 on the diagonal and exactly
    // antisymmetric off it, with entries -+ sqrt(i+1/2) sqrt(k+1/2).
    const RealVector p = make_p_legs(n);
    RealMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.at(i, i) = -0.5;
        for (std::size_t k = 0; k < i; ++k) {
            const double v = p[i] * p[k];
            out.at(i, k) = -v;
            out.at(k, i) = v;
        }
    }
    return out;
}

DiagonalizedHippo diagonalize_normal(const RealMatrix& a_normal) {
    if (a_normal.rows != a_normal.cols)
        throw std::invalid_argument("diagonalize_normal: matrix not square");
    const std::size_t n = a_normal.rows;

    // S = A + I/2 must be skew-symmetric.
    double skew_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double sik = a_normal.at(i, k) + (i == k ? 0.5 : 0.0);
            const double ski = a_normal.at(k, i) + (i == k ? 0.5 : 0.0);
            skew_err = std::max(skew_err, std::abs(sik + ski));
        }
    }
    if (skew_err > 1e-10)
        throw std::invalid_argument("diagonalize_normal: A + I/2 not skew-symmetric (deviation " +
                                    std::to_string(skew_err) + ")");

    // iS is Hermitian with real spectrum mu; A = V diag(-1/2 - i mu) V^H.
    // S is antisymmetrized first so rounding dust (bounded by the check
    // above) cannot leave an imaginary diagonal behind.
    ComplexMatrix herm(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            const double s = 0.5 * ((a_normal.at(i, k)) - (a_normal.at(k, i)));
            herm.at(i, k) = cplx(0.0, s);
            herm.at(k, i) = cplx(0.0, -s);
        }
        herm.at(i, i) = cplx(0.0, 0.0);
    }

    EigResult eig = hermitian_eig(herm);

    // mu ascending makes Im(lambda) = -mu descending, as required.
    DiagonalizedHippo out;
    out.lambda.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.lambda[i] = cplx(-0.5, -eig.eigenvalues[i]);
    out.v = std::move(eig.vectors);
    return out;
}

DiagonalizedHippo block_diag_hippo(std::size_t p, std::size_t j) {
    if (j == 0 || p == 0 || p % j != 0)
        throw std::invalid_argument("block_diag_hippo: J must divide P (got P=" + std::to_string(p) +
                                    ", J=" + std::to_string(j) + ")");
    const std::size_t r = p / j;
    const DiagonalizedHippo block = diagonalize_normal(make_hippo_normal(r));

    DiagonalizedHippo out;
    out.lambda.resize(p);
    out.v = ComplexMatrix(p, p);
    for (std::size_t b = 0; b < j; ++b) {
        const std::size_t off = b * r;
        for (std::size_t i = 0; i < r; ++i) {
            out.lambda[off + i] = block.lambda[i];
            for (std::size_t k = 0; k < r; ++k) out.v.at(off + i, off + k) = block.v.at(i, k);
        }
    }
    return out;
}

ContinuousDiagSSM init_continuous_ssm(const HippoSpec& spec) {
    const std::size_t p = spec.state_size;
    const std::size_t h = spec.feature_size;
    if (p == 0 || h == 0) throw std::invalid_argument("init_continuous_ssm: P and H must be >= 1");
    if (spec.blocks == 0 || p % spec.blocks != 0)
        throw std::invalid_argument("init_continuous_ssm: J must divide P");
    if (!(spec.delta_min > 0.0) || !(spec.delta_min < spec.delta_max))
        throw std::invalid_argument("init_continuous_ssm: need 0 < delta_min < delta_max");
    const std::size_t block_size = p / spec.blocks;
    if (spec.conj_sym && block_size % 2 != 0)
        throw std::invalid_argument(
            "init_continuous_ssm: conj_sym needs an even block size P/J so the spectrum splits "
            "into conjugate pairs");

    const DiagonalizedHippo diag = block_diag_hippo(p, spec.blocks);

    Rng rng(spec.seed);
    Rng rng_b = rng.fork("B");
    Rng rng_c = rng.fork("C");
    Rng rng_d = rng.fork("D");
    Rng rng_delta = rng.fork("logDelta");

    // B0, C0 real i.i.d. N(0, 1/P); projected through the eigenbasis.
    const double sigma = 1.0 / std::sqrt(static_cast<double>(p));
    ComplexMatrix b0(p, h);
    for (cplx& x : b0.data) x = sigma * rng_b.next_gaussian();
    const std::size_t c_width = spec.bidirectional ? 2 * p : p;
    ComplexMatrix c0(h, c_width);
    for (cplx& x : c0.data) x = sigma * rng_c.next_gaussian();

    const ComplexMatrix vh = conj_transpose(diag.v);
    ComplexMatrix b_full = matmul(vh, b0);  // P x H

    // C = C0 V; for bidirectional each half of C0 is projected separately.
    ComplexMatrix c_full(h, c_width);
    const std::size_t halves = spec.bidirectional ? 2 : 1;
    for (std::size_t half = 0; half < halves; ++half) {
        ComplexMatrix part(h, p);
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t k = 0; k < p; ++k) part.at(i, k) = c0.at(i, half * p + k);
        ComplexMatrix proj = matmul(part, diag.v);
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t k = 0; k < p; ++k) c_full.at(i, half * p + k) = proj.at(i, k);
    }

    // conj_sym keeps, per block, the half of the spectrum with Im > 0 (the
    // blocks are sorted by imaginary part descending, so that is the first
    // half of each block). Verify the discarded half really is the conjugate.
    std::vector<std::size_t> keep;
    if (spec.conj_sym) {
        keep.reserve(p / 2);
        for (std::size_t b = 0; b < spec.blocks; ++b) {
            const std::size_t off = b * block_size;
            for (std::size_t i = 0; i < block_size / 2; ++i) {
                const cplx kept = diag.lambda[off + i];
                const cplx dropped = diag.lambda[off + block_size - 1 - i];
                if (!(kept.imag() > 0.0) || std::abs(dropped - std::conj(kept)) > 1e-9)
                    throw std::runtime_error(
                        "init_continuous_ssm: spectrum does not split into conjugate pairs");
                keep.push_back(off + i);
            }
        }
    } else {
        keep.reserve(p);
        for (std::size_t i = 0; i < p; ++i) keep.push_back(i);
    }
    const std::size_t stored = keep.size();

    ContinuousDiagSSM ssm;
    ssm.conj_sym = spec.conj_sym;
    ssm.lambda.resize(stored);
    ssm.b_tilde = ComplexMatrix(stored, h);
    ssm.c_tilde = ComplexMatrix(h, halves * stored);
    for (std::size_t i = 0; i < stored; ++i) {
        ssm.lambda[i] = diag.lambda[keep[i]];
        for (std::size_t col = 0; col < h; ++col) ssm.b_tilde.at(i, col) = b_full.at(keep[i], col);
        for (std::size_t row = 0; row < h; ++row)
            for (std::size_t half = 0; half < halves; ++half)
                ssm.c_tilde.at(row, half * stored + i) = c_full.at(row, half * p + keep[i]);
    }

    ssm.d.resize(h);
    for (double& x : ssm.d) x = rng_d.next_gaussian();

    ssm.log_delta.resize(stored);
    const double lo = std::log(spec.delta_min);
    const double hi = std::log(spec.delta_max);
    for (double& x : ssm.log_delta) x = rng_delta.next_uniform(lo, hi);

    return ssm;
}

}  // namespace s5
