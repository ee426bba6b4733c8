#pragma once

#include <cstdint>

#include "s5/linalg.hpp"
#include "s5/rng.hpp"

namespace s5 {

struct HippoSpec {
    std::size_t state_size = 0;   // P
    std::size_t blocks = 1;       // J, must divide P
    bool conj_sym = false;        // store only the positive-imaginary half
    double delta_min = 0.001;
    double delta_max = 0.1;
    std::size_t feature_size = 0;  // H
    std::uint64_t seed = 0;
    bool bidirectional = false;    // doubles the width of C
};

// Continuous-time diagonal SSM parameters (Lambda, B, C, D, log Delta).
// With conj_sym only the eigenvalues with positive imaginary part are kept,
// so state_dim() is P/2; the discarded conjugate half is reconstructed at
// output time by doubling the real part of the projection.
struct ContinuousDiagSSM {
    ComplexVector lambda;        // P_stored
    ComplexMatrix b_tilde;       // P_stored x H
    ComplexMatrix c_tilde;       // H x P_stored (2*P_stored if bidirectional)
    RealVector d;                // H
    RealVector log_delta;        // P_stored
    bool conj_sym = false;

    std::size_t state_dim() const { return lambda.size(); }
    std::size_t feature_dim() const { return d.size(); }
};

struct HippoLegs {
    RealMatrix a;   // N x N, lower triangular
    RealVector b;   // N
};

// Lower-triangular HiPPO-LegS matrix and its SISO input vector:
// A[n][n] = -(n+1), A[n][k] = -sqrt(2n+1)sqrt(2k+1) for n > k, b[n] = sqrt(2n+1).
HippoLegs make_hippo_legs(std::size_t n);

// Low-rank term: p[n] = sqrt(n + 1/2).
RealVector make_p_legs(std::size_t n);

// Normal part of HiPPO-LegS: A_N = A_LegS + p p^T. Equals -I/2 plus a
// skew-symmetric matrix.
RealMatrix make_hippo_normal(std::size_t n);

struct DiagonalizedHippo {
    ComplexVector lambda;  // sorted by imaginary part descending
    ComplexMatrix v;       // unitary, columns are eigenvectors
};

// Diagonalize a HiPPO-N matrix. Forms S = A + I/2 (must be skew-symmetric
// within 1e-10), factors the Hermitian matrix iS, and sets
// lambda = -1/2 - i*mu so every real part is exactly -1/2.
DiagonalizedHippo diagonalize_normal(const RealMatrix& a_normal);

// Block-diagonal initialization: J copies of the size-(P/J) HiPPO-N spectrum,
// with the eigenvector blocks placed on the diagonal of V.
DiagonalizedHippo block_diag_hippo(std::size_t p, std::size_t j);

// Draw fully initialized continuous-time parameters:
// B = V^H B0 and C = C0 V with B0, C0 real i.i.d. N(0, 1/P); D i.i.d. N(0,1);
// log Delta i.i.d. uniform on [log delta_min, log delta_max).
ContinuousDiagSSM init_continuous_ssm(const HippoSpec& spec);

}  // namespace s5
