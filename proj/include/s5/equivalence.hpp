#pragma once

#include <cstdint>
#include <functional>

#include "s5/linalg.hpp"

namespace s5 {

// Bank of H SISO systems sharing one dense state matrix and one scalar
// timescale; column h of b_cols drives system h.
struct TiedS4Bank {
    RealMatrix a;        // N x N
    RealMatrix b_cols;   // N x H
    double delta = 0.0;
    RealMatrix c;        // H x N, shared output matrix
};

struct Prop2Report {
    double output_residual = 0.0;     // max_k |y_mimo - C_equiv x^{(1:H)}|_inf
    double state_sum_residual = 0.0;  // max_k |x_k - sum_h x_k^{(h)}|_inf
};

// Proposition-2 style check: one MIMO system with A = HiPPO-N versus the tied
// bank of H SISO systems, discretized identically through the eigenbasis.
Prop2Report prop2_check(std::size_t n, std::size_t h, std::size_t len, std::uint64_t seed);

// Block-diagonal relaxation: a (J*R)-state system with J HiPPO-N blocks (each
// with its own timescale) versus the sum of J independent R-state systems.
double blockdiag_check(std::size_t r, std::size_t j, std::size_t h, std::size_t len,
                       std::uint64_t seed);

struct ConvergenceReport {
    std::vector<std::size_t> n_values;
    RealVector discrepancies;  // e(N), same order
    std::uint64_t input_seed = 0;
};

// Integrates dx/dt = A_LegS x + B u and dx'/dt = A_Normal x' + B u / 2 from
// zero state under a seed-determined smooth input and records
// e(N) = max_t ||x_{0:K}(t) - x'_{0:K}(t)||_2 over the first K = 8 coordinates.
ConvergenceReport corollary1_check(const std::vector<std::size_t>& n_values, std::size_t h,
                                   double t_final, std::size_t steps, std::uint64_t seed);

// Classical RK4 for dx/dt = A x + B u(t). Returns the (steps+1) x N trajectory
// including the initial state.
RealMatrix rk4_integrate(const RealMatrix& a, const RealMatrix& b,
                         const std::function<RealVector(double)>& forcing, const RealVector& x0,
                         double dt, std::size_t steps);

// Smooth test input: per feature, a seed-determined sum of three sinusoids
// with angular frequencies below 8*pi.
std::function<RealVector(double)> make_sinusoid_input(std::size_t h, std::uint64_t seed);

}  // namespace s5
