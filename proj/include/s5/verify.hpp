#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s5/equivalence.hpp"
#include "s5/linalg.hpp"

namespace s5 {

struct CheckResult {
    std::string name;
    double value = 0.0;      // measured quantity
    double threshold = 0.0;  // pass when value <= threshold (or >= when flipped)
    bool pass_at_or_above = false;
    bool pass = false;
    double seconds = 0.0;
};

// Scan correctness: parallel vs sequential over L in {2^6..2^14}, P in {2, 64},
// n_systems random stable systems per combination.
std::vector<CheckResult> verify_scan(std::size_t workers, std::size_t n_systems = 50,
                                     std::uint64_t seed = 1);

// Binary-operator associativity over random triples, both groupings.
std::vector<CheckResult> verify_operator(std::size_t n_triples = 10000, std::uint64_t seed = 2);

// HiPPO identities: A_LegS = A_Normal - P P^T for N in 1..256; spectrum real
// parts exactly -1/2 and eigenvector unitarity on a size ladder.
std::vector<CheckResult> verify_hippo();

// Proposition 2 output/state-sum residuals over random configurations plus
// the J=2 block-diagonal variant.
std::vector<CheckResult> verify_prop2(std::size_t n_configs = 20, std::uint64_t seed = 3);

// Corollary 1 convergence trend over N in {16, 32, 64, 128} for n_seeds seeds.
// Reports are returned for CSV emission.
std::vector<CheckResult> verify_corollary1(std::size_t n_seeds = 3, std::uint64_t seed = 4,
                                           std::vector<ConvergenceReport>* reports = nullptr);

// SISO convolution path vs recurrence over random systems.
std::vector<CheckResult> verify_conv(std::size_t n_systems = 20, std::uint64_t seed = 5);

// Central-finite-difference gradient checks over every parameter class and
// every discretization/direction path.
std::vector<CheckResult> verify_grad(std::uint64_t seed = 6);

struct BenchRow {
    std::string impl;  // sequential | parallel | conv
    std::size_t length = 0;
    std::size_t state_dim = 0;
    std::size_t feature_dim = 0;
    std::size_t workers = 0;
    std::size_t chunk = 0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
    double median_ms = 0.0;
};

// Median-of-repeats wall times (one warmup) for the sequential scan, the
// parallel scan at each worker count, and the matched-work SISO FFT
// convolution (H independent kernels of length L).
std::vector<BenchRow> run_bench(const std::vector<std::size_t>& lengths, std::size_t state_dim,
                                std::size_t feature_dim, const std::vector<std::size_t>& workers,
                                std::size_t repeats, std::uint64_t seed = 7);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace s5
