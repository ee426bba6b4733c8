#pragma once

#include "s5/discretize.hpp"
#include "s5/linalg.hpp"

namespace s5 {

// One element of the linear-recurrence scan: diagonal transition a and forced
// term bu. The combined sequence realizes x_k = a_k * x_{k-1} + bu_k.
struct ScanElement {
    ComplexVector a;
    ComplexVector bu;
};

// Contiguous storage for L scan elements of dimension P. Keeping the a and bu
// streams planar lets the scan kernels run over flat arrays.
class ElementSequence {
public:
    ElementSequence() = default;
    ElementSequence(std::size_t length, std::size_t dim)
        : length_(length), dim_(dim), a_(length * dim), bu_(length * dim) {}

    static ElementSequence from_elements(const std::vector<ScanElement>& elems);

    std::size_t length() const { return length_; }
    std::size_t dim() const { return dim_; }

    std::span<cplx> a(std::size_t k) { return {a_.data() + k * dim_, dim_}; }
    std::span<const cplx> a(std::size_t k) const { return {a_.data() + k * dim_, dim_}; }
    std::span<cplx> bu(std::size_t k) { return {bu_.data() + k * dim_, dim_}; }
    std::span<const cplx> bu(std::size_t k) const { return {bu_.data() + k * dim_, dim_}; }

    ScanElement element(std::size_t k) const {
        return {ComplexVector(a(k).begin(), a(k).end()), ComplexVector(bu(k).begin(), bu(k).end())};
    }

private:
    std::size_t length_ = 0;
    std::size_t dim_ = 0;
    ComplexVector a_;
    ComplexVector bu_;
};

struct StateSequence {
    std::size_t length = 0;
    std::size_t dim = 0;
    ComplexVector states;  // length x dim, row-major

    StateSequence() = default;
    StateSequence(std::size_t l, std::size_t d) : length(l), dim(d), states(l * d) {}
    std::span<cplx> row(std::size_t k) { return {states.data() + k * dim, dim}; }
    std::span<const cplx> row(std::size_t k) const { return {states.data() + k * dim, dim}; }
};

// The associative operator of the linear-recurrence scan:
// (a_i, bu_i) • (a_j, bu_j) = (a_j ⊙ a_i, a_j ⊙ bu_i + bu_j), elementwise.
ScanElement scan_binop(const ScanElement& e_i, const ScanElement& e_j);

// Reference evaluation: x_k = a_k x_{k-1} + bu_k from x_0 = 0.
StateSequence sequential_scan(const ElementSequence& elems);

// Chunked two-pass scan: the sequence splits into contiguous chunks, chunk
// summaries are combined serially, and each chunk is then rescanned from its
// carried-in state. Deterministic for a fixed (input, workers, chunk size);
// chunk defaults to ceil(L / workers).
StateSequence parallel_scan(const ElementSequence& elems, std::size_t workers);
StateSequence parallel_scan(const ElementSequence& elems, std::size_t workers, std::size_t chunk);

// SSM output path: scans the discretized system over an L x H input and
// projects, y_k = Re(C x_k) + D ⊙ u_k, doubled on the Re term under conj_sym.
RealMatrix apply_ssm(const DiscreteDiagSSM& disc, const ComplexMatrix& c_tilde,
                     const RealVector& d, const RealMatrix& u, bool conj_sym,
                     std::size_t workers = 1);

namespace detail {
// B_bar u_k for every step, as scan forcing terms: per step, input_scale ⊙ (B_tilde u_k).
void fill_forcing(const DiscreteDiagSSM& disc, const RealMatrix& u, ElementSequence& out);
}  // namespace detail

}  // namespace s5
