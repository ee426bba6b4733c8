#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace s5 {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;
using RealVector = std::vector<double>;

// Complex multiply written out in components. std::complex operator* compiles
// to a libcall (__muldc3) that handles inf/nan edge cases; the kernels here
// never need that and the open-coded form vectorizes.
inline cplx cmul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(),
            a.real() * b.imag() + a.imag() * b.real()};
}

inline cplx cfma(cplx a, cplx b, cplx acc) {
    return {acc.real() + a.real() * b.real() - a.imag() * b.imag(),
            acc.imag() + a.real() * b.imag() + a.imag() * b.real()};
}

struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    ComplexVector data;  // row-major

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    cplx& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<cplx> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const cplx> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    RealVector data;  // row-major

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const double& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// Separate re/im planes of a complex matrix. The hot kernels run on planar
// copies: interleaved std::complex storage defeats vectorization of the
// inner loops.
struct PlanarMatrix {
    RealMatrix re, im;
    static PlanarMatrix from(const ComplexMatrix& m);
};

bool all_finite(std::span<const double> xs);
bool all_finite(std::span<const cplx> xs);

// Max absolute entry.
double max_abs(const ComplexMatrix& m);
double max_abs(std::span<const cplx> v);
double max_abs(std::span<const double> v);

ComplexMatrix conj_transpose(const ComplexMatrix& m);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
ComplexMatrix to_complex(const RealMatrix& m);

struct EigResult {
    RealVector eigenvalues;  // ascending
    ComplexMatrix vectors;   // unitary; column j pairs with eigenvalues[j]
};

// Eigendecomposition of a Hermitian matrix. Input must satisfy
// max|M - M^H| <= 1e-10 * max|M|; the symmetrized (M + M^H)/2 is factored.
// Throws std::invalid_argument on non-Hermitian input and std::runtime_error
// (with the failing iteration count) if the solver does not converge.
EigResult hermitian_eig(const ComplexMatrix& m);

// Radix-2 DFT. Forward: X_k = sum_n x_n e^{-2*pi*i*n*k/L}; inverse carries the
// 1/L factor. Length must be a power of two; callers zero-pad.
ComplexVector dft(const ComplexVector& x, bool inverse = false);

}  // namespace s5
