#include "s5/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace s5 {

PlanarMatrix PlanarMatrix::from(const ComplexMatrix& m) {
    PlanarMatrix out{RealMatrix(m.rows, m.cols), RealMatrix(m.rows, m.cols)};
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        out.re.data[i] = m.data[i].real();
        out.im.data[i] = m.data[i].imag();
    }
    return out;
}

bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(std::span<const cplx> xs) {
    for (const cplx& x : xs)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

double max_abs(std::span<const cplx> v) {
    double m = 0.0;
    for (const cplx& x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const ComplexMatrix& m) { return max_abs(std::span<const cplx>(m.data)); }

ComplexMatrix conj_transpose(const ComplexMatrix& m) {
    ComplexMatrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out.at(j, i) = std::conj(m.at(i, j));
    return out;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    ComplexMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const cplx aik = a.at(i, k);
            if (aik == cplx{}) continue;
            const cplx* brow = b.data.data() + k * b.cols;
            cplx* orow = out.data.data() + i * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] = cfma(aik, brow[j], orow[j]);
        }
    }
    return out;
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    RealMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            const double* brow = b.data.data() + k * b.cols;
            double* orow = out.data.data() + i * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

ComplexMatrix to_complex(const RealMatrix& m) {
    ComplexMatrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i];
    return out;
}

EigResult hermitian_eig(const ComplexMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("hermitian_eig: matrix not square");
    const std::size_t n = m.rows;
    if (n == 0) throw std::invalid_argument("hermitian_eig: empty matrix");
    if (!all_finite(std::span<const cplx>(m.data)))
        throw std::invalid_argument("hermitian_eig: non-finite entries");

    const double scale = max_abs(m);
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            asym = std::max(asym, std::abs(m.at(i, j) - std::conj(m.at(j, i))));
    if (asym > 1e-10 * std::max(scale, 1e-300))
        throw std::invalid_argument("hermitian_eig: input not Hermitian within tolerance (max asymmetry " +
                                    std::to_string(asym) + ")");

    // Symmetrize so slightly asymmetric (but accepted) inputs factor deterministically.
    ComplexMatrix work(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            work.at(i, j) = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));

    RealVector w(n);
    const lapack_int info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'V', 'U', static_cast<lapack_int>(n),
                                           reinterpret_cast<lapack_complex_double*>(work.data.data()),
                                           static_cast<lapack_int>(n), w.data());
    if (info < 0)
        throw std::invalid_argument("hermitian_eig: illegal argument " + std::to_string(-info));
    if (info > 0)
        throw std::runtime_error("hermitian_eig: eigensolver failed to converge (info=" +
                                 std::to_string(info) + ")");
    // zheevd returns eigenvalues ascending; `work` holds the eigenvectors as columns.
    return {std::move(w), std::move(work)};
}

ComplexVector dft(const ComplexVector& x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("dft: length must be a power of two, got " + std::to_string(n));

    ComplexVector a = x;
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx w = std::polar(1.0, ang * static_cast<double>(j));
                const cplx u = a[i + j];
                const cplx v = cmul(w, a[i + j + len / 2]);
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (cplx& c : a) c *= inv_n;
    }
    return a;
}

}  // namespace s5
