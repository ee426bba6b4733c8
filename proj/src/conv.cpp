#include "s5/conv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "s5/scan.hpp"

namespace s5 {

SisoKernel materialize_kernel(const ComplexVector& lambda_bar, const ComplexVector& b_bar,
                              const ComplexVector& c_bar, std::size_t len, bool conj_sym) {
    const std::size_t n = lambda_bar.size();
    if (b_bar.size() != n || c_bar.size() != n)
        throw std::invalid_argument("materialize_kernel: system vectors must have matching length");
    if (len == 0) throw std::invalid_argument("materialize_kernel: kernel length must be >= 1");

    const double scale = conj_sym ? 2.0 : 1.0;
    SisoKernel kernel{RealVector(len)};
    ComplexVector w(n);  // running c * lambda^l * b
    for (std::size_t i = 0; i < n; ++i) w[i] = cmul(c_bar[i], b_bar[i]);
    for (std::size_t l = 0; l < len; ++l) {
        double tap = 0.0;
        for (std::size_t i = 0; i < n; ++i) tap += w[i].real();
        kernel.taps[l] = scale * tap;
        if (l + 1 < len)
            for (std::size_t i = 0; i < n; ++i) w[i] = cmul(w[i], lambda_bar[i]);
    }
    return kernel;
}

RealVector fft_convolve(const RealVector& u, const SisoKernel& kernel) {
    const std::size_t len = u.size();
    if (kernel.taps.size() != len)
        throw std::invalid_argument("fft_convolve: kernel length must equal signal length");
    std::size_t padded = 1;
    while (padded < 2 * len) padded <<= 1;

    ComplexVector fu(padded), fk(padded);
    for (std::size_t i = 0; i < len; ++i) {
        fu[i] = u[i];
        fk[i] = kernel.taps[i];
    }
    fu = dft(fu);
    fk = dft(fk);
    for (std::size_t i = 0; i < padded; ++i) fu[i] = cmul(fu[i], fk[i]);
    fu = dft(fu, /*inverse=*/true);

    RealVector y(len);
    for (std::size_t i = 0; i < len; ++i) y[i] = fu[i].real();
    return y;
}

double siso_conv_vs_scan(const ComplexVector& lambda_bar, const ComplexVector& b_bar,
                         const ComplexVector& c_bar, const RealVector& u) {
    const std::size_t len = u.size();
    const std::size_t n = lambda_bar.size();

    const SisoKernel kernel = materialize_kernel(lambda_bar, b_bar, c_bar, len);
    const RealVector y_conv = fft_convolve(u, kernel);

    ElementSequence elems(len, n);
    for (std::size_t k = 0; k < len; ++k) {
        auto a = elems.a(k);
        auto bu = elems.bu(k);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = lambda_bar[i];
            bu[i] = b_bar[i] * u[k];
        }
    }
    const StateSequence xs = sequential_scan(elems);

    double dev = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const cplx* x = xs.row(k).data();
        double y = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            y += c_bar[i].real() * x[i].real() - c_bar[i].imag() * x[i].imag();
        dev = std::max(dev, std::abs(y - y_conv[k]));
    }
    return dev;
}

}  // namespace s5
