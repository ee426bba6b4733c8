#include "s5/scan.hpp"

#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace s5 {

ElementSequence ElementSequence::from_elements(const std::vector<ScanElement>& elems) {
    if (elems.empty()) throw std::invalid_argument("ElementSequence: empty element list");
    const std::size_t dim = elems.front().a.size();
    ElementSequence out(elems.size(), dim);
    for (std::size_t k = 0; k < elems.size(); ++k) {
        if (elems[k].a.size() != dim || elems[k].bu.size() != dim)
            throw std::invalid_argument("ElementSequence: inconsistent element dimensions");
        std::copy(elems[k].a.begin(), elems[k].a.end(), out.a(k).begin());
        std::copy(elems[k].bu.begin(), elems[k].bu.end(), out.bu(k).begin());
    }
    return out;
}

ScanElement scan_binop(const ScanElement& e_i, const ScanElement& e_j) {
    const std::size_t n = e_i.a.size();
    if (e_i.bu.size() != n || e_j.a.size() != n || e_j.bu.size() != n)
        throw std::invalid_argument("scan_binop: element lengths differ");
    ScanElement out{ComplexVector(n), ComplexVector(n)};
    for (std::size_t p = 0; p < n; ++p) {
        out.a[p] = cmul(e_j.a[p], e_i.a[p]);
        out.bu[p] = cfma(e_j.a[p], e_i.bu[p], e_j.bu[p]);
    }
    return out;
}

namespace {

// Scan [begin, end) seeded with carry (carry = state entering the range),
// writing states into out. carry may alias nothing; updated in place.
void scan_range(const ElementSequence& elems, std::size_t begin, std::size_t end,
                cplx* carry, StateSequence& out) {
    const std::size_t dim = elems.dim();
    for (std::size_t k = begin; k < end; ++k) {
        const cplx* a = elems.a(k).data();
        const cplx* bu = elems.bu(k).data();
        cplx* x = out.row(k).data();
        for (std::size_t p = 0; p < dim; ++p) {
            carry[p] = cfma(a[p], carry[p], bu[p]);
            x[p] = carry[p];
        }
    }
}

// Unseeded chunk summary: cumulative transition product and local final state.
void summarize_range(const ElementSequence& elems, std::size_t begin, std::size_t end,
                     cplx* a_prod, cplx* x_local) {
    const std::size_t dim = elems.dim();
    for (std::size_t p = 0; p < dim; ++p) {
        a_prod[p] = cplx(1.0, 0.0);
        x_local[p] = cplx(0.0, 0.0);
    }
    for (std::size_t k = begin; k < end; ++k) {
        const cplx* a = elems.a(k).data();
        const cplx* bu = elems.bu(k).data();
        for (std::size_t p = 0; p < dim; ++p) {
            a_prod[p] = cmul(a[p], a_prod[p]);
            x_local[p] = cfma(a[p], x_local[p], bu[p]);
        }
    }
}

void run_tasks(std::size_t n_tasks, std::size_t workers, const std::function<void(std::size_t)>& task) {
    if (n_tasks == 0) return;
    const std::size_t n_threads = std::min(workers, n_tasks);
    if (n_threads <= 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) task(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t t = w; t < n_tasks; t += n_threads) task(t);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

StateSequence sequential_scan(const ElementSequence& elems) {
    if (elems.length() == 0) throw std::invalid_argument("sequential_scan: empty input");
    StateSequence out(elems.length(), elems.dim());
    ComplexVector carry(elems.dim(), cplx(0.0, 0.0));
    scan_range(elems, 0, elems.length(), carry.data(), out);
    return out;
}

StateSequence parallel_scan(const ElementSequence& elems, std::size_t workers) {
    if (elems.length() == 0) throw std::invalid_argument("parallel_scan: empty input");
    if (workers == 0) throw std::invalid_argument("parallel_scan: workers must be >= 1");
    const std::size_t chunk = (elems.length() + workers - 1) / workers;
    return parallel_scan(elems, workers, chunk);
}

StateSequence parallel_scan(const ElementSequence& elems, std::size_t workers, std::size_t chunk) {
    const std::size_t len = elems.length();
    const std::size_t dim = elems.dim();
    if (len == 0) throw std::invalid_argument("parallel_scan: empty input");
    if (workers == 0 || chunk == 0) throw std::invalid_argument("parallel_scan: workers and chunk must be >= 1");

    const std::size_t n_chunks = (len + chunk - 1) / chunk;
    StateSequence out(len, dim);
    if (n_chunks == 1) {
        ComplexVector carry(dim, cplx(0.0, 0.0));
        scan_range(elems, 0, len, carry.data(), out);
        return out;
    }

    // Pass 1: unseeded summaries of every chunk but the last (the last chunk's
    // summary feeds nothing).
    ComplexVector a_prods((n_chunks - 1) * dim);
    ComplexVector x_locals((n_chunks - 1) * dim);
    run_tasks(n_chunks - 1, workers, [&](std::size_t c) {
        summarize_range(elems, c * chunk, std::min((c + 1) * chunk, len),
                        a_prods.data() + c * dim, x_locals.data() + c * dim);
    });

    // Exclusive combine of the chunk summaries: carries[c] is the state
    // entering chunk c. Serial over chunks, O(n_chunks * P).
    ComplexVector carries(n_chunks * dim, cplx(0.0, 0.0));
    for (std::size_t c = 1; c < n_chunks; ++c) {
        const cplx* prev = carries.data() + (c - 1) * dim;
        const cplx* ap = a_prods.data() + (c - 1) * dim;
        const cplx* xl = x_locals.data() + (c - 1) * dim;
        cplx* cur = carries.data() + c * dim;
        for (std::size_t p = 0; p < dim; ++p) cur[p] = cfma(ap[p], prev[p], xl[p]);
    }

    // Pass 2: seeded rescan of every chunk.
    run_tasks(n_chunks, workers, [&](std::size_t c) {
        ComplexVector carry(carries.begin() + c * dim, carries.begin() + (c + 1) * dim);
        scan_range(elems, c * chunk, std::min((c + 1) * chunk, len), carry.data(), out);
    });
    return out;
}

namespace detail {

void fill_forcing(const DiscreteDiagSSM& disc, const RealMatrix& u, ElementSequence& out) {
    const std::size_t len = u.rows;
    const std::size_t dim = disc.state_dim();
    const std::size_t feats = disc.feature_dim();
    const PlanarMatrix b = PlanarMatrix::from(disc.b_tilde);
    for (std::size_t k = 0; k < len; ++k) {
        // m = B_tilde u_k, then bu = input_scale ⊙ m
        cplx* bu = out.bu(k).data();
        const double* urow = u.row(k).data();
        for (std::size_t p = 0; p < dim; ++p) {
            const double* br = b.re.row(p).data();
            const double* bi = b.im.row(p).data();
            double re = 0.0, im = 0.0;
            for (std::size_t h = 0; h < feats; ++h) {
                re += br[h] * urow[h];
                im += bi[h] * urow[h];
            }
            bu[p] = cplx(re, im);
        }
        const cplx* scale = disc.time_varying ? disc.input_scale_steps.row(k).data()
                                              : disc.input_scale.data();
        const cplx* lbar = disc.time_varying ? disc.lambda_bar_steps.row(k).data()
                                             : disc.lambda_bar.data();
        cplx* a = out.a(k).data();
        for (std::size_t p = 0; p < dim; ++p) {
            bu[p] = cmul(scale[p], bu[p]);
            a[p] = lbar[p];
        }
    }
}

}  // namespace detail

RealMatrix apply_ssm(const DiscreteDiagSSM& disc, const ComplexMatrix& c_tilde,
                     const RealVector& d, const RealMatrix& u, bool conj_sym,
                     std::size_t workers) {
    const std::size_t len = u.rows;
    const std::size_t feats = u.cols;
    const std::size_t dim = disc.state_dim();
    if (len == 0) throw std::invalid_argument("apply_ssm: empty input sequence");
    if (feats != disc.feature_dim()) throw std::invalid_argument("apply_ssm: feature width mismatch");
    if (c_tilde.rows != feats || c_tilde.cols != dim)
        throw std::invalid_argument("apply_ssm: C_tilde shape mismatch");
    if (d.size() != feats) throw std::invalid_argument("apply_ssm: D length mismatch");
    if (disc.time_varying && disc.steps() != len)
        throw std::invalid_argument("apply_ssm: per-step parameter count does not match L");

    ElementSequence elems(len, dim);
    detail::fill_forcing(disc, u, elems);
    const StateSequence xs = parallel_scan(elems, workers);

    const double scale = conj_sym ? 2.0 : 1.0;
    const PlanarMatrix c = PlanarMatrix::from(c_tilde);
    RealVector xr(dim), xi(dim);
    RealMatrix y(len, feats);
    for (std::size_t k = 0; k < len; ++k) {
        const cplx* x = xs.row(k).data();
        for (std::size_t p = 0; p < dim; ++p) {
            xr[p] = x[p].real();
            xi[p] = x[p].imag();
        }
        const double* urow = u.row(k).data();
        double* yrow = y.row(k).data();
        for (std::size_t h = 0; h < feats; ++h) {
            const double* cr = c.re.row(h).data();
            const double* ci = c.im.row(h).data();
            double acc = 0.0;
            for (std::size_t p = 0; p < dim; ++p) acc += cr[p] * xr[p] - ci[p] * xi[p];
            yrow[h] = scale * acc + d[h] * urow[h];
        }
    }
    return y;
}

}  // namespace s5
