#include "s5/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "s5/discretize.hpp"
#include "s5/hippo.hpp"
#include "s5/rng.hpp"
#include "s5/scan.hpp"

namespace s5 {

namespace {

// Dense ZOH through the eigenbasis of a normal matrix:
// A_bar = V e^{Lambda d} V^H, B_bar = V diag(phi) V^H B, phi = (e^{ld}-1)/l.
// Exactly consistent with the diagonalized path.
struct DenseDiscrete {
    RealMatrix a_bar;
    RealMatrix b_bar;
};

DenseDiscrete dense_zoh(const DiagonalizedHippo& diag, const RealMatrix& b, double delta) {
    const std::size_t n = diag.lambda.size();
    ComplexMatrix lbar_vh = conj_transpose(diag.v);
    ComplexMatrix phi_vh = lbar_vh;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx lbar = std::exp(diag.lambda[i] * delta);
        const cplx phi = detail::zoh_input_scale(diag.lambda[i], delta);
        for (std::size_t k = 0; k < n; ++k) {
            lbar_vh.at(i, k) = cmul(lbar, lbar_vh.at(i, k));
            phi_vh.at(i, k) = cmul(phi, phi_vh.at(i, k));
        }
    }
    const ComplexMatrix a_bar_c = matmul(diag.v, lbar_vh);
    const ComplexMatrix b_bar_c = matmul(diag.v, matmul(phi_vh, to_complex(b)));

    DenseDiscrete out{RealMatrix(n, n), RealMatrix(n, b.cols)};
    for (std::size_t i = 0; i < a_bar_c.data.size(); ++i) out.a_bar.data[i] = a_bar_c.data[i].real();
    for (std::size_t i = 0; i < b_bar_c.data.size(); ++i) out.b_bar.data[i] = b_bar_c.data[i].real();
    return out;
}

RealVector dense_step(const RealMatrix& a_bar, const RealVector& x, const RealVector& forced) {
    RealVector next(forced);
    for (std::size_t i = 0; i < a_bar.rows; ++i) {
        const double* row = a_bar.row(i).data();
        double acc = 0.0;
        for (std::size_t k = 0; k < a_bar.cols; ++k) acc += row[k] * x[k];
        next[i] += acc;
    }
    return next;
}

}  // namespace

std::function<RealVector(double)> make_sinusoid_input(std::size_t h, std::uint64_t seed) {
    struct Term {
        double amp, omega, phase;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    Rng rng = Rng(seed).fork("sinusoid-input");
    terms->reserve(h * 3);
    for (std::size_t i = 0; i < h * 3; ++i)
        terms->push_back({rng.next_uniform(-1.0, 1.0), rng.next_uniform(0.0, 8.0 * std::numbers::pi),
                          rng.next_uniform(0.0, 2.0 * std::numbers::pi)});
    return [h, terms](double t) {
        RealVector u(h);
        for (std::size_t i = 0; i < h; ++i) {
            double v = 0.0;
            for (std::size_t m = 0; m < 3; ++m) {
                const Term& tm = (*terms)[i * 3 + m];
                v += tm.amp * std::sin(tm.omega * t + tm.phase);
            }
            u[i] = v;
        }
        return u;
    };
}

RealMatrix rk4_integrate(const RealMatrix& a, const RealMatrix& b,
                         const std::function<RealVector(double)>& forcing, const RealVector& x0,
                         double dt, std::size_t steps) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_integrate: dt must be positive");
    const std::size_t n = a.rows;
    if (a.cols != n || x0.size() != n || b.rows != n)
        throw std::invalid_argument("rk4_integrate: shape mismatch");

    auto deriv = [&](const RealVector& x, const RealVector& u, RealVector& out) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* arow = a.row(i).data();
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += arow[k] * x[k];
            const double* brow = b.row(i).data();
            for (std::size_t k = 0; k < b.cols; ++k) acc += brow[k] * u[k];
            out[i] = acc;
        }
    };

    RealMatrix traj(steps + 1, n);
    RealVector x = x0;
    std::copy(x.begin(), x.end(), traj.row(0).begin());
    RealVector k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        const RealVector u0 = forcing(t);
        const RealVector uh = forcing(t + 0.5 * dt);
        const RealVector u1 = forcing(t + dt);
        deriv(x, u0, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        deriv(tmp, uh, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        deriv(tmp, uh, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
        deriv(tmp, u1, k4);
        for (std::size_t i = 0; i < n; ++i)
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!all_finite(std::span<const double>(x)))
            throw std::runtime_error("rk4_integrate: trajectory diverged at step " + std::to_string(s));
        std::copy(x.begin(), x.end(), traj.row(s + 1).begin());
    }
    return traj;
}

Prop2Report prop2_check(std::size_t n, std::size_t h, std::size_t len, std::uint64_t seed) {
    if (n == 0 || h == 0 || len == 0) throw std::invalid_argument("prop2_check: sizes must be >= 1");
    Rng rng(seed);
    Rng rng_b = rng.fork("prop2-B");
    Rng rng_c = rng.fork("prop2-C");
    Rng rng_u = rng.fork("prop2-u");
    Rng rng_d = rng.fork("prop2-delta");

    const RealMatrix a_normal = make_hippo_normal(n);
    const DiagonalizedHippo diag = diagonalize_normal(a_normal);
    const double delta = rng_d.next_uniform(0.01, 0.1);

    RealMatrix b(n, h), c(h, n);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& x : b.data) x = sigma * rng_b.next_gaussian();
    for (double& x : c.data) x = sigma * rng_c.next_gaussian();
    RealMatrix u(len, h);
    for (double& x : u.data) x = rng_u.next_gaussian();

    // MIMO path through the diagonalized system.
    const ComplexMatrix b_tilde = matmul(conj_transpose(diag.v), to_complex(b));
    const ComplexMatrix c_tilde = matmul(to_complex(c), diag.v);
    const DiscreteDiagSSM disc = zoh(diag.lambda, b_tilde, RealVector(n, delta));
    ElementSequence elems(len, n);
    detail::fill_forcing(disc, u, elems);
    const StateSequence xs = sequential_scan(elems);

    // Tied SISO bank through the dense discretization.
    const DenseDiscrete dense = dense_zoh(diag, b, delta);
    std::vector<RealVector> bank_states(h, RealVector(n, 0.0));
    Prop2Report report;
    RealVector forced(n);
    for (std::size_t k = 0; k < len; ++k) {
        RealVector state_sum(n, 0.0);
        RealVector y_equiv(h, 0.0);
        for (std::size_t sys = 0; sys < h; ++sys) {
            for (std::size_t i = 0; i < n; ++i) forced[i] = dense.b_bar.at(i, sys) * u.at(k, sys);
            bank_states[sys] = dense_step(dense.a_bar, bank_states[sys], forced);
            for (std::size_t i = 0; i < n; ++i) state_sum[i] += bank_states[sys][i];
            for (std::size_t row = 0; row < h; ++row) {
                const double* crow = c.row(row).data();
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += crow[i] * bank_states[sys][i];
                y_equiv[row] += acc;
            }
        }
        // y from the MIMO system and its dense state V x_tilde.
        const cplx* xt = xs.row(k).data();
        for (std::size_t row = 0; row < h; ++row) {
            double y = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                y += c_tilde.at(row, i).real() * xt[i].real() -
                     c_tilde.at(row, i).imag() * xt[i].imag();
            report.output_residual = std::max(report.output_residual, std::abs(y - y_equiv[row]));
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx xi{};
            for (std::size_t p = 0; p < n; ++p) xi = cfma(diag.v.at(i, p), xt[p], xi);
            report.state_sum_residual =
                std::max(report.state_sum_residual, std::abs(xi.real() - state_sum[i]));
        }
    }
    return report;
}

double blockdiag_check(std::size_t r, std::size_t j, std::size_t h, std::size_t len,
                       std::uint64_t seed) {
    if (r == 0 || j == 0 || h == 0 || len == 0)
        throw std::invalid_argument("blockdiag_check: sizes must be >= 1");
    Rng rng(seed);
    Rng rng_b = rng.fork("blockdiag-B");
    Rng rng_c = rng.fork("blockdiag-C");
    Rng rng_u = rng.fork("blockdiag-u");
    Rng rng_d = rng.fork("blockdiag-delta");

    const std::size_t p = r * j;
    const DiagonalizedHippo block = diagonalize_normal(make_hippo_normal(r));

    RealMatrix b(p, h), c(h, p);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(p));
    for (double& x : b.data) x = sigma * rng_b.next_gaussian();
    for (double& x : c.data) x = sigma * rng_c.next_gaussian();
    RealMatrix u(len, h);
    for (double& x : u.data) x = rng_u.next_gaussian();
    RealVector block_delta(j);
    for (double& x : block_delta) x = rng_d.next_uniform(0.01, 0.1);

    // Full system: J HiPPO-N blocks on the diagonal, per-block timescales.
    DiagonalizedHippo full = block_diag_hippo(p, j);
    RealVector delta_full(p);
    for (std::size_t blk = 0; blk < j; ++blk)
        for (std::size_t i = 0; i < r; ++i) delta_full[blk * r + i] = block_delta[blk];
    const ComplexMatrix b_tilde = matmul(conj_transpose(full.v), to_complex(b));
    const ComplexMatrix c_tilde = matmul(to_complex(c), full.v);
    const DiscreteDiagSSM disc = zoh(full.lambda, b_tilde, delta_full);
    ElementSequence elems(len, p);
    detail::fill_forcing(disc, u, elems);
    const StateSequence xs = sequential_scan(elems);

    RealMatrix y_full(len, h);
    for (std::size_t k = 0; k < len; ++k) {
        const cplx* xt = xs.row(k).data();
        for (std::size_t row = 0; row < h; ++row) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p; ++i)
                acc += c_tilde.at(row, i).real() * xt[i].real() -
                       c_tilde.at(row, i).imag() * xt[i].imag();
            y_full.at(k, row) = acc;
        }
    }

    // Sum of J independent R-state subsystems (rows/cols sliced from B and C).
    RealMatrix y_sum(len, h);
    for (std::size_t blk = 0; blk < j; ++blk) {
        RealMatrix b_j(r, h);
        RealMatrix c_j(h, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t col = 0; col < h; ++col) b_j.at(i, col) = b.at(blk * r + i, col);
        for (std::size_t row = 0; row < h; ++row)
            for (std::size_t i = 0; i < r; ++i) c_j.at(row, i) = c.at(row, blk * r + i);

        const ComplexMatrix bt_j = matmul(conj_transpose(block.v), to_complex(b_j));
        const ComplexMatrix ct_j = matmul(to_complex(c_j), block.v);
        const DiscreteDiagSSM disc_j = zoh(block.lambda, bt_j, RealVector(r, block_delta[blk]));
        ElementSequence elems_j(len, r);
        detail::fill_forcing(disc_j, u, elems_j);
        const StateSequence xs_j = sequential_scan(elems_j);
        for (std::size_t k = 0; k < len; ++k) {
            const cplx* xt = xs_j.row(k).data();
            for (std::size_t row = 0; row < h; ++row) {
                double acc = 0.0;
                for (std::size_t i = 0; i < r; ++i)
                    acc += ct_j.at(row, i).real() * xt[i].real() -
                           ct_j.at(row, i).imag() * xt[i].imag();
                y_sum.at(k, row) += acc;
            }
        }
    }

    double residual = 0.0;
    for (std::size_t i = 0; i < y_full.data.size(); ++i)
        residual = std::max(residual, std::abs(y_full.data[i] - y_sum.data[i]));
    return residual;
}

ConvergenceReport corollary1_check(const std::vector<std::size_t>& n_values, std::size_t h,
                                   double t_final, std::size_t steps, std::uint64_t seed) {
    if (n_values.empty()) throw std::invalid_argument("corollary1_check: no N values");
    for (std::size_t i = 1; i < n_values.size(); ++i)
        if (n_values[i] <= n_values[i - 1])
            throw std::invalid_argument("corollary1_check: N values must be ascending");

    const auto input = make_sinusoid_input(h, seed);
    const double dt = t_final / static_cast<double>(steps);

    ConvergenceReport report;
    report.n_values = n_values;
    report.input_seed = seed;
    for (std::size_t n : n_values) {
        const HippoLegs legs = make_hippo_legs(n);
        const RealMatrix a_normal = make_hippo_normal(n);
        // B_LegS: H copies of the SISO input vector.
        RealMatrix b_full(n, h), b_half(n, h);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t col = 0; col < h; ++col) {
                b_full.at(i, col) = legs.b[i];
                b_half.at(i, col) = 0.5 * legs.b[i];
            }
        RealVector x0(n, 0.0);
        RealMatrix traj_legs, traj_normal;
        try {
            traj_legs = rk4_integrate(legs.a, b_full, input, x0, dt, steps);
            traj_normal = rk4_integrate(a_normal, b_half, input, x0, dt, steps);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("corollary1_check: N=" + std::to_string(n) + ": " + e.what());
        }
        const std::size_t k_coords = std::min<std::size_t>(8, n);
        double worst = 0.0;
        for (std::size_t s = 0; s <= steps; ++s) {
            double sq = 0.0;
            for (std::size_t i = 0; i < k_coords; ++i) {
                const double diff = traj_legs.at(s, i) - traj_normal.at(s, i);
                sq += diff * diff;
            }
            worst = std::max(worst, std::sqrt(sq));
        }
        report.discrepancies.push_back(worst);
    }
    return report;
}

}  // namespace s5
