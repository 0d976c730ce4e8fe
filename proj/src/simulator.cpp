#include "relaxwave/simulator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <ostream>

#include "relaxwave/errors.hpp"
#include "relaxwave/numfmt.hpp"

namespace relaxwave {

const char* to_string(EvolutionCase c) {
    switch (c) {
    case EvolutionCase::QuadraticFree: return "quad-free";
    case EvolutionCase::Mixed: return "mixed";
    case EvolutionCase::Transformed: return "transformed";
    }
    return "?";
}

namespace {

// One cached plan pair per grid size; FFTW_ESTIMATE keeps plan selection (and
// therefore output bits) independent of runtime measurements. All transforms
// funnel through a single mutex — runs are serial in practice and this keeps
// the shared buffers safe.
struct FftEngine {
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
};

std::mutex& fft_mutex() {
    static std::mutex m;
    return m;
}

FftEngine& engine_for(int n) {
    static std::map<int, FftEngine> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    FftEngine e;
    e.real_buf = fftw_alloc_real(static_cast<std::size_t>(n));
    e.cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    e.fwd = fftw_plan_dft_r2c_1d(n, e.real_buf, e.cplx_buf, FFTW_ESTIMATE);
    e.bwd = fftw_plan_dft_c2r_1d(n, e.cplx_buf, e.real_buf, FFTW_ESTIMATE);
    return cache.emplace(n, e).first->second;
}

std::vector<std::complex<double>> forward_fft(const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    std::lock_guard<std::mutex> lk(fft_mutex());
    FftEngine& e = engine_for(n);
    std::copy(f.begin(), f.end(), e.real_buf);
    fftw_execute(e.fwd);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = {e.cplx_buf[k][0], e.cplx_buf[k][1]};
    return out;
}

std::vector<double> backward_fft(const std::vector<std::complex<double>>& c, int n) {
    std::lock_guard<std::mutex> lk(fft_mutex());
    FftEngine& e = engine_for(n);
    for (std::size_t k = 0; k < c.size(); ++k) {
        e.cplx_buf[k][0] = c[k].real();
        e.cplx_buf[k][1] = c[k].imag();
    }
    fftw_execute(e.bwd);
    std::vector<double> out(static_cast<std::size_t>(n));
    const double inv_n = 1.0 / n;
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = e.real_buf[j] * inv_n;
    return out;
}

double rms(const std::vector<double>& f) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(s / static_cast<double>(f.size()));
}

double max_abs(const std::vector<double>& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

// Zeroes modes above frac * (n/2); the Nyquist bin always goes.
std::vector<double> dealias(const std::vector<double>& f, double frac) {
    const int n = static_cast<int>(f.size());
    auto c = forward_fft(f);
    const int kmax = static_cast<int>(frac * (n / 2));
    for (int k = 0; k <= n / 2; ++k)
        if (k > kmax || k == n / 2) c[static_cast<std::size_t>(k)] = 0.0;
    return backward_fft(c, n);
}

void subtract_mean(std::vector<double>& f) {
    const double m = grid_mean(f);
    for (double& v : f) v -= m;
}

} // namespace

std::vector<double> grid_nodes(int n, double L) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(j)] = -0.5 * L + L * j / n;
    return s;
}

double grid_mean(const std::vector<double>& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s / static_cast<double>(f.size());
}

double grid_energy(const WaveGrid& g) {
    double s = 0.0;
    for (double v : g.values) s += v * v;
    return 0.5 * s * g.L / g.n;
}

double default_dt(const WaveGrid& g) {
    const double peak = max_abs(g.values);
    return 0.5 * (g.L / g.n) / std::max(1.0, peak * peak);
}

WaveGrid make_grid(int n, double L, EvolutionCase c, double alpha_tilde) {
    if (n < 32 || (n & (n - 1)) != 0)
        throw ValidationError("make_grid: n must be a power of two >= 32, got " +
                              std::to_string(n));
    if (!(L > 0.0)) throw ValidationError("make_grid: L must be > 0");
    if (alpha_tilde < 0.0) throw ValidationError("make_grid: alpha_tilde must be >= 0");
    WaveGrid g;
    g.n = n;
    g.L = L;
    g.values.assign(static_cast<std::size_t>(n), 0.0);
    if (c == EvolutionCase::Transformed) g.aux.assign(static_cast<std::size_t>(n), 0.0);
    g.case_tag = c;
    g.alpha_tilde = alpha_tilde;
    return g;
}

std::vector<double> spectral_derivative(const std::vector<double>& f, double L) {
    const int n = static_cast<int>(f.size());
    auto c = forward_fft(f);
    const double k0 = 2.0 * M_PI / L;
    for (int k = 0; k <= n / 2; ++k) {
        if (k == n / 2) {
            c[static_cast<std::size_t>(k)] = 0.0;  // odd operator: drop the Nyquist bin
            continue;
        }
        c[static_cast<std::size_t>(k)] *= std::complex<double>(0.0, k0 * k);
    }
    return backward_fft(c, n);
}

std::vector<double> inverse_derivative(const std::vector<double>& f, double L) {
    const int n = static_cast<int>(f.size());
    const double mean = grid_mean(f);
    const double scale = rms(f);
    if (std::abs(mean) > 1e-12 * scale)
        throw ValidationError("inverse_derivative: input mean " + g17(mean) +
                              " exceeds 1e-12 of rms " + g17(scale));
    auto c = forward_fft(f);
    c[0] = 0.0;
    const double k0 = 2.0 * M_PI / L;
    for (int k = 1; k <= n / 2; ++k) {
        if (k == n / 2) {
            c[static_cast<std::size_t>(k)] = 0.0;
            continue;
        }
        c[static_cast<std::size_t>(k)] /= std::complex<double>(0.0, k0 * k);
    }
    return backward_fft(c, n);
}

namespace {

// Nonlinear advection terms in split (skew-symmetric) form. With the spectral
// derivative skew-adjoint in the discrete inner product, these forms satisfy
// <u, N(u)> = 0 exactly, so the only discrete energy drain is the -alpha u
// term — the decay law holds at the semi-discrete level, not just in the
// continuum limit.
//   u u_s          = 1/3 (u^2)_s + 1/3 u u_s
//   1/2 u^2 u_s    = 1/8 (u^3)_s + 1/8 u^2 u_s
std::vector<double> advection_terms(const std::vector<double>& u, double L, EvolutionCase tag,
                                    double frac) {
    const std::size_t n = u.size();
    const std::vector<double> ub = dealias(u, frac);
    const std::vector<double> us = spectral_derivative(ub, L);
    std::vector<double> u2(n), u3(n);
    for (std::size_t j = 0; j < n; ++j) {
        u2[j] = ub[j] * ub[j];
        u3[j] = u2[j] * ub[j];
    }
    const std::vector<double> u2s = spectral_derivative(u2, L);
    const std::vector<double> u3s = spectral_derivative(u3, L);
    std::vector<double> term(n);
    if (tag == EvolutionCase::QuadraticFree) {
        for (std::size_t j = 0; j < n; ++j) term[j] = (u3s[j] + u2[j] * us[j]) / 8.0;
    } else {
        for (std::size_t j = 0; j < n; ++j)
            term[j] = -(u2s[j] + ub[j] * us[j]) / 3.0 - (u3s[j] + u2[j] * us[j]) / 8.0;
    }
    term = dealias(term, frac);
    subtract_mean(term);
    return term;
}

std::vector<double> physical_rhs_impl(const std::vector<double>& u, double L, EvolutionCase tag,
                                      double alpha) {
    const double frac = tag == EvolutionCase::QuadraticFree ? 2.0 / 3.0 : 0.5;
    std::vector<double> rhs = advection_terms(u, L, tag, frac);
    const std::vector<double> inv = inverse_derivative(u, L);
    const double sign = tag == EvolutionCase::QuadraticFree ? 1.0 : -1.0;
    for (std::size_t j = 0; j < u.size(); ++j) rhs[j] += sign * inv[j] - alpha * u[j];
    return rhs;
}

struct TransformedRates {
    std::vector<double> dW, dPhi;
    double bracket_mean_ratio = 0.0;
};

TransformedRates transformed_rhs_impl(const std::vector<double>& W, const std::vector<double>& Phi,
                                      double L, double alpha) {
    const std::size_t n = W.size();
    const double frac = 2.0 / 3.0;
    const std::vector<double> Wb = dealias(W, frac);
    const std::vector<double> Pb = dealias(Phi, frac);
    const std::vector<double> WT = spectral_derivative(W, L);
    const std::vector<double> WbT = spectral_derivative(Wb, L);

    // bracket = -alpha W_T + (1 - 2 Phi) W / 2; the quadratic piece is formed
    // from dealiased fields and re-masked.
    std::vector<double> prod(n);
    for (std::size_t j = 0; j < n; ++j) prod[j] = Pb[j] * Wb[j];
    prod = dealias(prod, frac);
    std::vector<double> bracket(n);
    for (std::size_t j = 0; j < n; ++j) bracket[j] = -alpha * WT[j] + 0.5 * W[j] - prod[j];
    const double bm = grid_mean(bracket);
    const double br = rms(bracket);

    TransformedRates r;
    r.bracket_mean_ratio = br > 0.0 ? std::abs(bm) / br : 0.0;
    for (double& v : bracket) v -= bm;
    r.dW = inverse_derivative(bracket, L);

    r.dPhi.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.dPhi[j] = Wb[j] * WbT[j];
    r.dPhi = dealias(r.dPhi, frac);
    return r;
}

} // namespace

std::vector<double> physical_rhs(const WaveGrid& g) {
    if (g.case_tag == EvolutionCase::Transformed)
        throw ValidationError("physical_rhs: grid belongs to the transformed march");
    return physical_rhs_impl(g.values, g.L, g.case_tag, g.alpha_tilde);
}

std::pair<std::vector<double>, std::vector<double>> transformed_rhs(const WaveGrid& g) {
    if (g.case_tag != EvolutionCase::Transformed)
        throw ValidationError("transformed_rhs: grid is not a transformed-march state");
    TransformedRates r = transformed_rhs_impl(g.values, g.aux, g.L, g.alpha_tilde);
    return {std::move(r.dW), std::move(r.dPhi)};
}

WaveGrid evolve_physical(WaveGrid g, double dt, int steps, const SnapshotSink& snap,
                         EnergyStats* stats) {
    if (g.case_tag == EvolutionCase::Transformed)
        throw ValidationError("evolve_physical: grid belongs to the transformed march");
    if (steps < 0) throw ValidationError("evolve_physical: steps must be >= 0");
    const double m = grid_mean(g.values);
    if (std::abs(m) > 1e-12 * rms(g.values))
        throw ValidationError("evolve_physical: initial data must be mean-free, mean = " + g17(m));
    const double dt_max = default_dt(g);
    if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12))
        throw ValidationError("evolve_physical: dt = " + g17(dt) +
                              " violates the stability heuristic dt <= " + g17(dt_max));
    const double initial_peak = max_abs(g.values);

    auto record = [&](int step) {
        if (stats) {
            stats->t.push_back(g.coord);
            stats->E.push_back(grid_energy(g));
        }
        if (snap.every > 0 && snap.fn && step % snap.every == 0) snap.fn(g, step);
    };
    record(0);

    const std::size_t n = g.values.size();
    std::vector<double> stage(n);
    for (int step = 1; step <= steps; ++step) {
        const std::vector<double> k1 = physical_rhs_impl(g.values, g.L, g.case_tag, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j) stage[j] = g.values[j] + 0.5 * dt * k1[j];
        const std::vector<double> k2 = physical_rhs_impl(stage, g.L, g.case_tag, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j) stage[j] = g.values[j] + 0.5 * dt * k2[j];
        const std::vector<double> k3 = physical_rhs_impl(stage, g.L, g.case_tag, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j) stage[j] = g.values[j] + dt * k3[j];
        const std::vector<double> k4 = physical_rhs_impl(stage, g.L, g.case_tag, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j)
            g.values[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        g.coord += dt;

        const double peak = max_abs(g.values);
        if (initial_peak > 0.0 && peak > 1e3 * initial_peak)
            throw BlowUpError("evolve_physical: blow-up detected", step, peak);
        record(step);
    }
    return g;
}

WaveGrid evolve_transformed(WaveGrid g, double dX, int steps, const SnapshotSink& snap,
                            std::ostream* warn) {
    if (g.case_tag != EvolutionCase::Transformed)
        throw ValidationError("evolve_transformed: grid is not a transformed-march state");
    if (steps < 0) throw ValidationError("evolve_transformed: steps must be >= 0");
    if (!(dX > 0.0)) throw ValidationError("evolve_transformed: dX must be > 0");
    if (g.aux.size() != g.values.size())
        throw ValidationError("evolve_transformed: accumulator field missing");
    const double peak0 = max_abs(g.values);
    const double edge = std::max(std::abs(g.values.front()), std::abs(g.values.back()));
    if (edge >= 1e-10 * std::max(1.0, peak0))
        throw ValidationError("evolve_transformed: boundary values " + g17(edge) +
                              " too large — domain does not contain the support");

    auto record = [&](int step) {
        if (snap.every > 0 && snap.fn && step % snap.every == 0) snap.fn(g, step);
    };
    record(0);

    const std::size_t n = g.values.size();
    bool warned = false;
    std::vector<double> sW(n), sP(n);
    for (int step = 1; step <= steps; ++step) {
        const TransformedRates k1 = transformed_rhs_impl(g.values, g.aux, g.L, g.alpha_tilde);
        if (!warned && warn && k1.bracket_mean_ratio > 1e-6) {
            *warn << "evolve_transformed: bracket mean ratio " << g17(k1.bracket_mean_ratio)
                  << " exceeds 1e-6 at X = " << g17(g.coord)
                  << " — domain likely too small for the accumulated tail\n";
            warned = true;
        }
        for (std::size_t j = 0; j < n; ++j) {
            sW[j] = g.values[j] + 0.5 * dX * k1.dW[j];
            sP[j] = g.aux[j] + 0.5 * dX * k1.dPhi[j];
        }
        const TransformedRates k2 = transformed_rhs_impl(sW, sP, g.L, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j) {
            sW[j] = g.values[j] + 0.5 * dX * k2.dW[j];
            sP[j] = g.aux[j] + 0.5 * dX * k2.dPhi[j];
        }
        const TransformedRates k3 = transformed_rhs_impl(sW, sP, g.L, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j) {
            sW[j] = g.values[j] + dX * k3.dW[j];
            sP[j] = g.aux[j] + dX * k3.dPhi[j];
        }
        const TransformedRates k4 = transformed_rhs_impl(sW, sP, g.L, g.alpha_tilde);
        for (std::size_t j = 0; j < n; ++j) {
            g.values[j] += dX / 6.0 * (k1.dW[j] + 2.0 * k2.dW[j] + 2.0 * k3.dW[j] + k4.dW[j]);
            g.aux[j] += dX / 6.0 * (k1.dPhi[j] + 2.0 * k2.dPhi[j] + 2.0 * k3.dPhi[j] + k4.dPhi[j]);
        }
        g.coord += dX;

        const double peak = max_abs(g.values);
        if (peak0 > 0.0 && peak > 1e3 * peak0)
            throw BlowUpError("evolve_transformed: blow-up detected", step, peak);
        record(step);
    }
    return g;
}

WaveGrid make_transformed_soliton_state(double K, double omega, double theta0, double X0, int n,
                                        double L, double alpha_tilde) {
    WaveGrid g = make_grid(n, L, EvolutionCase::Transformed, alpha_tilde);
    g.coord = X0;
    const std::vector<double> T = grid_nodes(n, L);
    for (int j = 0; j < n; ++j) {
        const double th = K * X0 - 0.5 * omega * T[static_cast<std::size_t>(j)] + theta0;
        const double sc = 1.0 / std::cosh(th);
        g.values[static_cast<std::size_t>(j)] = 2.0 * K * sc;
        g.aux[static_cast<std::size_t>(j)] = -K * omega * sc * sc;
    }
    return g;
}

} // namespace relaxwave
