#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "relaxwave/errors.hpp"
#include "relaxwave/simulator.hpp"

using namespace relaxwave;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Band-limited, mean-free random field on the periodic grid.
std::vector<double> smooth_field(int n, double L, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    const auto s = grid_nodes(n, L);
    for (int k = 1; k <= 5; ++k) {
        const double a = amp(rng), b = amp(rng);
        for (int i = 0; i < n; ++i) {
            const double ph = 2.0 * kPi * k * s[static_cast<std::size_t>(i)] / L;
            f[static_cast<std::size_t>(i)] += a * std::sin(ph) + b * std::cos(ph);
        }
    }
    const double m = grid_mean(f);
    for (double& x : f) x -= m;
    return f;
}

double dot_quad(const std::vector<double>& a, const std::vector<double>& b, double L) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * L / static_cast<double>(a.size());
}

} // namespace

TEST_CASE("grid construction and validation") {
    const WaveGrid g = make_grid(64, 20.0, EvolutionCase::QuadraticFree, 0.1);
    CHECK(g.values.size() == 64);
    CHECK(g.aux.empty());
    CHECK(g.alpha_tilde == 0.1);
    const WaveGrid t = make_grid(64, 20.0, EvolutionCase::Transformed, 0.0);
    CHECK(t.aux.size() == 64);

    const auto s = grid_nodes(4, 4.0);
    CHECK(s == std::vector<double>{-2.0, -1.0, 0.0, 1.0});

    CHECK_THROWS_AS(make_grid(48, 20.0, EvolutionCase::QuadraticFree, 0.0), ValidationError);
    CHECK_THROWS_AS(make_grid(16, 20.0, EvolutionCase::QuadraticFree, 0.0), ValidationError);
    CHECK_THROWS_AS(make_grid(64, -1.0, EvolutionCase::QuadraticFree, 0.0), ValidationError);
    CHECK_THROWS_AS(make_grid(64, 20.0, EvolutionCase::QuadraticFree, -0.1), ValidationError);
}

TEST_CASE("spectral derivative and antiderivative on band-limited data") {
    const int n = 128;
    const double L = 20.0;
    const auto s = grid_nodes(n, L);
    std::vector<double> f(n), fp(n);
    for (int i = 0; i < n; ++i) {
        const double ph = 2.0 * kPi * 3.0 * s[static_cast<std::size_t>(i)] / L;
        f[static_cast<std::size_t>(i)] = std::sin(ph);
        fp[static_cast<std::size_t>(i)] = std::cos(ph) * 2.0 * kPi * 3.0 / L;
    }
    const auto d = spectral_derivative(f, L);
    for (int i = 0; i < n; ++i)
        CHECK(d[static_cast<std::size_t>(i)] ==
              doctest::Approx(fp[static_cast<std::size_t>(i)]).epsilon(1e-12));

    // the antiderivative inverts the derivative on mean-free data
    const auto fi = inverse_derivative(d, L);
    for (int i = 0; i < n; ++i)
        CHECK(fi[static_cast<std::size_t>(i)] ==
              doctest::Approx(f[static_cast<std::size_t>(i)]).epsilon(1e-12));

    // constant input: zero derivative, but the antiderivative must refuse it
    std::vector<double> c(n, 1.0);
    const auto dc = spectral_derivative(c, L);
    for (double x : dc) CHECK(std::abs(x) < 1e-14);
    CHECK_THROWS_AS(inverse_derivative(c, L), ValidationError);
}

TEST_CASE("spectral accuracy collapses with resolution") {
    // derivative of a narrow Gaussian, compared against the analytic form
    auto err_at = [](int n) {
        const double L = 20.0, w = 0.5;
        const auto s = grid_nodes(n, L);
        std::vector<double> f(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double x = s[static_cast<std::size_t>(i)];
            f[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * w * w));
        }
        const auto d = spectral_derivative(f, L);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = s[static_cast<std::size_t>(i)];
            const double exact = -x / (w * w) * std::exp(-x * x / (2.0 * w * w));
            worst = std::max(worst, std::abs(d[static_cast<std::size_t>(i)] - exact));
        }
        return worst;
    };
    const double e64 = err_at(64), e256 = err_at(256);
    CHECK(e64 > 1e-6);
    CHECK(e64 / std::max(e256, 1e-300) > 1e2);
}

TEST_CASE("right-hand side is discretely orthogonal to the field up to damping") {
    // With the advection terms in split form and the antiderivative
    // skew-adjoint, <u, rhs> = -alpha <u, u> exactly, so the decay law holds
    // at the semi-discrete level.
    for (EvolutionCase c : {EvolutionCase::QuadraticFree, EvolutionCase::Mixed}) {
        for (unsigned seed : {1u, 2u, 3u}) {
            WaveGrid g = make_grid(128, 20.0, c, 0.37);
            g.values = smooth_field(128, 20.0, seed);
            const auto r = physical_rhs(g);
            const double uu = dot_quad(g.values, g.values, g.L);
            const double ur = dot_quad(g.values, r, g.L);
            CHECK(std::abs(ur + 0.37 * uu) < 1e-12 * std::max(1.0, uu));
        }
    }
    const WaveGrid t = make_grid(64, 20.0, EvolutionCase::Transformed, 0.0);
    CHECK_THROWS_AS(physical_rhs(t), ValidationError);
}

TEST_CASE("damped evolution obeys the closed-form energy law") {
    for (double alpha : {0.1, 0.5, 1.0}) {
        WaveGrid g = make_grid(256, 20.0, EvolutionCase::QuadraticFree, alpha);
        g.values = smooth_field(256, 20.0, 42);
        for (double& x : g.values) x *= 0.2; // keep dt = 1/256 inside the heuristic
        const double E0 = grid_energy(g);
        EnergyStats stats;
        const double dt = 1.0 / 256.0;
        const WaveGrid out = evolve_physical(std::move(g), dt, 256, {}, &stats);
        const double expect = E0 * std::exp(-2.0 * alpha * out.coord);
        CHECK(grid_energy(out) == doctest::Approx(expect).epsilon(1e-6));
        REQUIRE(stats.t.size() == 257);
        REQUIRE(stats.E.size() == 257);
        // the law holds along the whole trajectory, not just at the end
        for (std::size_t k = 64; k < stats.t.size(); k += 64)
            CHECK(stats.E[k] ==
                  doctest::Approx(E0 * std::exp(-2.0 * alpha * stats.t[k])).epsilon(1e-6));
    }
}

TEST_CASE("time stepping is fourth order") {
    auto run = [](double dt, int steps) {
        WaveGrid g = make_grid(64, 20.0, EvolutionCase::Mixed, 0.2);
        g.values = smooth_field(64, 20.0, 7);
        for (double& x : g.values) x *= 0.3;
        return evolve_physical(std::move(g), dt, steps, {}, nullptr).values;
    };
    const auto ref = run(1.0 / 1024.0, 512);
    const auto a = run(1.0 / 128.0, 64);
    const auto b = run(1.0 / 256.0, 128);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ea = std::max(ea, std::abs(a[i] - ref[i]));
        eb = std::max(eb, std::abs(b[i] - ref[i]));
    }
    const double ratio = ea / eb;
    CHECK(ratio > 8.0);   // 16 +- 50%
    CHECK(ratio < 24.0);
}

TEST_CASE("evolution guards: mean, step size, case tag") {
    WaveGrid g = make_grid(64, 20.0, EvolutionCase::QuadraticFree, 0.0);
    g.values.assign(64, 0.5); // not mean-free
    CHECK_THROWS_AS(evolve_physical(std::move(g), 1e-3, 1, {}, nullptr), ValidationError);

    WaveGrid h = make_grid(64, 20.0, EvolutionCase::QuadraticFree, 0.0);
    h.values = smooth_field(64, 20.0, 9);
    const double dt_max = default_dt(h);
    CHECK_THROWS_AS(evolve_physical(std::move(h), 2.0 * dt_max, 1, {}, nullptr),
                    ValidationError);

    WaveGrid t = make_grid(64, 20.0, EvolutionCase::Transformed, 0.0);
    CHECK_THROWS_AS(evolve_physical(std::move(t), 1e-3, 1, {}, nullptr), ValidationError);
    WaveGrid p = make_grid(64, 20.0, EvolutionCase::Mixed, 0.0);
    p.values = smooth_field(64, 20.0, 9);
    CHECK_THROWS_AS(evolve_transformed(std::move(p), 1e-3, 1, {}, nullptr), ValidationError);
}

TEST_CASE("transformed march transports the travelling profile") {
    const double K = 0.5, omega = -2.0; // dispersion-consistent pair at zero damping
    WaveGrid g = make_transformed_soliton_state(K, omega, 0.0, 0.0, 512, 80.0, 0.0);
    const double mean0 = grid_mean(g.values);
    const WaveGrid out = evolve_transformed(std::move(g), 1e-3, 500, {}, nullptr);

    CHECK(std::abs(grid_mean(out.values) - mean0) < 1e-13);

    const auto T = grid_nodes(512, 80.0);
    double linf = 0.0;
    for (int i = 0; i < 512; ++i) {
        const double th = K * out.coord - 0.5 * omega * T[static_cast<std::size_t>(i)];
        linf = std::max(linf, std::abs(out.values[static_cast<std::size_t>(i)] -
                                       2.0 * K / std::cosh(th)));
    }
    CHECK(linf < 1e-6);
}

TEST_CASE("transformed march warns once about the bracket mean and conserves mean(W)") {
    // a profile off the travelling family (K |omega| != 1) has a bracket with
    // a genuine mean, so the projection warning fires on the first step
    WaveGrid g = make_transformed_soliton_state(0.5, -3.0, 0.0, 0.0, 256, 80.0, 0.1);
    const double mean0 = grid_mean(g.values);
    std::ostringstream warn;
    const WaveGrid out = evolve_transformed(std::move(g), 1e-3, 200, {}, &warn);

    const std::string w = warn.str();
    CHECK(!w.empty());
    CHECK(std::count(w.begin(), w.end(), '\n') == 1); // once, not once per step

    // the projected march still conserves mean(W)
    CHECK(std::abs(grid_mean(out.values) - mean0) < 1e-13);
}

TEST_CASE("transformed march rejects unsupported profiles and detects blow-up") {
    // tails not contained in the window
    WaveGrid wide = make_transformed_soliton_state(0.2, -2.0, 0.0, 0.0, 64, 20.0, 0.0);
    CHECK_THROWS_AS(evolve_transformed(std::move(wide), 1e-3, 1, {}, nullptr),
                    ValidationError);

    // a huge accumulator drives exponential growth into the guard
    WaveGrid g = make_transformed_soliton_state(0.5, -2.0, 0.0, 0.0, 256, 80.0, 0.0);
    g.aux.assign(g.aux.size(), -50.0);
    bool blew = false;
    try {
        evolve_transformed(std::move(g), 0.5, 100, {}, nullptr);
    } catch (const BlowUpError& e) {
        blew = true;
        CHECK(e.peak > 0.0);
        CHECK(e.step >= 1);
    }
    CHECK(blew);
}

TEST_CASE("snapshot sink fires at step zero and the configured stride") {
    WaveGrid g = make_grid(64, 20.0, EvolutionCase::QuadraticFree, 0.0);
    g.values = smooth_field(64, 20.0, 5);
    std::vector<int> steps;
    SnapshotSink sink;
    sink.every = 8;
    sink.fn = [&](const WaveGrid&, int step) { steps.push_back(step); };
    evolve_physical(std::move(g), 1e-3, 24, sink, nullptr);
    CHECK(steps == std::vector<int>{0, 8, 16, 24});
}
