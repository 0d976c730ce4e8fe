#include "relaxwave/numeric.hpp"
#include "relaxwave/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace relaxwave {

namespace {

// Sixth root of machine eps: balances the O(h^4) stencil truncation against
// the eps/h^2 rounding of the second-derivative sums (~1e-10 either way).
constexpr double kFdH = 2.4607833005759251e-03;

double step_for(double coord) { return kFdH * std::max(1.0, std::fabs(coord)); }

void check_finite(const Cplx& v, const char* stencil, double x, double y, double t) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NumericError(std::string("non-finite derivative estimate from stencil ") + stencil +
                           " at (" + std::to_string(x) + ", " + std::to_string(y) + ", " +
                           std::to_string(t) + ")");
}

} // namespace

AnalyticField fd_field(ScalarFn f) {
    return [f = std::move(f)](double x, double y, double t) -> Jet2 {
        const double hx = step_for(x), hy = step_for(y), ht = step_for(t);

        // 4th-order central first derivative along one axis.
        auto d1 = [](auto&& g, double h) {
            return (-g(2.0) + 8.0 * g(1.0) - 8.0 * g(-1.0) + g(-2.0)) / (12.0 * h);
        };
        // 4th-order central second derivative along one axis.
        auto d2 = [](auto&& g, double h) {
            return (-g(2.0) + 16.0 * g(1.0) - 30.0 * g(0.0) + 16.0 * g(-1.0) - g(-2.0)) /
                   (12.0 * h * h);
        };

        Jet2 j;
        j.f = f(x, y, t);
        j.fx = d1([&](double s) { return f(x + s * hx, y, t); }, hx);
        j.fy = d1([&](double s) { return f(x, y + s * hy, t); }, hy);
        j.ft = d1([&](double s) { return f(x, y, t + s * ht); }, ht);
        j.fxx = d2([&](double s) { return f(x + s * hx, y, t); }, hx);
        j.fyy = d2([&](double s) { return f(x, y + s * hy, t); }, hy);
        j.ftt = d2([&](double s) { return f(x, y, t + s * ht); }, ht);
        // Mixed derivatives: outer 4th-order stencil of inner 4th-order stencils.
        auto mixed = [&](auto&& g, double ha, double hb) {
            auto inner = [&](double sa) {
                return d1([&](double sb) { return g(sa, sb); }, hb);
            };
            return d1(inner, ha);
        };
        j.fxy = mixed([&](double sa, double sb) { return f(x + sa * hx, y + sb * hy, t); }, hx, hy);
        j.fxt = mixed([&](double sa, double sb) { return f(x + sa * hx, y, t + sb * ht); }, hx, ht);
        j.fyt = mixed([&](double sa, double sb) { return f(x, y + sa * hy, t + sb * ht); }, hy, ht);

        check_finite(j.fx, "df/dx", x, y, t);
        check_finite(j.fy, "df/dy", x, y, t);
        check_finite(j.ft, "df/dt", x, y, t);
        check_finite(j.fxx, "d2f/dx2", x, y, t);
        check_finite(j.fyy, "d2f/dy2", x, y, t);
        check_finite(j.ftt, "d2f/dt2", x, y, t);
        check_finite(j.fxy, "d2f/dxdy", x, y, t);
        check_finite(j.fxt, "d2f/dxdt", x, y, t);
        check_finite(j.fyt, "d2f/dydt", x, y, t);
        return j;
    };
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double error = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 12, tol, &error);
    if (!std::isfinite(v))
        throw NumericError("quadrature produced a non-finite value");
    if (error > std::max(tol, tol * std::fabs(v)) * 100.0)
        throw NumericError("quadrature failed to reach tolerance: error estimate " +
                           std::to_string(error));
    return v;
}

RootResult newton_bracketed(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double lo, double hi, double tol, int max_iter) {
    RootResult r;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return {lo, 0, true, lo, hi};
    if (fhi == 0.0) return {hi, 0, true, lo, hi};
    if (std::signbit(flo) == std::signbit(fhi))
        throw NumericError("newton_bracketed: endpoints do not bracket a root");

    double x = 0.5 * (lo + hi);
    for (int it = 1; it <= max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0 || std::fabs(fx) < tol * 1e-3) { // residual already negligible
            r = {x, it, true, lo, hi};
            return r;
        }
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x; flo = fx;
        } else {
            hi = x; fhi = fx;
        }
        const double d = df(x);
        double next = (d != 0.0) ? x - fx / d : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi); // Newton left the bracket: bisect
        if (std::fabs(next - x) <= tol * std::max(1.0, std::fabs(next))) {
            r = {next, it, true, lo, hi};
            return r;
        }
        x = next;
    }
    r = {x, max_iter, false, lo, hi};
    return r;
}

Root2d newton2d(const std::function<void(double, double, double&, double&)>& f,
                double x0, double y0, double tol, int max_iter) {
    double x = x0, y = y0;
    double f1, f2;
    for (int it = 0; it < max_iter; ++it) {
        f(x, y, f1, f2);
        const double res = std::hypot(f1, f2);
        if (!std::isfinite(res)) return {x, y, res, false};
        if (res < tol) return {x, y, res, true};

        const double hx = 1e-7 * std::max(1.0, std::fabs(x));
        const double hy = 1e-7 * std::max(1.0, std::fabs(y));
        double a1, a2, b1, b2;
        f(x + hx, y, a1, a2);
        f(x, y + hy, b1, b2);
        const double j11 = (a1 - f1) / hx, j12 = (b1 - f1) / hy;
        const double j21 = (a2 - f2) / hx, j22 = (b2 - f2) / hy;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) return {x, y, res, false};
        double dx = (-f1 * j22 + f2 * j12) / det;
        double dy = (-j11 * f2 + j21 * f1) / det;
        // Damping: halve the step until the residual does not grow wildly.
        double scale = 1.0;
        for (int k = 0; k < 20; ++k) {
            double g1, g2;
            f(x + scale * dx, y + scale * dy, g1, g2);
            if (std::isfinite(g1) && std::isfinite(g2) && std::hypot(g1, g2) <= res * 2.0) break;
            scale *= 0.5;
        }
        x += scale * dx;
        y += scale * dy;
    }
    f(x, y, f1, f2);
    return {x, y, std::hypot(f1, f2), std::hypot(f1, f2) < tol};
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RELAXWAVE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) workers = std::min<std::size_t>(workers, (std::size_t)cap);
    }
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<bool> failed{false};
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load())
        throw NumericError("parallel_for: a worker threw; rerun single-threaded for details");
}

int ulp_distance(double a, double b, int cap) {
    if (a == b) return 0;
    int n = 0;
    while (a != b && n < cap) {
        a = std::nextafter(a, b);
        ++n;
    }
    return n;
}

} // namespace relaxwave
