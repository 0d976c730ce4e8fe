#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace relaxwave {

using Cplx = std::complex<double>;

// Value and derivatives of a scalar field at one point of a 3-coordinate
// frame (x, y, t) — or (x_tilde, y_tilde, t_tilde), the structs are shared.
// Complex-valued so plane waves and the complex reduced equation fit; real
// fields simply carry zero imaginary parts.
struct Jet2 {
    Cplx f{};
    Cplx fx{}, fy{}, ft{};
    Cplx fxx{}, fxy{}, fyy{}, fxt{}, fyt{}, ftt{};
};

using AnalyticField = std::function<Jet2(double, double, double)>;
using ScalarFn = std::function<Cplx(double, double, double)>;

// Builds a Jet2 evaluator from a value-only callable using 4th-order central
// differences, step h = eps^(1/6) * scale. Throws NumericError naming the
// stencil if any estimate is non-finite.
AnalyticField fd_field(ScalarFn f);

// Adaptive Gauss-Kronrod integral of f over [a, b] to the given tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

struct RootResult {
    double x = 0;
    int iterations = 0;
    bool converged = false;
    double bracket_lo = 0, bracket_hi = 0; // final bracket state
};

// Newton iteration confined to a bracket [lo, hi] with f(lo), f(hi) of
// opposite sign; bisection step whenever Newton leaves the bracket.
RootResult newton_bracketed(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double lo, double hi, double tol, int max_iter = 100);

struct Root2d {
    double x = 0, y = 0;
    double residual = 0;
    bool converged = false;
};

// Damped 2D Newton with finite-difference Jacobian from one starting point.
Root2d newton2d(const std::function<void(double, double, double&, double&)>& f,
                double x0, double y0, double tol, int max_iter = 60);

// Runs fn(i) for i in [0, n). Worker count is capped by hardware concurrency
// and by the RELAXWAVE_THREADS environment variable. Results must be written
// to pre-allocated slots; iteration order is unspecified but coverage and
// determinism of per-index work are guaranteed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Number of representable doubles strictly between a and b (saturates at cap).
int ulp_distance(double a, double b, int cap = 1 << 20);

} // namespace relaxwave
