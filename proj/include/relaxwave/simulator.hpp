#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

namespace relaxwave {

enum class EvolutionCase { QuadraticFree, Mixed, Transformed };

const char* to_string(EvolutionCase c);

// Periodic method-of-lines state. `values` holds u on s in [-L/2, L/2) for the
// physical cases (coord = t), or W on T for the transformed march (coord = X);
// `aux` carries the accumulator field of the transformed system.
struct WaveGrid {
    int n = 0;
    double L = 0.0;
    std::vector<double> values;
    std::vector<double> aux;
    double coord = 0.0;
    EvolutionCase case_tag = EvolutionCase::QuadraticFree;
    double alpha_tilde = 0.0;
};

WaveGrid make_grid(int n, double L, EvolutionCase c, double alpha_tilde);

// Nodes of the periodic grid: -L/2 + j L/n.
std::vector<double> grid_nodes(int n, double L);

// Spectral derivative and zero-mean antiderivative on the periodic grid. The
// antiderivative requires |mean| <= 1e-12 * rms; both zero the Nyquist bin.
std::vector<double> spectral_derivative(const std::vector<double>& f, double L);
std::vector<double> inverse_derivative(const std::vector<double>& f, double L);

double grid_mean(const std::vector<double>& f);
double grid_energy(const WaveGrid& g);  // 0.5 * integral of values^2

// Stability heuristic for the physical cases: 0.5 (L/n) / max(1, max|u|^2).
double default_dt(const WaveGrid& g);

struct SnapshotSink {
    int every = 0;  // 0 disables; otherwise fires at step 0 and every-th step
    std::function<void(const WaveGrid&, int step)> fn;
};

struct EnergyStats {
    std::vector<double> t, E;
};

// Right-hand sides, exposed for perturbative cross-checks.
std::vector<double> physical_rhs(const WaveGrid& g);
std::pair<std::vector<double>, std::vector<double>> transformed_rhs(const WaveGrid& g);

WaveGrid evolve_physical(WaveGrid g, double dt, int steps, const SnapshotSink& snap = {},
                         EnergyStats* stats = nullptr);
WaveGrid evolve_transformed(WaveGrid g, double dX, int steps, const SnapshotSink& snap = {},
                            std::ostream* warn = nullptr);

// Exact travelling profile of the transformed system and its accumulator:
// W = 2 K sech(theta), Phi = -K omega sech^2(theta), theta = K X - (omega/2) T
// + theta0.
WaveGrid make_transformed_soliton_state(double K, double omega, double theta0, double X0, int n,
                                        double L, double alpha_tilde);

} // namespace relaxwave
