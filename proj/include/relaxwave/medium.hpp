#pragma once

#include "relaxwave/numeric.hpp"

#include <complex>

namespace relaxwave {

// Relaxing-medium description. v_e and v_f are the equilibrium and frozen
// sound speeds, tau the relaxation time; alpha_f and a_f are the quadratic
// and cubic frozen-state nonlinearity coefficients.
struct MediumParams {
    double tau = 1.0;
    double v_e = 1.0;
    double v_f = 2.0;
    double alpha_f = 0.0;
    double a_f = 1.0;
};

// Throws ValidationError unless tau > 0, 0 < v_e < v_f, alpha_f >= 0, a_f > 0.
void validate(const MediumParams& m);

struct DerivedCoefficients {
    double beta_f;  // dissipation coefficient
    double gamma_f; // low-frequency dispersion coefficient
};

// beta_f = (v_f^2 - v_e^2)/(tau v_e^2 v_f), gamma_f = (v_f^4 - v_e^4)/(2 tau^2 v_e^4 v_f^2).
DerivedCoefficients derive_coefficients(const MediumParams& m);

// Complex omega^2 of a plane wave exp(i(omega t - k1 x - k2 y)) in the
// linearized two-coordinate wave model:
//   omega^2 = v_f^2 [ (k1+k2)^2 + i beta_f (k1+k2) - gamma_f ].
std::complex<double> linear_dispersion(const MediumParams& m, double k1, double k2);

// Signed defect of the unidirectional factorization
//   (dx+dy)^2 u - v_f^{-2} u_tt  ~=  2 (dx+dy)(dx+dy + v_f^{-1} dt) u
// at one point: LHS - RHS. Zero exactly on u = f(x - v_f t + g(y - v_f t)).
std::complex<double> factorization_gap(const AnalyticField& u, const MediumParams& m,
                                       double x, double y, double t);

// Which reduced dimensionless equation a scaling targets.
enum class ReducedCase {
    QuadraticFree, // cubic self-steepening only (alpha_f plays no role)
    Mixed          // quadratic + cubic nonlinearity
};

// Affine frame map between lab coordinates (x, y, t) and the dimensionless
// co-moving frame (x_tilde, y_tilude, t_tilde), plus the field amplitude factor:
//   x_tilde = space_scale (x - v_frame t), y_tilde = space_scale (y - v_frame t),
//   t_tilde = time_scale t, u_tilde = amplitude_scale p'.
// space_scale is negative in the quadratic-free case; consumers must keep the
// sign (it encodes orientation).
struct ScalingMap {
    ReducedCase case_tag;
    double alpha_tilde;
    double space_scale;
    double time_scale;
    double amplitude_scale;
    double v_frame;
};

ScalingMap build_scaling(const MediumParams& m, ReducedCase c);

struct PhysCoord { double x, y, t; };
struct DimlessCoord { double x_tilde, y_tilde, t_tilde; };

DimlessCoord map_from_physical(const ScalingMap& sm, PhysCoord p);
PhysCoord map_to_physical(const ScalingMap& sm, DimlessCoord q);
double field_from_physical(const ScalingMap& sm, double p_prime);
double field_to_physical(const ScalingMap& sm, double u_tilde);

// Result of matching the transformed quadratic-free equation against the
// canonical reduced form. All coefficients are quoted after dividing by the
// mixed-derivative coefficient 2*space_scale*time_scale/(v_f*c).
struct AmplitudeMatch {
    double c;                 // matched amplitude factor (the consistent root)
    double alpha_tilde;       // linear-term coefficient; must equal beta_f/sqrt(6 gamma_f)
    double printed_claim;     // alpha_f * v_f^2, the source's formula (reported only)
    double cubic_target_c2;   // c^2 demanded by the cubic-term match
    double linear_coeff;      // beta_f v_f / (2 time_scale)
    double constant_coeff;    // gamma_f v_f / (2 space_scale time_scale); must be -1
};

// Determines the amplitude factor by coefficient matching rather than by the
// printed formula. Tolerates a_f = 0 on entry in order to report the
// degenerate system; throws ValidationError (with the system and best c in
// the message) when no consistent positive c exists.
AmplitudeMatch derive_amplitude_scale(const MediumParams& m);

} // namespace relaxwave
