#pragma once

#include "relaxwave/medium.hpp"
#include "relaxwave/numeric.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace relaxwave {

// Point in the transformed (hodograph) frame.
struct FramePoint {
    double X = 0.0;
    double T1 = 0.0;
    double T2 = 0.0;
};

// Real solitary-wave parameter record. Invariants: K > 0, v = v1+v2 < 0,
// dispersion (K + alpha)(omega1 + omega2) + 1 = 0 to 1e-12, omega_i = K v_i.
struct SolitonReal {
    double K = 0.0;
    double omega1 = 0.0, omega2 = 0.0;
    double v1 = 0.0, v2 = 0.0;
    double theta0 = 0.0;
    double alpha_tilde = 0.0;
    double x0_tilde = 0.0, y0_tilde = 0.0;

    double v() const { return v1 + v2; }
    double omega() const { return omega1 + omega2; }
    double theta(const FramePoint& p) const {
        return K * p.X - omega1 * p.T1 - omega2 * p.T2 + theta0;
    }

    nlohmann::json to_json() const;
    static SolitonReal from_json(const nlohmann::json& j); // validates invariants
};

// Positive root of K^2 + alpha*K = 1/|v| in the cancellation-free form
// K = (2/|v|) / (alpha + sqrt(alpha^2 + 4/|v|)).
double solve_dispersion(double alpha_tilde, double v);
// The other root, -(alpha + K+). Exposed explicitly, never used by default.
double solve_dispersion_negative_branch(double alpha_tilde, double v);

// Builds a dispersion-consistent record; v1+v2 must be negative.
SolitonReal make_soliton(double alpha_tilde, double v1, double v2, double theta0 = 0.0,
                         double x0_tilde = 0.0, double y0_tilde = 0.0);

struct SolitonSample {
    double U;  // 2K sech(theta)
    double Z1; // T1 - 2K (tanh(theta) + 1)
    double Z2; // T2 - 2K (tanh(theta) + 1)
    double theta;
};
SolitonSample eval_U(const SolitonReal& s, const FramePoint& p);

// Hodograph image: x~ = Z1 + x0, y~ = Z2 + y0, t~ = X. The 1/2*integral of U^2
// along X has the closed form 2K(tanh(theta)+1) under the vanishing-tail gauge.
DimlessCoord to_physical(const SolitonReal& s, const FramePoint& p);

// Residual of the transformed field equation
//   U_XT1 + U_XT2 + alpha (U_T1 + U_T2) - (1 + phi1 + phi2) U,
// with the nonlocal accumulators phi_i = -int_{-inf}^{X} U U_{T_i} dX' taken
// in closed form (phi_i = 2 K omega_i sech^2 theta).
double residual_transformed(const SolitonReal& s, const FramePoint& p); // analytic derivatives
// On dispersion-consistent parameters the residual collapses to
// 2 K alpha (omega1+omega2) sech(theta)(1 + tanh(theta)).
double residual_transformed_closed_form(const SolitonReal& s, const FramePoint& p);
// Same equation with all derivatives taken by 4th-order central differences.
double residual_transformed_fd(const SolitonReal& s, const FramePoint& p);

// ---------- complex (rotating) family ----------

struct SolitonComplex {
    Cplx K;                // K^r + i K^im
    Cplx omega1, omega2;   // omega_j^r = v_j K^r; K^im = zeta * omega_j^im
    Cplx theta0;
    double v1 = 0.0, v2 = 0.0;
    double zeta = 0.0;     // coupling ratio, 1/|v| < zeta < 2/|v|
    double alpha_tilde = 0.0;

    double amplitude() const { return 2.0 * K.real(); }
    double v() const { return v1 + v2; }
    double Omega() const { return omega1.imag() + omega2.imag(); }
    Cplx theta(const FramePoint& p) const {
        return K * p.X - omega1 * p.T1 - omega2 * p.T2 + theta0;
    }

    nlohmann::json to_json() const;
    static SolitonComplex from_json(const nlohmann::json& j);
};

struct RotatingParams {
    double K_r = 0.0;
    double Omega = 0.0;         // valid when omega_is_real
    bool omega_is_real = true;
    double omega_imag_mag = 0.0; // |Im Omega| when the radicand is negative
    double alpha_s = 0.0;        // saturation threshold (zeta|v|-1)/(|v| sqrt(zeta))
};

// Closed-form envelope wavenumber and angular frequency:
//   K^r = alpha/(zeta|v|-1),  Omega = sqrt((1 - (alpha/alpha_s)^2)/zeta).
// The ratio form makes Omega exactly 0 at alpha = alpha_s. Long-double inputs
// so decimal parameters survive the zeta|v|-1 cancellation at full precision.
RotatingParams rotating_parameters(long double alpha_tilde, long double zeta, long double v);

SolitonComplex make_rotating_soliton(double alpha_tilde, double zeta, double v1, double v2,
                                     Cplx theta0 = 0.0);
// Embeds a real record with zero imaginary parts (zeta set mid-range).
SolitonComplex complex_from_real(const SolitonReal& s);

struct SolitonSampleComplex {
    Cplx Q;      // A e^{i theta^im} sech(theta^r), A = 2 K^r
    double Z1, Z2;
    double theta_r, theta_im;
};
SolitonSampleComplex eval_Q(const SolitonComplex& s, const FramePoint& p);

DimlessCoord to_physical(const SolitonComplex& s, const FramePoint& p);

// Residuals of the coupled transformed system on the complex profile:
//   field_eq   : the envelope equation's residual (real part = Q^r equation,
//                imaginary part = Q^im equation); the bracket is
//                (Z1_T1 + Z2_T2 - 1) = 1 + phi1 + phi2, matching the real case
//   aux1, aux2 : Z1_XT1 + (Q^r Q^r_T1 + Q^im Q^im_T1) and the Z2/T2 analogue
//                (identically zero on the closed-form profile)
//   field_eq_closed: Q * [(K^im Omega - K^r w^r - 1) + alpha w^r tanh
//                        + i((K^im w^r + K^r Omega) tanh - alpha Omega)],
//                w^r = Re(omega1+omega2) — the algebraic collapse of field_eq
struct ComplexResiduals {
    Cplx field_eq;
    Cplx field_eq_closed;
    double aux1, aux2;
};
ComplexResiduals residual_transformed_complex(const SolitonComplex& s, const FramePoint& p);

// Numeric solution of the complex dispersion relation under the constraints
// omega_j^r = v_j K^r, K^im = zeta omega_1^im = zeta omega_2^im; reduces to a
// 2-unknown real system in (K^r, K^im) solved by damped Newton from multiple
// starts. Returns every distinct root found in the search box.
struct ComplexDispersionBranch {
    Cplx K, omega1, omega2;
    double residual;   // |(K+alpha)(omega1+omega2)+1|
    std::string kind;  // "real-positive" | "real-negative" | "oscillatory"
};
struct ComplexDispersionResult {
    std::vector<ComplexDispersionBranch> branches;
    bool found = false;
    double best_residual = 0.0; // final residual of the best failed attempt
    // Side-by-side comparison against the closed-form rotating parameters;
    // agreement is reported, never asserted.
    std::optional<double> K_r_closed_form, Omega_closed_form;  // only inside the zeta window
    std::optional<double> K_r_root_finder, Omega_root_finder;  // oscillatory branch, if found
};
ComplexDispersionResult solve_complex_dispersion(double alpha_tilde, double zeta, double v1,
                                                 double v2);

// ---------- physical-frame residuals ----------

enum class PhysicalForm {
    SecondOrder,         // full second-order-in-time equation
    SecondOrderFactored, // with the unidirectional factorization of the linear part
    QuadraticFreeReduced,
    MixedReduced,
    ComplexReduced,
};

// Coefficient set of the second-order physical equation; unlike MediumParams
// this permits alpha_f = a_f = 0 so the linearized equation is expressible.
struct SecondOrderCoefficients {
    double v_f = 1.0;
    double alpha_f = 0.0;
    double a_f = 0.0;
    double beta_f = 0.0;
    double gamma_f = 0.0;
    static SecondOrderCoefficients from_medium(const MediumParams& m);
};

// Pointwise residual of the selected physical-frame equation on an arbitrary
// twice-differentiable field (real equations return an ~real complex value).
Cplx residual_physical(const AnalyticField& field, const SecondOrderCoefficients& c,
                       const DimlessCoord& p, PhysicalForm form);
Cplx residual_physical(const AnalyticField& field, double alpha_tilde, const DimlessCoord& p,
                       PhysicalForm form);

// Cubic-case hodograph image x~ = T'1 + 1/2 int_{-inf}^{X'} (U^2 + 2U) dS + x0.
// U_line samples the field along the integration line at fixed (T'1, T'2).
// No closed form is assumed: adaptive quadrature over a window grown until the
// tail contribution is negligible; a non-decaying tail raises NumericError.
DimlessCoord to_physical_cubic(const std::function<double(double)>& U_line, const FramePoint& p,
                               double x0_tilde = 0.0, double y0_tilde = 0.0);

// Residual scan along theta at T1 = T2 = 0 (X swept), CSV columns pinned as
// "theta,U,residual,closed_form_residual".
void write_residual_scan_csv(std::ostream& os, const SolitonReal& s, double theta_min,
                             double theta_max, int n);

} // namespace relaxwave
