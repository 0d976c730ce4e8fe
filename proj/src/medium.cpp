#include "relaxwave/medium.hpp"
#include "relaxwave/errors.hpp"
#include "relaxwave/numfmt.hpp"

#include <cmath>

namespace relaxwave {

void validate(const MediumParams& m) {
    if (!(m.tau > 0.0))
        throw ValidationError("medium: tau must be positive, got " + g17(m.tau));
    if (!(m.v_e > 0.0))
        throw ValidationError("medium: v_e must be positive, got " + g17(m.v_e));
    if (!(m.v_f > m.v_e))
        throw ValidationError("medium: v_f must exceed v_e (frozen speed above equilibrium), got v_e=" +
                              g17(m.v_e) + " v_f=" + g17(m.v_f));
    if (!(m.alpha_f >= 0.0))
        throw ValidationError("medium: alpha_f must be non-negative, got " + g17(m.alpha_f));
    if (!(m.a_f > 0.0))
        throw ValidationError("medium: a_f must be positive, got " + g17(m.a_f));
}

DerivedCoefficients derive_coefficients(const MediumParams& m) {
    validate(m);
    const double ve2 = m.v_e * m.v_e, vf2 = m.v_f * m.v_f;
    DerivedCoefficients d;
    d.beta_f = (vf2 - ve2) / (m.tau * ve2 * m.v_f);
    d.gamma_f = (vf2 * vf2 - ve2 * ve2) / (2.0 * m.tau * m.tau * ve2 * ve2 * vf2);
    return d;
}

std::complex<double> linear_dispersion(const MediumParams& m, double k1, double k2) {
    const auto d = derive_coefficients(m);
    const double ks = k1 + k2;
    const std::complex<double> rhs(ks * ks - d.gamma_f, d.beta_f * ks);
    return (m.v_f * m.v_f) * rhs;
}

std::complex<double> factorization_gap(const AnalyticField& u, const MediumParams& m,
                                       double x, double y, double t) {
    validate(m);
    const Jet2 j = u(x, y, t);
    const double iv = 1.0 / m.v_f;
    // Both sides evaluated literally; the identity -[(dx+dy) + v_f^{-1} dt]^2 u
    // is reserved for tests as the independent oracle.
    const Cplx lhs = (j.fxx + 2.0 * j.fxy + j.fyy) - iv * iv * j.ftt;
    const Cplx rhs = 2.0 * ((j.fxx + 2.0 * j.fxy + j.fyy) + iv * (j.fxt + j.fyt));
    return lhs - rhs;
}

ScalingMap build_scaling(const MediumParams& m, ReducedCase c) {
    validate(m);
    const auto d = derive_coefficients(m);
    ScalingMap sm;
    sm.case_tag = c;
    sm.v_frame = m.v_f;
    if (c == ReducedCase::QuadraticFree) {
        // The negative space scale is intentional; see ScalingMap docs.
        sm.space_scale = -std::sqrt(d.gamma_f / 6.0);
        sm.time_scale = m.v_f * std::sqrt(1.5 * d.gamma_f);
        sm.alpha_tilde = d.beta_f / std::sqrt(6.0 * d.gamma_f);
        sm.amplitude_scale = derive_amplitude_scale(m).c;
    } else {
        if (!(m.alpha_f > 0.0))
            throw ValidationError("mixed-case scaling requires alpha_f > 0, got " + g17(m.alpha_f));
        sm.space_scale = std::sqrt(1.5 * m.a_f * d.gamma_f) / (m.alpha_f * m.v_f);
        sm.time_scale = std::sqrt(d.gamma_f / (6.0 * m.a_f)) * m.alpha_f * m.v_f * m.v_f;
        sm.alpha_tilde = (d.beta_f / (m.alpha_f * m.v_f)) * std::sqrt(1.5 * m.a_f / d.gamma_f);
        sm.amplitude_scale = 3.0 * m.a_f / m.alpha_f;
    }
    return sm;
}

DimlessCoord map_from_physical(const ScalingMap& sm, PhysCoord p) {
    return {sm.space_scale * (p.x - sm.v_frame * p.t),
            sm.space_scale * (p.y - sm.v_frame * p.t),
            sm.time_scale * p.t};
}

PhysCoord map_to_physical(const ScalingMap& sm, DimlessCoord q) {
    const double t = q.t_tilde / sm.time_scale;
    return {q.x_tilde / sm.space_scale + sm.v_frame * t,
            q.y_tilde / sm.space_scale + sm.v_frame * t,
            t};
}

double field_from_physical(const ScalingMap& sm, double p_prime) {
    return sm.amplitude_scale * p_prime;
}

double field_to_physical(const ScalingMap& sm, double u_tilde) {
    return u_tilde / sm.amplitude_scale;
}

AmplitudeMatch derive_amplitude_scale(const MediumParams& m) {
    MediumParams checked = m;
    checked.a_f = 1.0; // a_f checked separately so the degenerate a_f = 0 case reports
    validate(checked);
    if (!(m.a_f >= 0.0))
        throw ValidationError("medium: a_f must be non-negative, got " + g17(m.a_f));

    const auto d = derive_coefficients(checked);
    const double sigma = -std::sqrt(d.gamma_f / 6.0);
    const double mu = m.v_f * std::sqrt(1.5 * d.gamma_f);

    AmplitudeMatch r;
    r.printed_claim = m.alpha_f * m.v_f * m.v_f;
    // Normalized equation: D dt u + [a_f v_f^3 sigma/(2 mu c^2)] D^2 u^3
    //                      + [beta_f v_f/(2 mu)] D u + [gamma_f v_f/(2 sigma mu)] u = 0.
    // Canonical form wants the three bracketed coefficients at -1/6, alpha_tilde, -1.
    r.linear_coeff = d.beta_f * m.v_f / (2.0 * mu);
    r.constant_coeff = d.gamma_f * m.v_f / (2.0 * sigma * mu);
    r.alpha_tilde = r.linear_coeff;
    r.cubic_target_c2 = -3.0 * m.a_f * m.v_f * m.v_f * m.v_f * sigma / mu;

    if (!(r.cubic_target_c2 > 0.0)) {
        throw ValidationError(
            "amplitude matching has no consistent positive c: cubic-term match demands c^2 = " +
            g17(r.cubic_target_c2) + " (system: cubic a_f v_f^3 sigma/(2 mu c^2) = -1/6, linear " +
            g17(r.linear_coeff) + " = alpha_tilde, constant " + g17(r.constant_coeff) +
            " = -1); least-squares best c = 0 with residual 1/6");
    }
    r.c = std::sqrt(r.cubic_target_c2);
    return r;
}

} // namespace relaxwave
