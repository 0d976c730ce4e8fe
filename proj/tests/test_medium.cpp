#include <doctest.h>

#include <cmath>
#include <complex>

#include "relaxwave/errors.hpp"
#include "relaxwave/medium.hpp"
#include "relaxwave/soliton.hpp"

using namespace relaxwave;

namespace {

MediumParams reference_medium() {
    MediumParams m;
    m.tau = 1.0;
    m.v_e = 1.0;
    m.v_f = 2.0;
    m.alpha_f = 0.0;
    m.a_f = 1.0;
    return m;
}

// Analytic jet of the plane wave exp(i(w t - k1 x - k2 y)).
AnalyticField plane_wave(Cplx w, double k1, double k2) {
    return [w, k1, k2](double x, double y, double t) {
        const Cplx i(0.0, 1.0);
        Jet2 j;
        j.f = std::exp(i * (w * t - k1 * x - k2 * y));
        j.fx = -i * k1 * j.f;
        j.fy = -i * k2 * j.f;
        j.ft = i * w * j.f;
        j.fxx = -k1 * k1 * j.f;
        j.fyy = -k2 * k2 * j.f;
        j.fxy = -k1 * k2 * j.f;
        j.ftt = -w * w * j.f;
        j.fxt = k1 * w * j.f;
        j.fyt = k2 * w * j.f;
        return j;
    };
}

} // namespace

TEST_CASE("derived coefficients at the reference medium") {
    const DerivedCoefficients d = derive_coefficients(reference_medium());
    CHECK(d.beta_f == 1.5);   // (4-1)/(1*1*2), exact in binary
    CHECK(d.gamma_f == 1.875); // (16-1)/(2*1*4), exact in binary
}

TEST_CASE("medium validation rejects inconsistent parameters") {
    MediumParams m = reference_medium();
    m.v_e = 2.0;
    m.v_f = 1.0;
    CHECK_THROWS_AS(validate(m), ValidationError);
    m = reference_medium();
    m.tau = 0.0;
    CHECK_THROWS_AS(validate(m), ValidationError);
    m = reference_medium();
    m.a_f = 0.0;
    CHECK_THROWS_AS(validate(m), ValidationError);
    m = reference_medium();
    m.alpha_f = -1.0;
    CHECK_THROWS_AS(validate(m), ValidationError);
}

TEST_CASE("linear dispersion closes the linearized equation on plane waves") {
    const MediumParams m = reference_medium();
    const double k1 = 0.7, k2 = -0.3;
    const Cplx w2 = linear_dispersion(m, k1, k2);
    const double ks = k1 + k2;
    CHECK(w2 == Cplx(m.v_f * m.v_f * (ks * ks - 1.875), m.v_f * m.v_f * 1.5 * ks));

    SecondOrderCoefficients c;
    c.v_f = m.v_f;
    c.alpha_f = 0.0;
    c.a_f = 0.0; // linearized equation
    c.beta_f = 1.5;
    c.gamma_f = 1.875;
    const Cplx w = std::sqrt(w2);
    const AnalyticField p = plane_wave(w, k1, k2);
    const Cplx r = residual_physical(p, c, DimlessCoord{0.3, -0.2, 0.5},
                                     PhysicalForm::SecondOrder);
    CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("factorization gap vanishes only on outgoing unidirectional fields") {
    const MediumParams m = reference_medium();
    // u = f(x - v_f t): annihilated by (dx + dy + v_f^{-1} dt)
    const AnalyticField uni = [&](double x, double, double t) {
        const double s = x - m.v_f * t;
        const double g = std::exp(-s * s);
        Jet2 j;
        j.f = g;
        j.fx = -2.0 * s * g;
        j.ft = 2.0 * s * g * m.v_f;
        j.fxx = (4.0 * s * s - 2.0) * g;
        j.ftt = (4.0 * s * s - 2.0) * g * m.v_f * m.v_f;
        j.fxt = -(4.0 * s * s - 2.0) * g * m.v_f;
        return j;
    };
    CHECK(std::abs(factorization_gap(uni, m, 0.4, 0.0, 0.1)) < 1e-13);

    const AnalyticField standing = [](double x, double, double t) {
        const double g = std::exp(-x * x - t * t);
        Jet2 j;
        j.f = g;
        j.fx = -2.0 * x * g;
        j.ft = -2.0 * t * g;
        j.fxx = (4.0 * x * x - 2.0) * g;
        j.ftt = (4.0 * t * t - 2.0) * g;
        j.fxt = 4.0 * x * t * g;
        return j;
    };
    CHECK(std::abs(factorization_gap(standing, m, 0.4, 0.0, 0.1)) > 1e-3);
}

TEST_CASE("quadratic-free scaling map at the reference medium") {
    const ScalingMap s = build_scaling(reference_medium(), ReducedCase::QuadraticFree);
    CHECK(s.alpha_tilde == doctest::Approx(0.44721359549995793).epsilon(1e-15));
    CHECK(s.space_scale < 0.0); // orientation is part of the contract
    CHECK(s.time_scale > 0.0);
    CHECK(s.v_frame == 2.0);
    // alpha_tilde is beta_f / sqrt(6 gamma_f)
    CHECK(s.alpha_tilde == doctest::Approx(1.5 / std::sqrt(6.0 * 1.875)).epsilon(1e-15));
}

TEST_CASE("mixed scaling requires a quadratic nonlinearity") {
    CHECK_THROWS_AS(build_scaling(reference_medium(), ReducedCase::Mixed), ValidationError);
    MediumParams m = reference_medium();
    m.alpha_f = 1.0;
    const ScalingMap s = build_scaling(m, ReducedCase::Mixed);
    CHECK(s.alpha_tilde == doctest::Approx(0.67082039324993692).epsilon(1e-15));
}

TEST_CASE("frame maps round-trip") {
    MediumParams m = reference_medium();
    for (ReducedCase c : {ReducedCase::QuadraticFree}) {
        const ScalingMap s = build_scaling(m, c);
        const PhysCoord p{1.3, -0.4, 0.9};
        const PhysCoord back = map_to_physical(s, map_from_physical(s, p));
        CHECK(back.x == doctest::Approx(p.x).epsilon(1e-14));
        CHECK(back.y == doctest::Approx(p.y).epsilon(1e-14));
        CHECK(back.t == doctest::Approx(p.t).epsilon(1e-14));
        CHECK(field_to_physical(s, field_from_physical(s, 0.37)) ==
              doctest::Approx(0.37).epsilon(1e-14));
    }
}

TEST_CASE("amplitude match is determined by coefficient consistency") {
    const AmplitudeMatch am = derive_amplitude_scale(reference_medium());
    CHECK(am.c == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(am.cubic_target_c2 == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(am.constant_coeff == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(am.alpha_tilde == doctest::Approx(0.44721359549995793).epsilon(1e-14));
    // the printed formula (alpha_f v_f^2) disagrees with the consistent root
    CHECK(am.printed_claim == 0.0);
}
