#include "relaxwave/soliton.hpp"

#include "relaxwave/errors.hpp"
#include "relaxwave/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace relaxwave {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

Cplx cnum(const nlohmann::json& j) {
    return {j.at("re").get<double>(), j.at("im").get<double>()};
}
nlohmann::json cjson(Cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

} // namespace

double solve_dispersion(double alpha_tilde, double v) {
    if (!(v < 0.0))
        throw ValidationError("solve_dispersion: requires v = v1+v2 < 0, got v = " + g17(v));
    const double inv = 1.0 / -v; // 1/|v|
    return (2.0 * inv) / (alpha_tilde + std::sqrt(alpha_tilde * alpha_tilde + 4.0 * inv));
}

double solve_dispersion_negative_branch(double alpha_tilde, double v) {
    return -(alpha_tilde + solve_dispersion(alpha_tilde, v));
}

SolitonReal make_soliton(double alpha_tilde, double v1, double v2, double theta0,
                         double x0_tilde, double y0_tilde) {
    if (alpha_tilde < 0.0)
        throw ValidationError("make_soliton: alpha_tilde must be >= 0, got " + g17(alpha_tilde));
    SolitonReal s;
    s.alpha_tilde = alpha_tilde;
    s.v1 = v1;
    s.v2 = v2;
    s.K = solve_dispersion(alpha_tilde, v1 + v2); // validates v1+v2 < 0
    s.omega1 = s.K * v1;
    s.omega2 = s.K * v2;
    s.theta0 = theta0;
    s.x0_tilde = x0_tilde;
    s.y0_tilde = y0_tilde;
    return s;
}

nlohmann::json SolitonReal::to_json() const {
    return {{"K", K},           {"omega1", omega1}, {"omega2", omega2},
            {"v1", v1},         {"v2", v2},         {"theta0", theta0},
            {"alpha_tilde", alpha_tilde}, {"x0_tilde", x0_tilde}, {"y0_tilde", y0_tilde}};
}

SolitonReal SolitonReal::from_json(const nlohmann::json& j) {
    SolitonReal s;
    s.K = j.at("K").get<double>();
    s.omega1 = j.at("omega1").get<double>();
    s.omega2 = j.at("omega2").get<double>();
    s.v1 = j.at("v1").get<double>();
    s.v2 = j.at("v2").get<double>();
    s.theta0 = j.value("theta0", 0.0);
    s.alpha_tilde = j.at("alpha_tilde").get<double>();
    s.x0_tilde = j.value("x0_tilde", 0.0);
    s.y0_tilde = j.value("y0_tilde", 0.0);
    if (!(s.v() < 0.0)) throw ValidationError("soliton record: v1+v2 must be < 0");
    if (!(s.K > 0.0)) throw ValidationError("soliton record: K must be > 0");
    const double disp = (s.K + s.alpha_tilde) * (s.omega1 + s.omega2) + 1.0;
    if (std::abs(disp) > 1e-12)
        throw ValidationError("soliton record: dispersion relation violated by " + g17(disp));
    if (std::abs(s.omega1 - s.K * s.v1) > 1e-12 * (1.0 + std::abs(s.omega1)) ||
        std::abs(s.omega2 - s.K * s.v2) > 1e-12 * (1.0 + std::abs(s.omega2)))
        throw ValidationError("soliton record: omega_i = K v_i violated");
    return s;
}

SolitonSample eval_U(const SolitonReal& s, const FramePoint& p) {
    const double th = s.theta(p);
    const double tb = std::tanh(th);
    SolitonSample out;
    out.theta = th;
    out.U = 2.0 * s.K * sech(th);
    out.Z1 = p.T1 - 2.0 * s.K * (tb + 1.0);
    out.Z2 = p.T2 - 2.0 * s.K * (tb + 1.0);
    return out;
}

DimlessCoord to_physical(const SolitonReal& s, const FramePoint& p) {
    const SolitonSample smp = eval_U(s, p);
    return {smp.Z1 + s.x0_tilde, smp.Z2 + s.y0_tilde, p.X};
}

double residual_transformed(const SolitonReal& s, const FramePoint& p) {
    const double th = s.theta(p);
    const double sc = sech(th), tb = std::tanh(th);
    const double U = 2.0 * s.K * sc;
    const double U_T1 = 2.0 * s.K * s.omega1 * sc * tb;
    const double U_T2 = 2.0 * s.K * s.omega2 * sc * tb;
    // d(sech tanh)/dtheta = sech (2 sech^2 - 1)
    const double U_XT1 = 2.0 * s.K * s.K * s.omega1 * sc * (2.0 * sc * sc - 1.0);
    const double U_XT2 = 2.0 * s.K * s.K * s.omega2 * sc * (2.0 * sc * sc - 1.0);
    const double phi1 = 2.0 * s.K * s.omega1 * sc * sc;
    const double phi2 = 2.0 * s.K * s.omega2 * sc * sc;
    return U_XT1 + U_XT2 + s.alpha_tilde * (U_T1 + U_T2) - (1.0 + phi1 + phi2) * U;
}

double residual_transformed_closed_form(const SolitonReal& s, const FramePoint& p) {
    const double th = s.theta(p);
    return 2.0 * s.K * s.alpha_tilde * (s.omega1 + s.omega2) * sech(th) * (1.0 + std::tanh(th));
}

double residual_transformed_fd(const SolitonReal& s, const FramePoint& p) {
    // Coordinate order handed to the jet: (x, y, t) := (T1, T2, X).
    const SolitonReal sc = s;
    AnalyticField f = fd_field([sc](double T1, double T2, double X) -> Cplx {
        return 2.0 * sc.K * sech(sc.theta({X, T1, T2}));
    });
    const Jet2 j = f(p.T1, p.T2, p.X);
    const double th = s.theta(p);
    const double ss = sech(th);
    const double phi12 = 2.0 * s.K * (s.omega1 + s.omega2) * ss * ss;
    return (j.fxt + j.fyt + s.alpha_tilde * (j.fx + j.fy) - (1.0 + phi12) * j.f).real();
}

// ---------- complex family ----------

RotatingParams rotating_parameters(long double alpha_tilde, long double zeta, long double v) {
    if (!(v < 0.0L)) throw ValidationError("rotating_parameters: requires v < 0");
    const long double absv = -v;
    if (!(zeta > 1.0L / absv && zeta < 2.0L / absv))
        throw ValidationError("rotating_parameters: zeta must satisfy 1/|v| < zeta < 2/|v|; got zeta = " +
                              g17(static_cast<double>(zeta)));
    if (alpha_tilde < 0.0L) throw ValidationError("rotating_parameters: alpha_tilde must be >= 0");
    const long double denom = zeta * absv - 1.0L;
    RotatingParams r;
    r.K_r = static_cast<double>(alpha_tilde / denom);
    const long double alpha_s = denom / (absv * sqrtl(zeta));
    r.alpha_s = static_cast<double>(alpha_s);
    const long double ratio = alpha_tilde / alpha_s;
    const long double radicand = (1.0L - ratio * ratio) / zeta;
    if (radicand >= 0.0L) {
        r.Omega = static_cast<double>(sqrtl(radicand));
        r.omega_is_real = true;
    } else {
        r.Omega = 0.0;
        r.omega_is_real = false;
        r.omega_imag_mag = static_cast<double>(sqrtl(-radicand));
    }
    return r;
}

SolitonComplex make_rotating_soliton(double alpha_tilde, double zeta, double v1, double v2,
                                     Cplx theta0) {
    const double v = v1 + v2;
    const RotatingParams rp = rotating_parameters(alpha_tilde, zeta, v);
    if (!rp.omega_is_real)
        throw ValidationError("make_rotating_soliton: no oscillatory profile, alpha_tilde = " +
                              g17(alpha_tilde) + " >= saturation threshold " + g17(rp.alpha_s));
    SolitonComplex s;
    s.v1 = v1;
    s.v2 = v2;
    s.zeta = zeta;
    s.alpha_tilde = alpha_tilde;
    s.K = Cplx(rp.K_r, zeta * rp.Omega / 2.0);
    s.omega1 = Cplx(v1 * rp.K_r, rp.Omega / 2.0);
    s.omega2 = Cplx(v2 * rp.K_r, rp.Omega / 2.0);
    s.theta0 = theta0;
    return s;
}

SolitonComplex complex_from_real(const SolitonReal& s) {
    SolitonComplex c;
    c.K = Cplx(s.K, 0.0);
    c.omega1 = Cplx(s.omega1, 0.0);
    c.omega2 = Cplx(s.omega2, 0.0);
    c.theta0 = Cplx(s.theta0, 0.0);
    c.v1 = s.v1;
    c.v2 = s.v2;
    c.zeta = 1.5 / -s.v(); // mid-range placeholder; imaginary parts are zero
    c.alpha_tilde = s.alpha_tilde;
    return c;
}

nlohmann::json SolitonComplex::to_json() const {
    return {{"K", cjson(K)},       {"omega1", cjson(omega1)}, {"omega2", cjson(omega2)},
            {"theta0", cjson(theta0)}, {"v1", v1},            {"v2", v2},
            {"zeta", zeta},        {"alpha_tilde", alpha_tilde}};
}

SolitonComplex SolitonComplex::from_json(const nlohmann::json& j) {
    SolitonComplex s;
    s.K = cnum(j.at("K"));
    s.omega1 = cnum(j.at("omega1"));
    s.omega2 = cnum(j.at("omega2"));
    s.theta0 = j.contains("theta0") ? cnum(j.at("theta0")) : Cplx(0.0);
    s.v1 = j.at("v1").get<double>();
    s.v2 = j.at("v2").get<double>();
    s.zeta = j.at("zeta").get<double>();
    s.alpha_tilde = j.at("alpha_tilde").get<double>();
    const double v = s.v();
    if (!(v < 0.0)) throw ValidationError("complex soliton record: v1+v2 must be < 0");
    if (!(s.zeta > 1.0 / -v && s.zeta < 2.0 / -v))
        throw ValidationError("complex soliton record: zeta outside (1/|v|, 2/|v|)");
    const double tol = 1e-12;
    if (std::abs(s.omega1.real() - s.v1 * s.K.real()) > tol * (1.0 + std::abs(s.omega1)) ||
        std::abs(s.omega2.real() - s.v2 * s.K.real()) > tol * (1.0 + std::abs(s.omega2)))
        throw ValidationError("complex soliton record: Re omega_j = v_j Re K violated");
    if (std::abs(s.K.imag() - s.zeta * s.omega1.imag()) > tol * (1.0 + std::abs(s.K)) ||
        std::abs(s.K.imag() - s.zeta * s.omega2.imag()) > tol * (1.0 + std::abs(s.K)))
        throw ValidationError("complex soliton record: Im K = zeta Im omega_j violated");
    return s;
}

SolitonSampleComplex eval_Q(const SolitonComplex& s, const FramePoint& p) {
    const Cplx th = s.theta(p);
    const double thr = th.real(), thi = th.imag();
    const double A = 2.0 * s.K.real();
    const double tb = std::tanh(thr);
    SolitonSampleComplex out;
    out.theta_r = thr;
    out.theta_im = thi;
    out.Q = Cplx(A * sech(thr)) * std::exp(Cplx(0.0, thi));
    out.Z1 = p.T1 - 2.0 * s.K.real() * (tb + 1.0);
    out.Z2 = p.T2 - 2.0 * s.K.real() * (tb + 1.0);
    return out;
}

DimlessCoord to_physical(const SolitonComplex& s, const FramePoint& p) {
    const SolitonSampleComplex smp = eval_Q(s, p);
    return {smp.Z1, smp.Z2, p.X}; // integration constants carried by the caller
}

ComplexResiduals residual_transformed_complex(const SolitonComplex& s, const FramePoint& p) {
    const SolitonSampleComplex smp = eval_Q(s, p);
    const Cplx Q = smp.Q;
    const double Kr = s.K.real(), Kim = s.K.imag();
    const double sc = sech(smp.theta_r), tb = std::tanh(smp.theta_r);
    const double w1r = s.omega1.real(), w2r = s.omega2.real();
    const double w1i = s.omega1.imag(), w2i = s.omega2.imag();

    // Logarithmic derivatives of the profile: d/dX log Q = i K^im - K^r tanh,
    // d/dT_j log Q = -i omega_j^im + omega_j^r tanh.
    const Cplx dX = Cplx(-Kr * tb, Kim);
    const Cplx dT1 = Cplx(w1r * tb, -w1i);
    const Cplx dT2 = Cplx(w2r * tb, -w2i);
    const Cplx Q_T1 = Q * dT1, Q_T2 = Q * dT2;
    // Q_XTj = Q [dX * dTj + omega_j^r K^r sech^2]  (the sech^2 term is the
    // X-derivative of the tanh factor inside dTj).
    const Cplx Q_XT1 = Q * (dX * dT1 + w1r * Kr * sc * sc);
    const Cplx Q_XT2 = Q * (dX * dT2 + w2r * Kr * sc * sc);

    const double Z1_T1 = 1.0 + 2.0 * Kr * w1r * sc * sc;
    const double Z2_T2 = 1.0 + 2.0 * Kr * w2r * sc * sc;
    const double bracket = Z1_T1 + Z2_T2 - 1.0;

    ComplexResiduals r;
    r.field_eq = Q_XT1 + Q_XT2 + s.alpha_tilde * (Q_T1 + Q_T2) - bracket * Q;

    const double wr = w1r + w2r;
    const double Om = w1i + w2i;
    r.field_eq_closed =
        Q * Cplx(Kim * Om - Kr * wr - 1.0 + s.alpha_tilde * wr * tb,
                 (Kim * wr + Kr * Om) * tb - s.alpha_tilde * Om);

    // Accumulator compatibility: Z1_XT1 + d/dT1 (|Q|^2/2) and the T2 analogue.
    const double Z1_XT1 = -4.0 * Kr * Kr * w1r * sc * sc * tb;
    const double A2 = 4.0 * Kr * Kr;
    r.aux1 = Z1_XT1 + A2 * w1r * sc * sc * tb;
    const double Z2_XT2 = -4.0 * Kr * Kr * w2r * sc * sc * tb;
    r.aux2 = Z2_XT2 + A2 * w2r * sc * sc * tb;
    return r;
}

ComplexDispersionResult solve_complex_dispersion(double alpha_tilde, double zeta, double v1,
                                                 double v2) {
    const double v = v1 + v2;
    if (!(v < 0.0))
        throw ValidationError("solve_complex_dispersion: requires v1+v2 < 0");
    if (!(zeta > 0.0))
        throw ValidationError("solve_complex_dispersion: requires zeta > 0");
    const double absv = -v;

    // Constraints reduce the complex relation to two real equations in
    // kappa = K^r and m = K^im:
    //   f1 = (kappa+alpha) v kappa - 2 m^2/zeta + 1
    //   f2 = m (2 (kappa+alpha)/zeta + v kappa)
    auto F = [&](double ka, double m) {
        const double f1 = (ka + alpha_tilde) * v * ka - 2.0 * m * m / zeta + 1.0;
        const double f2 = m * (2.0 * (ka + alpha_tilde) / zeta + v * ka);
        return std::pair<double, double>(f1, f2);
    };

    const double Kpos = solve_dispersion(alpha_tilde, v);
    std::vector<std::pair<double, double>> seeds = {{Kpos, 0.0}, {-(alpha_tilde + Kpos), 0.0}};
    // The f2 = 0, m != 0 branch pins kappa; admissible only if f1 then has a
    // real m. Seed both signs when the closed-form m^2 is positive.
    if (std::abs(zeta * absv - 2.0) > 1e-14) {
        const double ko = 2.0 * alpha_tilde / (zeta * absv - 2.0);
        const double m2 = zeta * (1.0 + (ko + alpha_tilde) * v * ko) / 2.0;
        if (m2 > 0.0) {
            const double mo = std::sqrt(m2);
            seeds.push_back({ko, mo});
            seeds.push_back({ko, -mo});
        }
    }
    const double box = 2.0 * (alpha_tilde + std::sqrt(alpha_tilde * alpha_tilde + 4.0 / absv) +
                              1.0 / zeta + 1.0);
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) seeds.push_back({0.45 * box * i, 0.45 * box * j});

    ComplexDispersionResult out;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> roots;
    for (const auto& s0 : seeds) {
        Root2d r = newton2d(
            [&](double a, double b, double& f1, double& f2) { std::tie(f1, f2) = F(a, b); },
            s0.first, s0.second, 1e-14, 80);
        const auto [f1, f2] = F(r.x, r.y);
        const double res = std::hypot(f1, f2);
        best = std::min(best, res);
        if (res > 1e-12) continue;
        if (std::abs(r.x) > 2.0 * box || std::abs(r.y) > 2.0 * box) continue;
        bool dup = false;
        for (const auto& q : roots)
            if (std::abs(q.first - r.x) + std::abs(q.second - r.y) <
                1e-8 * (1.0 + std::abs(r.x) + std::abs(r.y)))
                dup = true;
        if (dup) continue;
        roots.push_back({r.x, r.y});

        ComplexDispersionBranch b;
        b.K = Cplx(r.x, r.y);
        b.omega1 = Cplx(v1 * r.x, r.y / zeta);
        b.omega2 = Cplx(v2 * r.x, r.y / zeta);
        b.residual = std::abs((b.K + alpha_tilde) * (b.omega1 + b.omega2) + 1.0);
        if (std::abs(r.y) < 1e-10)
            b.kind = r.x > 0.0 ? "real-positive" : "real-negative";
        else
            b.kind = "oscillatory";
        out.branches.push_back(std::move(b));
    }
    std::sort(out.branches.begin(), out.branches.end(),
              [](const ComplexDispersionBranch& a, const ComplexDispersionBranch& b) {
                  if (a.K.real() != b.K.real()) return a.K.real() > b.K.real();
                  return a.K.imag() > b.K.imag();
              });
    out.found = !out.branches.empty();
    out.best_residual = out.found ? 0.0 : best;

    if (zeta > 1.0 / absv && zeta < 2.0 / absv) {
        const RotatingParams rp =
            rotating_parameters(static_cast<long double>(alpha_tilde),
                                static_cast<long double>(zeta), static_cast<long double>(v));
        out.K_r_closed_form = rp.K_r;
        out.Omega_closed_form = rp.omega_is_real ? rp.Omega : 0.0;
    }
    for (const auto& b : out.branches)
        if (b.kind == "oscillatory" && b.K.imag() > 0.0) {
            out.K_r_root_finder = b.K.real();
            out.Omega_root_finder = b.omega1.imag() + b.omega2.imag();
        }
    return out;
}

// ---------- physical-frame residuals ----------

SecondOrderCoefficients SecondOrderCoefficients::from_medium(const MediumParams& m) {
    const DerivedCoefficients d = derive_coefficients(m);
    return {m.v_f, m.alpha_f, m.a_f, d.beta_f, d.gamma_f};
}

namespace {

struct PowerJets {
    // Directional derivatives needed by the second-order forms, for the field
    // and its square and cube: Dv = f_x + f_y, D2 = f_xx + 2 f_xy + f_yy.
    Cplx f, Dv, D2, ft, ftt, Dt; // Dt = f_xt + f_yt
    Cplx D2_sq, D2_cu;           // D2 of f^2 and f^3
};

PowerJets collect(const Jet2& j) {
    PowerJets p;
    p.f = j.f;
    p.Dv = j.fx + j.fy;
    p.D2 = j.fxx + 2.0 * j.fxy + j.fyy;
    p.ft = j.ft;
    p.ftt = j.ftt;
    p.Dt = j.fxt + j.fyt;
    // (f^2)'' = 2(f'^2 + f f''), (f^3)'' = 6 f f'^2 + 3 f^2 f'' along the
    // (1,1,0) direction.
    p.D2_sq = 2.0 * (p.Dv * p.Dv + p.f * p.D2);
    p.D2_cu = 6.0 * p.f * p.Dv * p.Dv + 3.0 * p.f * p.f * p.D2;
    return p;
}

} // namespace

Cplx residual_physical(const AnalyticField& field, const SecondOrderCoefficients& c,
                       const DimlessCoord& p, PhysicalForm form) {
    if (form != PhysicalForm::SecondOrder && form != PhysicalForm::SecondOrderFactored)
        throw ValidationError("residual_physical: this overload serves the second-order forms");
    const Jet2 j = field(p.x_tilde, p.y_tilde, p.t_tilde);
    const PowerJets q = collect(j);
    const double vf2 = c.v_f * c.v_f;
    Cplx linear;
    if (form == PhysicalForm::SecondOrder)
        linear = q.D2 - q.ftt / vf2;
    else
        linear = 2.0 * (q.D2 + q.Dt / c.v_f);
    return linear + c.alpha_f * vf2 * q.D2_sq + c.a_f * vf2 * q.D2_cu + c.beta_f * q.Dv +
           c.gamma_f * q.f;
}

Cplx residual_physical(const AnalyticField& field, double alpha_tilde, const DimlessCoord& p,
                       PhysicalForm form) {
    const Jet2 j = field(p.x_tilde, p.y_tilde, p.t_tilde);
    const PowerJets q = collect(j);
    switch (form) {
    case PhysicalForm::QuadraticFreeReduced:
        return q.Dt - q.f * q.Dv * q.Dv - 0.5 * q.f * q.f * q.D2 + alpha_tilde * q.Dv - q.f;
    case PhysicalForm::MixedReduced:
        return q.Dt + q.Dv * q.Dv + q.f * q.D2 + q.f * q.Dv * q.Dv + 0.5 * q.f * q.f * q.D2 +
               alpha_tilde * q.Dv + q.f;
    case PhysicalForm::ComplexReduced: {
        const Cplx mod_term =
            0.5 * ((std::conj(q.f) * q.Dv + q.f * std::conj(q.Dv)) * q.Dv +
                   q.f * std::conj(q.f) * q.D2);
        return q.Dt - mod_term + alpha_tilde * q.Dv - q.f;
    }
    default:
        throw ValidationError("residual_physical: this overload serves the reduced forms");
    }
}

DimlessCoord to_physical_cubic(const std::function<double(double)>& U_line, const FramePoint& p,
                               double x0_tilde, double y0_tilde) {
    auto g = [&](double S) {
        const double u = U_line(S);
        return 0.5 * (u * u + 2.0 * u);
    };
    double width = 16.0;
    double total = integrate(g, p.X - width, p.X, 1e-12);
    for (;;) {
        const double tail = integrate(g, p.X - 2.0 * width, p.X - width, 1e-12);
        total += tail;
        const double edge = std::abs(g(p.X - 2.0 * width));
        if (std::abs(tail) < 1e-13 * (1.0 + std::abs(total)) && edge < 1e-13) break;
        width *= 2.0;
        if (width > 1e5)
            throw NumericError("to_physical_cubic: tail integral not converging; last window "
                               "contribution " +
                               g17(tail) + ", integrand " + g17(edge) + " at S = " +
                               g17(p.X - width));
    }
    return {p.T1 + total + x0_tilde, p.T2 + total + y0_tilde, p.X};
}

void write_residual_scan_csv(std::ostream& os, const SolitonReal& s, double theta_min,
                             double theta_max, int n) {
    if (!(theta_max > theta_min) || n < 2)
        throw ValidationError("residual scan: need theta_max > theta_min and n >= 2");
    os << "theta,U,residual,closed_form_residual\n";
    for (int i = 0; i < n; ++i) {
        const double th = theta_min + (theta_max - theta_min) * i / (n - 1);
        const FramePoint p{(th - s.theta0) / s.K, 0.0, 0.0};
        const SolitonSample smp = eval_U(s, p);
        os << g17(smp.theta) << ',' << g17(smp.U) << ',' << g17(residual_transformed(s, p)) << ','
           << g17(residual_transformed_closed_form(s, p)) << '\n';
    }
}

} // namespace relaxwave
