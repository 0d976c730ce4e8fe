#include "relaxwave/classify.hpp"

#include <cmath>

#include "relaxwave/errors.hpp"
#include "relaxwave/numfmt.hpp"

namespace relaxwave {

const char* to_string(PatternKind k) {
    switch (k) {
    case PatternKind::Loop: return "loop";
    case PatternKind::Cusp: return "cusp";
    case PatternKind::Hump: return "hump";
    case PatternKind::NoPattern: return "no-pattern";
    }
    return "?";
}

double critical_alpha_static(long double v) {
    if (!(v < 0.0L)) throw ValidationError("critical_alpha_static: requires v < 0");
    return static_cast<double>(sqrtl(1.0L / (2.0L * -v)));
}

Thresholds rotating_thresholds(long double zeta, long double v) {
    if (!(v < 0.0L)) throw ValidationError("rotating_thresholds: requires v < 0");
    const long double absv = -v;
    if (!(zeta > 1.0L / absv && zeta < 2.0L / absv))
        throw ValidationError("rotating_thresholds: zeta must lie in (1/|v|, 2/|v|), got " +
                              g17(static_cast<double>(zeta)));
    Thresholds t;
    t.alpha_c_static = static_cast<double>(sqrtl(1.0L / (2.0L * absv)));
    const long double excess = zeta * absv - 1.0L;
    t.alpha_c_rot = static_cast<double>(excess / sqrtl(2.0L * absv));
    t.alpha_s = static_cast<double>(excess / (absv * sqrtl(zeta)));
    if (!(t.alpha_c_rot > 0.0 && t.alpha_c_rot < t.alpha_s))
        throw NumericError("rotating_thresholds: ordering 0 < alpha_c < alpha_s failed");
    return t;
}

PatternClass classify_static(double alpha_tilde, double v) {
    if (alpha_tilde < 0.0) throw ValidationError("classify_static: alpha_tilde must be >= 0");
    const double ac = critical_alpha_static(v);
    PatternClass c;
    c.rotating = false;
    c.margin = std::abs(alpha_tilde - ac);
    if (std::abs(alpha_tilde - ac) <= kClassifyTol)
        c.kind = PatternKind::Cusp;
    else if (alpha_tilde < ac)
        c.kind = PatternKind::Loop;
    else
        c.kind = PatternKind::Hump;
    return c;
}

PatternClass classify_rotating(double alpha_tilde, double zeta, double v) {
    if (alpha_tilde < 0.0) throw ValidationError("classify_rotating: alpha_tilde must be >= 0");
    const Thresholds t = rotating_thresholds(zeta, v);
    PatternClass c;
    c.rotating = true;
    c.margin = std::min(std::abs(alpha_tilde - t.alpha_c_rot), std::abs(alpha_tilde - t.alpha_s));
    if (alpha_tilde >= t.alpha_s) {
        c.kind = PatternKind::NoPattern;
        return c;
    }
    if (std::abs(alpha_tilde - t.alpha_c_rot) <= kClassifyTol)
        c.kind = PatternKind::Cusp;
    else if (alpha_tilde > t.alpha_c_rot)
        c.kind = PatternKind::Loop;
    else
        c.kind = PatternKind::Hump;
    const RotatingParams rp = rotating_parameters(alpha_tilde, zeta, v);
    if (rp.omega_is_real) c.Omega = rp.Omega;
    return c;
}

PatternClass classify_by_slope_oracle(const SolitonReal& s) {
    const double v = s.v();
    const double min_slope = 1.0 + 2.0 * s.K * s.K * v;  // slope minimum, attained at theta = 0
    PatternClass c;
    c.rotating = false;
    c.margin = std::abs(min_slope);
    if (std::abs(min_slope) <= kClassifyTol)
        c.kind = PatternKind::Cusp;
    else if (min_slope < 0.0)
        c.kind = PatternKind::Loop;
    else
        c.kind = PatternKind::Hump;
    return c;
}

nlohmann::json pattern_to_json(const PatternClass& c, const std::optional<Thresholds>& th) {
    nlohmann::json j{{"kind", to_string(c.kind)}, {"rotating", c.rotating}, {"margin", c.margin}};
    if (c.Omega) j["Omega"] = *c.Omega;
    if (th) {
        j["thresholds"] = {{"alpha_c_static", th->alpha_c_static}};
        if (c.rotating) {
            j["thresholds"]["alpha_c_rot"] = th->alpha_c_rot;
            j["thresholds"]["alpha_s"] = th->alpha_s;
        }
    }
    return j;
}

} // namespace relaxwave
