#include "relaxwave/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "relaxwave/errors.hpp"
#include "relaxwave/numfmt.hpp"

namespace relaxwave {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

void check_section(const SectionSpec& spec, double omega_d) {
    if (spec.n < 16) throw ValidationError("sample_section: need n >= 16");
    if (!(spec.theta_halfwidth > 0.0))
        throw ValidationError("sample_section: degenerate window, theta_halfwidth must be > 0");
    if (std::abs(omega_d) < 1e-300)
        throw ValidationError("sample_section: section direction is degenerate (phase is "
                              "constant along it)");
}

// Uniform ascending parameter grid covering |theta| <= halfwidth.
std::vector<double> param_grid(const SectionSpec& spec, double phase_const, double omega_d) {
    const double ta = (phase_const + spec.theta_halfwidth) / omega_d;
    const double tb = (phase_const - spec.theta_halfwidth) / omega_d;
    const double lo = std::min(ta, tb), hi = std::max(ta, tb);
    std::vector<double> g(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) g[i] = lo + (hi - lo) * i / (spec.n - 1);
    return g;
}

void push_point(ParametricCurve& c, double tau, const CurvePoint& pt) {
    c.param.push_back(tau);
    c.theta.push_back(pt.theta);
    c.x_tilde.push_back(pt.x_tilde);
    c.y_tilde.push_back(pt.y_tilde);
    c.u.push_back(pt.u);
    c.slope.push_back(pt.slope);
    if (c.is_complex) {
        c.q_re.push_back(pt.q.real());
        c.q_im.push_back(pt.q.imag());
    }
}

} // namespace

ParametricCurve sample_section(const SolitonReal& s, const SectionSpec& spec) {
    const double omega_d = s.omega1 * spec.dir1 + s.omega2 * spec.dir2;
    check_section(spec, omega_d);
    const double phase_const = s.K * spec.t_tilde + s.theta0;

    ParametricCurve c;
    c.section = spec;
    c.is_complex = false;
    const SolitonReal sol = s;
    const SectionSpec sp = spec;
    c.eval = [sol, sp, omega_d](double tau) {
        const FramePoint p{sp.t_tilde, sp.dir1 * tau, sp.dir2 * tau};
        const SolitonSample smp = eval_U(sol, p);
        CurvePoint pt;
        pt.theta = smp.theta;
        pt.x_tilde = smp.Z1 + sol.x0_tilde;
        pt.y_tilde = smp.Z2 + sol.y0_tilde;
        pt.u = smp.U;
        const double sc = sech(smp.theta);
        pt.slope = sp.dir1 + 2.0 * sol.K * omega_d * sc * sc;
        pt.q = Cplx(smp.U, 0.0);
        return pt;
    };
    for (double tau : param_grid(spec, phase_const, omega_d)) push_point(c, tau, c.eval(tau));
    return c;
}

ParametricCurve sample_section(const SolitonComplex& s, const SectionSpec& spec) {
    const double omega_d = s.omega1.real() * spec.dir1 + s.omega2.real() * spec.dir2;
    check_section(spec, omega_d);
    const double phase_const = s.K.real() * spec.t_tilde + s.theta0.real();

    ParametricCurve c;
    c.section = spec;
    c.is_complex = true;
    const SolitonComplex sol = s;
    const SectionSpec sp = spec;
    c.eval = [sol, sp, omega_d](double tau) {
        const FramePoint p{sp.t_tilde, sp.dir1 * tau, sp.dir2 * tau};
        const SolitonSampleComplex smp = eval_Q(sol, p);
        CurvePoint pt;
        pt.theta = smp.theta_r;
        pt.x_tilde = smp.Z1;
        pt.y_tilde = smp.Z2;
        pt.u = std::abs(smp.Q);
        const double sc = sech(smp.theta_r);
        pt.slope = sp.dir1 + 2.0 * sol.K.real() * omega_d * sc * sc;
        pt.q = smp.Q;
        return pt;
    };
    for (double tau : param_grid(spec, phase_const, omega_d)) push_point(c, tau, c.eval(tau));
    return c;
}

ParametricCurve sample_section(const SolitonReal& s, double t_tilde, double theta_halfwidth,
                               int n) {
    SectionSpec spec;
    spec.t_tilde = t_tilde;
    spec.theta_halfwidth = theta_halfwidth;
    spec.n = n;
    return sample_section(s, spec);
}

ParametricCurve sample_section(const SolitonComplex& s, double t_tilde, double theta_halfwidth,
                               int n) {
    SectionSpec spec;
    spec.t_tilde = t_tilde;
    spec.theta_halfwidth = theta_halfwidth;
    spec.n = n;
    return sample_section(s, spec);
}

namespace {

double bisect_slope_zero(const std::function<CurvePoint(double)>& eval, double lo, double hi) {
    double flo = eval(lo).slope;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval(mid).slope;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Expands from the slope minimum until the slope turns positive, then bisects.
double hunt_tangent(const std::function<CurvePoint(double)>& eval, double from, double step,
                    double limit) {
    double prev = from;
    double cur = from + step;
    for (int it = 0; it < 120; ++it) {
        if (eval(cur).slope > 0.0)
            return step > 0.0 ? bisect_slope_zero(eval, prev, cur)
                              : bisect_slope_zero(eval, cur, prev);
        prev = cur;
        cur += step;
        step *= 2.0;
        if (std::abs(cur - from) > limit) break;
    }
    throw NumericError("detect_features: slope never recovers sign inside the search window");
}

struct Seg {
    double x0, u0, x1, u1;
};

bool boxes_overlap(const Seg& a, const Seg& b) {
    return std::max(a.x0, a.x1) >= std::min(b.x0, b.x1) &&
           std::max(b.x0, b.x1) >= std::min(a.x0, a.x1) &&
           std::max(a.u0, a.u1) >= std::min(b.u0, b.u1) &&
           std::max(b.u0, b.u1) >= std::min(a.u0, a.u1);
}

// Solves a + s (b-a) = c + t (d-c) for two plane segments; true when both
// fractions land inside [0,1).
bool segment_cross(const Seg& a, const Seg& b, double& sfrac, double& tfrac) {
    const double rx = a.x1 - a.x0, ru = a.u1 - a.u0;
    const double qx = b.x1 - b.x0, qu = b.u1 - b.u0;
    const double det = rx * qu - ru * qx;
    if (det == 0.0) return false;
    const double dx = b.x0 - a.x0, du = b.u0 - a.u0;
    sfrac = (dx * qu - du * qx) / det;
    tfrac = (dx * ru - du * rx) / det;
    return sfrac >= 0.0 && sfrac < 1.0 && tfrac >= 0.0 && tfrac < 1.0;
}

} // namespace

CurveFeatures detect_features(ParametricCurve& c) {
    if (!c.eval) throw ValidationError("detect_features: curve carries no evaluator");
    const std::size_t n = c.size();
    if (n < 16) throw ValidationError("detect_features: curve too short");
    const double spacing = c.param[1] - c.param[0];

    CurveFeatures f;

    // Vertical tangents: sign changes of the sampled slope, refined on the
    // closed-form evaluator.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (c.slope[i] == 0.0) {
            f.vertical_tangents.push_back(c.param[i]);
        } else if ((c.slope[i] < 0.0) != (c.slope[i + 1] < 0.0)) {
            f.vertical_tangents.push_back(bisect_slope_zero(c.eval, c.param[i], c.param[i + 1]));
        }
    }

    // The slope attains its extremum at the crest (theta = 0). A negative
    // minimum that produced no sign change means both tangents hide inside one
    // sample interval; a near-zero minimum is a grazing (cusp) tangent.
    double crest = c.param[0];
    {
        double best = std::abs(c.theta[0]);
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(c.theta[i]) < best) {
                best = std::abs(c.theta[i]);
                crest = c.param[i];
            }
        // refine: theta is linear in the parameter
        const double dth = (c.theta[n - 1] - c.theta[0]) / (c.param[n - 1] - c.param[0]);
        if (dth != 0.0) crest -= c.eval(crest).theta / dth;
    }
    const double crest_slope = c.eval(crest).slope;
    if (std::abs(crest_slope) <= kClassifyTol) {
        f.vertical_tangents.assign(1, crest);
    } else if (crest_slope < 0.0 && f.vertical_tangents.size() < 2) {
        const double window = c.param[n - 1] - c.param[0];
        const double left = hunt_tangent(c.eval, crest, -0.25 * spacing, window);
        const double right = hunt_tangent(c.eval, crest, 0.25 * spacing, window);
        if (right - left < spacing)
            throw ResampleRequest("detect_features: vertical-tangent pair narrower than the "
                                  "sample spacing",
                                  right - left, spacing);
        f.vertical_tangents = {left, right};
    }
    std::sort(f.vertical_tangents.begin(), f.vertical_tangents.end());

    // Self-intersections: decimated segment sweep, polished by a 2D solve on
    // the closed-form map.
    const std::size_t stride = std::max<std::size_t>(1, n / 2048);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
        const Seg sa{c.x_tilde[idx[a]], c.u[idx[a]], c.x_tilde[idx[a + 1]], c.u[idx[a + 1]]};
        for (std::size_t b = a + 2; b + 1 < idx.size(); ++b) {
            const Seg sb{c.x_tilde[idx[b]], c.u[idx[b]], c.x_tilde[idx[b + 1]], c.u[idx[b + 1]]};
            if (!boxes_overlap(sa, sb)) continue;
            double sf, tf;
            if (!segment_cross(sa, sb, sf, tf)) continue;
            double pa = c.param[idx[a]] + sf * (c.param[idx[a + 1]] - c.param[idx[a]]);
            double pb = c.param[idx[b]] + tf * (c.param[idx[b + 1]] - c.param[idx[b]]);
            if (pb - pa < spacing)
                throw ResampleRequest("detect_features: crossing branches closer than the "
                                      "sample spacing",
                                      pb - pa, spacing);
            const Root2d r = newton2d(
                [&](double p, double q, double& fx, double& fu) {
                    const CurvePoint cp = c.eval(p), cq = c.eval(q);
                    fx = cp.x_tilde - cq.x_tilde;
                    fu = cp.u - cq.u;
                },
                pa, pb, 1e-13, 80);
            const CurvePoint cp = c.eval(r.x);
            const CurvePoint cq = c.eval(r.y);
            if (std::hypot(cp.x_tilde - cq.x_tilde, cp.u - cq.u) > 1e-9) continue;
            SelfIntersection si;
            si.param_a = std::min(r.x, r.y);
            si.param_b = std::max(r.x, r.y);
            si.x_tilde = cp.x_tilde;
            si.u = cp.u;
            bool dup = false;
            for (const auto& e : f.self_intersections)
                if (std::abs(e.param_a - si.param_a) + std::abs(e.param_b - si.param_b) < 1e-8)
                    dup = true;
            if (!dup) f.self_intersections.push_back(si);
        }
    }

    f.peak_param = crest;
    if (!f.self_intersections.empty() || f.vertical_tangents.size() >= 2)
        f.implied_kind = PatternKind::Loop;
    else if (f.vertical_tangents.size() == 1)
        f.implied_kind = PatternKind::Cusp;
    else
        f.implied_kind = PatternKind::Hump;

    c.features = f;
    return f;
}

std::vector<InvertedPoint> invert_map(const SolitonReal& s, double x_tilde, double y_tilde,
                                      double t_tilde) {
    // The symmetric section has y - x pinned to the offset difference; a
    // target off the section plane has no pre-image.
    if (std::abs((y_tilde - x_tilde) - (s.y0_tilde - s.x0_tilde)) > 1e-9 * (1.0 + std::abs(x_tilde)))
        return {};

    const double omega = s.omega1 + s.omega2;                 // < 0
    const double phase_const = s.K * t_tilde + s.theta0;
    auto x_of = [&](double th) {
        return (phase_const - th) / omega - 2.0 * s.K * (std::tanh(th) + 1.0) + s.x0_tilde;
    };
    auto f = [&](double th) { return x_of(th) - x_tilde; };
    auto df = [&](double th) {
        const double sc = sech(th);
        return -1.0 / omega - 2.0 * s.K * sc * sc;
    };

    const double min_slope = 1.0 + 2.0 * s.K * s.K * s.v();
    std::vector<std::pair<double, double>> pieces;  // monotone intervals [lo, hi]
    const double kInf = std::numeric_limits<double>::infinity();
    if (min_slope < -1e-12) {
        const double th_vt = std::acosh(std::sqrt(2.0 * s.K * s.K * -s.v()));
        pieces = {{-kInf, -th_vt}, {-th_vt, th_vt}, {th_vt, kInf}};
    } else {
        pieces = {{-kInf, kInf}};
    }

    std::vector<InvertedPoint> out;
    for (auto [lo, hi] : pieces) {
        // Establish a finite sign-change bracket. The map is monotone on each
        // piece and asymptotically linear in theta, so doubling steps escape
        // the flat crest region quickly.
        double a, b;
        if (std::isinf(lo) && std::isinf(hi)) {
            a = -1.0;
            b = 1.0;
            for (double step = 1.0; f(a) * f(b) > 0.0 && step < 1e7; step *= 2.0) {
                a = -step;
                b = step;
            }
        } else if (std::isinf(lo)) {
            b = hi;
            a = b - 1.0;
            for (double step = 1.0; f(a) * f(b) > 0.0 && step < 1e7; step *= 2.0) a = b - step;
        } else if (std::isinf(hi)) {
            a = lo;
            b = a + 1.0;
            for (double step = 1.0; f(a) * f(b) > 0.0 && step < 1e7; step *= 2.0) b = a + step;
        } else {
            a = lo;
            b = hi;
        }
        if (!(f(a) * f(b) <= 0.0)) continue;  // no root on this piece
        const RootResult r = newton_bracketed(f, df, a, b, 1e-13);
        const double resid = std::abs(f(r.x));
        if (resid > 1e-10 * (1.0 + std::abs(x_tilde)))
            throw NumericError("invert_map: branch residual " + g17(resid) +
                               " exceeds tolerance; bracket [" + g17(a) + ", " + g17(b) + "]");
        InvertedPoint p;
        p.theta = r.x;
        p.u = 2.0 * s.K * sech(r.x);
        p.x_residual = resid;
        bool dup = false;
        for (const auto& e : out)
            if (std::abs(e.theta - p.theta) < 1e-8) dup = true;
        if (!dup) out.push_back(p);
    }
    std::sort(out.begin(), out.end(),
              [](const InvertedPoint& a, const InvertedPoint& b) { return a.theta < b.theta; });
    return out;
}

void export_curve(const ParametricCurve& c, std::ostream& os, CurveFormat fmt) {
    if (fmt == CurveFormat::Csv) {
        os << (c.is_complex ? "param,theta,x_tilde,y_tilde,u,q_re,q_im,slope"
                            : "param,theta,x_tilde,y_tilde,u,slope")
           << '\n';
        for (std::size_t i = 0; i < c.size(); ++i) {
            os << g17(c.param[i]) << ',' << g17(c.theta[i]) << ',' << g17(c.x_tilde[i]) << ','
               << g17(c.y_tilde[i]) << ',' << g17(c.u[i]);
            if (c.is_complex) os << ',' << g17(c.q_re[i]) << ',' << g17(c.q_im[i]);
            os << ',' << g17(c.slope[i]) << '\n';
        }
        return;
    }
    nlohmann::json j;
    j["section"] = {{"t_tilde", c.section.t_tilde},
                    {"dir", {c.section.dir1, c.section.dir2}},
                    {"theta_halfwidth", c.section.theta_halfwidth},
                    {"n", c.section.n}};
    j["complex"] = c.is_complex;
    j["columns"] = {{"param", c.param},   {"theta", c.theta}, {"x_tilde", c.x_tilde},
                    {"y_tilde", c.y_tilde}, {"u", c.u},       {"slope", c.slope}};
    if (c.is_complex) {
        j["columns"]["q_re"] = c.q_re;
        j["columns"]["q_im"] = c.q_im;
    }
    if (c.features) {
        nlohmann::json sj = nlohmann::json::array();
        for (const auto& si : c.features->self_intersections)
            sj.push_back({{"param_a", si.param_a},
                          {"param_b", si.param_b},
                          {"x_tilde", si.x_tilde},
                          {"u", si.u}});
        j["features"] = {{"vertical_tangents", c.features->vertical_tangents},
                         {"self_intersections", sj},
                         {"peak_param", c.features->peak_param},
                         {"implied_kind", to_string(c.features->implied_kind)}};
    }
    os << j.dump(2) << '\n';
}

ParametricCurve import_curve_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header))
        throw ValidationError("curve import: empty stream");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    ParametricCurve c;
    if (header == "param,theta,x_tilde,y_tilde,u,slope")
        c.is_complex = false;
    else if (header == "param,theta,x_tilde,y_tilde,u,q_re,q_im,slope")
        c.is_complex = true;
    else
        throw ValidationError("curve import: unrecognized header '" + header + "'");
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> vals;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::string cell =
                line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            vals.push_back(parse_number(cell));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        const std::size_t want = c.is_complex ? 8u : 6u;
        if (vals.size() != want)
            throw ValidationError("curve import: expected " + std::to_string(want) +
                                  " columns, got " + std::to_string(vals.size()));
        c.param.push_back(vals[0]);
        c.theta.push_back(vals[1]);
        c.x_tilde.push_back(vals[2]);
        c.y_tilde.push_back(vals[3]);
        c.u.push_back(vals[4]);
        if (c.is_complex) {
            c.q_re.push_back(vals[5]);
            c.q_im.push_back(vals[6]);
            c.slope.push_back(vals[7]);
        } else {
            c.slope.push_back(vals[5]);
        }
    }
    return c;
}

} // namespace relaxwave
