#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "relaxwave/classify.hpp"
#include "relaxwave/soliton.hpp"

namespace relaxwave {

// A curve is cut along a straight section through (T1,T2)-space at fixed X:
// T_i = dir_i * param. The default symmetric direction (1,1) is the one for
// which the loop/cusp/hump thresholds hold exactly.
struct SectionSpec {
    double t_tilde = 0.0;
    double dir1 = 1.0, dir2 = 1.0;
    double theta_halfwidth = 10.0;  // window |theta| <= halfwidth around the crest
    int n = 2001;
};

struct CurvePoint {
    double theta = 0, x_tilde = 0, y_tilde = 0, u = 0, slope = 0;
    Cplx q{0.0, 0.0};
};

struct SelfIntersection {
    double param_a = 0, param_b = 0;  // two parameter values landing on one point
    double x_tilde = 0, u = 0;
};

struct CurveFeatures {
    std::vector<double> vertical_tangents;  // parameter values, ascending
    std::vector<SelfIntersection> self_intersections;
    double peak_param = 0;
    PatternKind implied_kind = PatternKind::Hump;
};

struct ParametricCurve {
    SectionSpec section;
    bool is_complex = false;
    std::vector<double> param, theta, x_tilde, y_tilde, u, q_re, q_im, slope;
    std::optional<CurveFeatures> features;
    std::function<CurvePoint(double)> eval;  // closed-form point for refinement

    std::size_t size() const { return param.size(); }
};

ParametricCurve sample_section(const SolitonReal& s, const SectionSpec& spec);
ParametricCurve sample_section(const SolitonComplex& s, const SectionSpec& spec);
ParametricCurve sample_section(const SolitonReal& s, double t_tilde,
                               double theta_halfwidth = 10.0, int n = 2001);
ParametricCurve sample_section(const SolitonComplex& s, double t_tilde,
                               double theta_halfwidth = 10.0, int n = 2001);

// Vertical tangents from slope sign changes (bisection-refined to 1e-10 in
// parameter), self-intersections from a segment-pair sweep polished by a 2D
// solve, pattern kind from the feature counts. Stores the report on the curve
// and returns it. Throws ResampleRequest when features sit inside one sample
// spacing.
CurveFeatures detect_features(ParametricCurve& c);

struct InvertedPoint {
    double theta = 0, u = 0, x_residual = 0;
};

// All pre-images of (x_tilde, y_tilde) on the symmetric section at fixed
// t_tilde, ascending in theta. Monotone-piece decomposition plus safeguarded
// Newton; inconsistent y_tilde (off the section by > 1e-9) yields an empty
// list.
std::vector<InvertedPoint> invert_map(const SolitonReal& s, double x_tilde, double y_tilde,
                                      double t_tilde);

enum class CurveFormat { Csv, Json };

void export_curve(const ParametricCurve& c, std::ostream& os, CurveFormat fmt);
ParametricCurve import_curve_csv(std::istream& is);

} // namespace relaxwave
