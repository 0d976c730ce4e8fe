#pragma once

#include <optional>
#include <string>

#include "relaxwave/soliton.hpp"

namespace relaxwave {

enum class PatternKind { Loop, Cusp, Hump, NoPattern };

const char* to_string(PatternKind k);

struct PatternClass {
    PatternKind kind = PatternKind::Hump;
    bool rotating = false;
    std::optional<double> Omega;  // attached for rotating patterns only
    double margin = 0.0;          // distance of alpha_tilde from the nearest threshold
};

// Classification boundaries. The rotating pair is defined only inside the
// window 1/|v| < zeta < 2/|v|, where 0 < alpha_c_rot < alpha_s holds.
struct Thresholds {
    double alpha_c_static = 0.0;
    double alpha_c_rot = 0.0;
    double alpha_s = 0.0;
};

inline constexpr double kClassifyTol = 1e-9;  // absolute band defining Cusp

double critical_alpha_static(long double v);
Thresholds rotating_thresholds(long double zeta, long double v);

PatternClass classify_static(double alpha_tilde, double v);
PatternClass classify_rotating(double alpha_tilde, double zeta, double v);

// Independent oracle: classifies by the sign of the minimum slope of the
// physical-frame section map, min_theta dx/dtau = 1 + 2 K^2 v. Because K comes
// from the dispersion solve rather than from the threshold formula, agreement
// with classify_static cross-checks the dispersion algebra.
PatternClass classify_by_slope_oracle(const SolitonReal& s);

nlohmann::json pattern_to_json(const PatternClass& c, const std::optional<Thresholds>& th);

} // namespace relaxwave
