#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relaxwave {

// Bad inputs or violated pre-conditions. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure inside an otherwise valid computation (exit code 1).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A sampled curve is too coarse to resolve its features; caller should
// resample with a finer grid.
class ResampleRequest : public ValidationError {
public:
    ResampleRequest(const std::string& what, double feature_gap, double sample_spacing)
        : ValidationError(what), feature_gap(feature_gap), sample_spacing(sample_spacing) {}
    double feature_gap;
    double sample_spacing;
};

// Field exceeded the blow-up guard during time stepping.
class BlowUpError : public NumericError {
public:
    BlowUpError(const std::string& what, std::size_t step, double peak)
        : NumericError(what), step(step), peak(peak) {}
    std::size_t step;
    double peak;
};

} // namespace relaxwave
