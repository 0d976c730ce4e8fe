#include "relaxwave/numfmt.hpp"
#include "relaxwave/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace relaxwave {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string normalize_decimal(std::string_view text) {
    std::string s;
    s.reserve(text.size());
    bool replaced = false;
    for (char c : text) {
        if (c == ',') {
            if (replaced)
                throw ValidationError("malformed number (multiple decimal separators): '" +
                                      std::string(text) + "'");
            replaced = true;
            s.push_back('.');
        } else {
            s.push_back(c);
        }
    }
    if (replaced && s.find('.') != s.rfind('.'))
        throw ValidationError("malformed number (mixed separators): '" + std::string(text) + "'");
    return s;
}

} // namespace

double parse_number(std::string_view text) {
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        const double num = parse_number(text.substr(0, slash));
        const double den = parse_number(text.substr(slash + 1));
        if (den == 0.0)
            throw ValidationError("malformed ratio (zero denominator): '" + std::string(text) + "'");
        return num / den;
    }
    const std::string s = normalize_decimal(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ValidationError("malformed number: '" + std::string(text) + "'");
    return v;
}

long double parse_number_ld(std::string_view text) {
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        const long double num = parse_number_ld(text.substr(0, slash));
        const long double den = parse_number_ld(text.substr(slash + 1));
        if (den == 0.0L)
            throw ValidationError("malformed ratio (zero denominator): '" + std::string(text) + "'");
        return num / den;
    }
    const std::string s = normalize_decimal(text);
    char* end = nullptr;
    const long double v = std::strtold(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ValidationError("malformed number: '" + std::string(text) + "'");
    return v;
}

} // namespace relaxwave
