#pragma once

// Environment-variable interface shared by the fixture programs: fail
// helpfully, exit 2, when a variable is missing or invalid.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

namespace fixture {

inline std::optional<std::string> get_env_raw(const char* var) {
    const char* v = std::getenv(var);
    if (!v) return std::nullopt;
    return std::string(v);
}

[[noreturn]] inline void fail_missing(const char* var) {
    std::fprintf(stderr, "environment variable \"%s\" is missing\n", var);
    std::exit(2);
}

[[noreturn]] inline void fail_invalid(const char* var, const std::string& value,
                                      const char* descr) {
    std::fprintf(stderr, "environment variable \"%s\" has incorrect value \"%s\"; expected %s\n",
                 var, value.c_str(), descr);
    std::exit(2);
}

inline std::optional<long long> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    // underscores allowed as digit separators: SIZE=10_000
    std::string digits;
    for (char c : s)
        if (c != '_') digits.push_back(c);
    char* end = nullptr;
    const long long v = std::strtoll(digits.c_str(), &end, 10);
    if (end == digits.c_str() || *end != '\0') return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return std::nullopt;
    return v;
}

inline long long require_int(const char* var) {
    const auto raw = get_env_raw(var);
    if (!raw) fail_missing(var);
    const auto v = parse_int(*raw);
    if (!v) fail_invalid(var, *raw, "a number");
    return *v;
}

inline long long int_or(const char* var, long long fallback) {
    const auto raw = get_env_raw(var);
    if (!raw) return fallback;
    const auto v = parse_int(*raw);
    if (!v) fail_invalid(var, *raw, "a number");
    return *v;
}

inline double double_or(const char* var, double fallback) {
    const auto raw = get_env_raw(var);
    if (!raw) return fallback;
    const auto v = parse_double(*raw);
    if (!v) fail_invalid(var, *raw, "a number");
    return *v;
}

}  // namespace fixture
