#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace benchlab {

// One axis of parameter values. Values are carried as text and substituted
// verbatim; the benchmarked program owns their parsing. Only the sweep module
// interprets them numerically.
struct ValueDomain {
    enum class Kind { List, Linear, Log };
    Kind kind = Kind::List;
    std::vector<std::string> values;  // Kind::List
    double start = 0.0;               // ranges
    double stop = 0.0;
    std::size_t count = 0;

    static ValueDomain list(std::vector<std::string> vals);
    static ValueDomain linear(double start, double stop, std::size_t count);
    static ValueDomain log(double start, double stop, std::size_t count);

    // Concrete text values, in declaration/ascending order.
    std::vector<std::string> expand() const;
    // Numeric view of the domain; throws Error when a list value is not a number.
    std::vector<double> expand_numeric() const;
};

// Renders a double the way parameter values are written into commands:
// integral values without a decimal point, everything else shortest-exact.
std::string format_param_value(double v);

struct Variant {
    std::string name;
    std::map<std::string, std::string> bindings;
};

struct ParamPoint {
    std::map<std::string, std::string> assignments;
};

struct RunPolicy {
    enum class Mode { Fixed, Adaptive };
    Mode mode = Mode::Adaptive;
    std::size_t fixed_runs = 10;      // Mode::Fixed
    std::size_t min_runs = 10;        // Mode::Adaptive
    double min_total_time = 3.0;      // seconds, Mode::Adaptive
    std::size_t max_runs = 100;       // Mode::Adaptive
};

struct BenchmarkSpec {
    std::string id;
    std::string command_template;                     // `{name}` placeholders, `{{` escapes
    std::map<std::string, std::string> env_template;  // name -> value template
    std::map<std::string, ValueDomain> params;
    std::vector<Variant> variants;
    std::size_t warmup_count = 0;
    RunPolicy run_policy;
    std::optional<std::string> check_template;
    std::optional<std::pair<double, double>> expected_wall_range;  // seconds
    std::vector<std::string> tags;

    const Variant* find_variant(const std::string& name) const;
    // Cartesian product of all param domains, in lexicographic param order.
    std::vector<ParamPoint> param_points() const;
};

// Fully substituted command, ready to execute. No `{name}` remains anywhere.
struct ConcreteInvocation {
    std::vector<std::string> argv;
    std::string command_line;  // substituted but untokenized, for shell mode and display
    std::map<std::string, std::string> env;
    std::string spec_id;
    std::string variant_name;
    ParamPoint param_point;

    bool operator==(const ConcreteInvocation& other) const;
};

struct Diagnostic {
    enum class Code {
        EmptyId,
        DuplicateVariant,
        EmptyBinding,
        UnboundPlaceholder,
        ConflictingBinding,
        EmptyParamDomain,
        BadExpectedRange,
        BadRunPolicy,
        MalformedTemplate,
        IdenticalVariants,
        NoVariants,
        DuplicateSpecId,
    };
    Code code;
    std::string spec_id;
    std::string message;
};

std::string to_string(Diagnostic::Code c);

// -- placeholder machinery ----------------------------------------------------

// Placeholder names appearing in a template, in order of first appearance.
// Throws MalformedTemplateError on unbalanced braces.
std::vector<std::string> find_placeholders(const std::string& tmpl);

// Replaces every {name} with its value; `{{`/`}}` become literal braces.
// Throws UnboundPlaceholderError / MalformedTemplateError.
std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& values,
                       const std::string& where);

// Whitespace tokenizer with single/double quote grouping, applied to command
// templates before substitution so bound values with spaces stay one argument.
std::vector<std::string> tokenize_command(const std::string& command);

// -- operations -----------------------------------------------------------------

// Throws UnboundPlaceholderError, ConflictingBindingError, MalformedTemplateError.
ConcreteInvocation resolve_invocation(const BenchmarkSpec& spec, const Variant& variant,
                                      const ParamPoint& point);

// All invariant violations; empty iff resolve_invocation succeeds for every
// (variant, point) pair and all structural invariants hold.
std::vector<Diagnostic> validate_spec(const BenchmarkSpec& spec);

// Project-level validation: per-spec diagnostics plus duplicate spec ids.
std::vector<Diagnostic> validate_project(const std::vector<BenchmarkSpec>& specs);

}  // namespace benchlab
