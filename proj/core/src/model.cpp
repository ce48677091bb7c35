#include "benchlab/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "benchlab/errors.hpp"

namespace benchlab {

namespace {

bool is_placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

// Snap range-generated values to integers when they are integral up to
// floating-point dust, so log decades render as 1000, not 1000.0000000000001.
double snap(double v) {
    const double r = std::round(v);
    if (std::fabs(v - r) <= 1e-9 * std::max(1.0, std::fabs(v))) return r;
    return v;
}

std::vector<double> range_points(ValueDomain::Kind kind, double start, double stop,
                                 std::size_t count) {
    std::vector<double> out;
    if (count == 0) return out;
    if (count == 1) {
        out.push_back(snap(start));
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        double v;
        if (kind == ValueDomain::Kind::Linear) {
            v = start + t * (stop - start);
        } else {
            v = std::exp(std::log(start) + t * (std::log(stop) - std::log(start)));
        }
        out.push_back(snap(v));
    }
    return out;
}

}  // namespace

std::string format_param_value(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

ValueDomain ValueDomain::list(std::vector<std::string> vals) {
    ValueDomain d;
    d.kind = Kind::List;
    d.values = std::move(vals);
    return d;
}

ValueDomain ValueDomain::linear(double start, double stop, std::size_t count) {
    ValueDomain d;
    d.kind = Kind::Linear;
    d.start = start;
    d.stop = stop;
    d.count = count;
    return d;
}

ValueDomain ValueDomain::log(double start, double stop, std::size_t count) {
    ValueDomain d;
    d.kind = Kind::Log;
    d.start = start;
    d.stop = stop;
    d.count = count;
    return d;
}

std::vector<std::string> ValueDomain::expand() const {
    if (kind == Kind::List) return values;
    std::vector<std::string> out;
    for (double v : range_points(kind, start, stop, count)) out.push_back(format_param_value(v));
    return out;
}

std::vector<double> ValueDomain::expand_numeric() const {
    if (kind != Kind::List) return range_points(kind, start, stop, count);
    std::vector<double> out;
    for (const std::string& v : values) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || (end && *end != '\0'))
            throw Error("parameter value '" + v + "' is not a number");
        out.push_back(x);
    }
    return out;
}

const Variant* BenchmarkSpec::find_variant(const std::string& name) const {
    for (const Variant& v : variants)
        if (v.name == name) return &v;
    return nullptr;
}

std::vector<ParamPoint> BenchmarkSpec::param_points() const {
    std::vector<ParamPoint> points;
    points.emplace_back();
    for (const auto& [name, domain] : params) {
        std::vector<ParamPoint> next;
        for (const ParamPoint& base : points) {
            for (const std::string& value : domain.expand()) {
                ParamPoint p = base;
                p.assignments[name] = value;
                next.push_back(std::move(p));
            }
        }
        points = std::move(next);
    }
    return points;
}

bool ConcreteInvocation::operator==(const ConcreteInvocation& other) const {
    return argv == other.argv && env == other.env;
}

std::string to_string(Diagnostic::Code c) {
    switch (c) {
        case Diagnostic::Code::EmptyId: return "EmptyId";
        case Diagnostic::Code::DuplicateVariant: return "DuplicateVariant";
        case Diagnostic::Code::EmptyBinding: return "EmptyBinding";
        case Diagnostic::Code::UnboundPlaceholder: return "UnboundPlaceholder";
        case Diagnostic::Code::ConflictingBinding: return "ConflictingBinding";
        case Diagnostic::Code::EmptyParamDomain: return "EmptyParamDomain";
        case Diagnostic::Code::BadExpectedRange: return "BadExpectedRange";
        case Diagnostic::Code::BadRunPolicy: return "BadRunPolicy";
        case Diagnostic::Code::MalformedTemplate: return "MalformedTemplate";
        case Diagnostic::Code::IdenticalVariants: return "IdenticalVariants";
        case Diagnostic::Code::NoVariants: return "NoVariants";
        case Diagnostic::Code::DuplicateSpecId: return "DuplicateSpecId";
    }
    return "?";
}

std::vector<std::string> find_placeholders(const std::string& tmpl) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
                ++i;
                continue;
            }
            const std::size_t start = i + 1;
            std::size_t j = start;
            while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
            if (j == start || j >= tmpl.size() || tmpl[j] != '}')
                throw MalformedTemplateError("malformed placeholder near position " +
                                             std::to_string(i) + " in '" + tmpl + "'");
            std::string name = tmpl.substr(start, j - start);
            if (seen.insert(name).second) names.push_back(std::move(name));
            i = j;
        } else if (tmpl[i] == '}') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
                ++i;
                continue;
            }
            throw MalformedTemplateError("unbalanced '}' at position " + std::to_string(i) +
                                         " in '" + tmpl + "'");
        }
    }
    return names;
}

std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& values,
                       const std::string& where) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
                out.push_back('{');
                ++i;
                continue;
            }
            const std::size_t start = i + 1;
            std::size_t j = start;
            while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
            if (j == start || j >= tmpl.size() || tmpl[j] != '}')
                throw MalformedTemplateError("malformed placeholder near position " +
                                             std::to_string(i) + " in '" + tmpl + "'");
            const std::string name = tmpl.substr(start, j - start);
            auto it = values.find(name);
            if (it == values.end()) throw UnboundPlaceholderError(name, where);
            out += it->second;
            i = j;
        } else if (tmpl[i] == '}') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
                out.push_back('}');
                ++i;
                continue;
            }
            throw MalformedTemplateError("unbalanced '}' at position " + std::to_string(i) +
                                         " in '" + tmpl + "'");
        } else {
            out.push_back(tmpl[i]);
        }
    }
    return out;
}

std::vector<std::string> tokenize_command(const std::string& command) {
    std::vector<std::string> tokens;
    std::string current;
    bool in_token = false;
    std::size_t i = 0;
    while (i < command.size()) {
        const char c = command[i];
        if (c == '\'' || c == '"') {
            const char quote = c;
            in_token = true;
            ++i;
            while (i < command.size() && command[i] != quote) {
                if (quote == '"' && command[i] == '\\' && i + 1 < command.size() &&
                    (command[i + 1] == '"' || command[i + 1] == '\\')) {
                    ++i;
                }
                current.push_back(command[i]);
                ++i;
            }
            if (i >= command.size())
                throw MalformedTemplateError("unterminated quote in command '" + command + "'");
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (in_token) {
                tokens.push_back(std::move(current));
                current.clear();
                in_token = false;
            }
            ++i;
        } else if (c == '\\' && i + 1 < command.size()) {
            current.push_back(command[i + 1]);
            in_token = true;
            i += 2;
        } else {
            current.push_back(c);
            in_token = true;
            ++i;
        }
    }
    if (in_token) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

// Variant bindings and point assignments merged; same name on both sides is a
// hard error, not shadowing.
std::map<std::string, std::string> merge_bindings(const Variant& variant, const ParamPoint& point) {
    std::map<std::string, std::string> merged = point.assignments;
    for (const auto& [name, value] : variant.bindings) {
        if (merged.count(name)) throw ConflictingBindingError(name);
        merged[name] = value;
    }
    return merged;
}

}  // namespace

ConcreteInvocation resolve_invocation(const BenchmarkSpec& spec, const Variant& variant,
                                      const ParamPoint& point) {
    const auto values = merge_bindings(variant, point);

    ConcreteInvocation inv;
    inv.spec_id = spec.id;
    inv.variant_name = variant.name;
    inv.param_point = point;
    inv.command_line = substitute(spec.command_template, values, "command of '" + spec.id + "'");
    for (const std::string& token : tokenize_command(spec.command_template))
        inv.argv.push_back(substitute(token, values, "command of '" + spec.id + "'"));
    for (const auto& [name, tmpl] : spec.env_template)
        inv.env[name] = substitute(tmpl, values, "env " + name + " of '" + spec.id + "'");
    return inv;
}

namespace {

constexpr std::size_t kIdentityEnumerationCap = 4096;

void check_identical_variants(const BenchmarkSpec& spec, std::vector<Diagnostic>& out) {
    if (spec.variants.size() < 2) return;

    std::vector<ParamPoint> points;
    std::size_t total = 1;
    for (const auto& [name, domain] : spec.params) {
        total *= std::max<std::size_t>(domain.expand().size(), 1);
        if (total > kIdentityEnumerationCap) break;
    }
    if (total <= kIdentityEnumerationCap) {
        points = spec.param_points();
    } else {
        // Domain too large to enumerate; equal binding maps still imply
        // identical invocations at every point.
        points.emplace_back();
        for (std::size_t a = 0; a < spec.variants.size(); ++a)
            for (std::size_t b = a + 1; b < spec.variants.size(); ++b)
                if (spec.variants[a].bindings == spec.variants[b].bindings)
                    out.push_back({Diagnostic::Code::IdenticalVariants, spec.id,
                                   "variants '" + spec.variants[a].name + "' and '" +
                                       spec.variants[b].name + "' have identical bindings"});
        return;
    }

    // Resolve every variant at every point; a pair identical everywhere is
    // almost certainly a copy-paste mistake in the spec.
    std::vector<std::vector<ConcreteInvocation>> resolved(spec.variants.size());
    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
        for (const ParamPoint& p : points) {
            try {
                resolved[v].push_back(resolve_invocation(spec, spec.variants[v], p));
            } catch (const Error&) {
                return;  // coverage diagnostics already reported elsewhere
            }
        }
    }
    for (std::size_t a = 0; a < spec.variants.size(); ++a) {
        for (std::size_t b = a + 1; b < spec.variants.size(); ++b) {
            if (resolved[a] == resolved[b]) {
                out.push_back({Diagnostic::Code::IdenticalVariants, spec.id,
                               "variants '" + spec.variants[a].name + "' and '" +
                                   spec.variants[b].name +
                                   "' resolve to identical invocations at every parameter point"});
            }
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_spec(const BenchmarkSpec& spec) {
    std::vector<Diagnostic> out;

    if (spec.id.empty())
        out.push_back({Diagnostic::Code::EmptyId, spec.id, "benchmark id must be non-empty"});

    if (spec.variants.empty())
        out.push_back({Diagnostic::Code::NoVariants, spec.id,
                       "benchmark '" + spec.id + "' declares no variants"});

    std::set<std::string> variant_names;
    for (const Variant& v : spec.variants) {
        if (!variant_names.insert(v.name).second)
            out.push_back({Diagnostic::Code::DuplicateVariant, spec.id,
                           "duplicate variant name '" + v.name + "'"});
        for (const auto& [name, value] : v.bindings) {
            if (value.empty())
                out.push_back({Diagnostic::Code::EmptyBinding, spec.id,
                               "variant '" + v.name + "' binds '" + name + "' to an empty value"});
        }
    }

    for (const auto& [name, domain] : spec.params) {
        if (domain.expand().empty())
            out.push_back({Diagnostic::Code::EmptyParamDomain, spec.id,
                           "parameter '" + name + "' has an empty domain"});
        for (const Variant& v : spec.variants) {
            if (v.bindings.count(name))
                out.push_back({Diagnostic::Code::ConflictingBinding, spec.id,
                               "'" + name + "' is both a parameter and a binding of variant '" +
                                   v.name + "'"});
        }
    }

    // Placeholder coverage across all templates.
    std::vector<std::pair<std::string, std::string>> templates;
    templates.emplace_back(spec.command_template, "command_template");
    for (const auto& [name, tmpl] : spec.env_template)
        templates.emplace_back(tmpl, "env_template[" + name + "]");
    if (spec.check_template) templates.emplace_back(*spec.check_template, "check_template");

    bool templates_ok = true;
    for (const auto& [tmpl, where] : templates) {
        std::vector<std::string> names;
        try {
            names = find_placeholders(tmpl);
        } catch (const MalformedTemplateError& e) {
            out.push_back({Diagnostic::Code::MalformedTemplate, spec.id, e.what()});
            templates_ok = false;
            continue;
        }
        for (const std::string& name : names) {
            if (spec.params.count(name)) continue;
            for (const Variant& v : spec.variants) {
                if (!v.bindings.count(name)) {
                    out.push_back({Diagnostic::Code::UnboundPlaceholder, spec.id,
                                   "placeholder {" + name + "} in " + where +
                                       " is not covered by params or variant '" + v.name + "'"});
                    templates_ok = false;
                }
            }
            if (spec.variants.empty()) {
                out.push_back({Diagnostic::Code::UnboundPlaceholder, spec.id,
                               "placeholder {" + name + "} in " + where + " has no source"});
                templates_ok = false;
            }
        }
    }

    if (spec.expected_wall_range) {
        const auto& [low, high] = *spec.expected_wall_range;
        if (!(0.0 < low && low < high))
            out.push_back({Diagnostic::Code::BadExpectedRange, spec.id,
                           "expected_wall_range requires 0 < low < high"});
    }

    const RunPolicy& rp = spec.run_policy;
    if (rp.mode == RunPolicy::Mode::Fixed) {
        if (rp.fixed_runs == 0)
            out.push_back({Diagnostic::Code::BadRunPolicy, spec.id, "fixed_runs must be positive"});
    } else {
        if (rp.min_runs == 0)
            out.push_back({Diagnostic::Code::BadRunPolicy, spec.id, "min_runs must be positive"});
        if (rp.min_runs > rp.max_runs)
            out.push_back(
                {Diagnostic::Code::BadRunPolicy, spec.id, "min_runs must not exceed max_runs"});
        if (rp.min_total_time < 0.0)
            out.push_back(
                {Diagnostic::Code::BadRunPolicy, spec.id, "min_total_time must be >= 0"});
    }

    if (templates_ok) check_identical_variants(spec, out);
    return out;
}

std::vector<Diagnostic> validate_project(const std::vector<BenchmarkSpec>& specs) {
    std::vector<Diagnostic> out;
    std::set<std::string> ids;
    for (const BenchmarkSpec& spec : specs) {
        if (!ids.insert(spec.id).second)
            out.push_back({Diagnostic::Code::DuplicateSpecId, spec.id,
                           "duplicate benchmark id '" + spec.id + "'"});
        auto diags = validate_spec(spec);
        out.insert(out.end(), diags.begin(), diags.end());
    }
    return out;
}

}  // namespace benchlab
