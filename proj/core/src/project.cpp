#include "benchlab/project.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "benchlab/envcheck.hpp"
#include "benchlab/errors.hpp"

namespace benchlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Unknown fields are load errors: a typo in a spec file must fail loudly, not
// silently measure something else.
void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw LoadError("unknown field '" + key + "' in " + context);
    }
}

ValueDomain parse_domain(const json& j, const std::string& context) {
    require_keys(j, {"values", "range"}, context);
    if (j.contains("values") && j.contains("range"))
        throw LoadError(context + " declares both 'values' and 'range'");
    if (j.contains("values")) {
        std::vector<std::string> vals;
        for (const json& v : j.at("values")) {
            if (v.is_string())
                vals.push_back(v.get<std::string>());
            else if (v.is_number_integer())
                vals.push_back(format_param_value(static_cast<double>(v.get<long long>())));
            else if (v.is_number())
                vals.push_back(format_param_value(v.get<double>()));
            else
                throw LoadError(context + ": parameter values must be strings or numbers");
        }
        return ValueDomain::list(std::move(vals));
    }
    if (!j.contains("range")) throw LoadError(context + " needs 'values' or 'range'");
    const json& r = j.at("range");
    require_keys(r, {"scale", "start", "stop", "count"}, context + ".range");
    const std::string scale = r.at("scale").get<std::string>();
    const double start = r.at("start").get<double>();
    const double stop = r.at("stop").get<double>();
    const std::size_t count = r.at("count").get<std::size_t>();
    if (scale == "linear") return ValueDomain::linear(start, stop, count);
    if (scale == "log") {
        if (start <= 0.0 || stop <= 0.0)
            throw LoadError(context + ": log ranges need positive bounds");
        return ValueDomain::log(start, stop, count);
    }
    throw LoadError(context + ": scale must be linear or log");
}

RunPolicy parse_policy(const json& j, const std::string& context) {
    require_keys(j, {"mode", "fixed_runs", "min_runs", "min_total_time", "max_runs"}, context);
    RunPolicy p;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "fixed") {
        p.mode = RunPolicy::Mode::Fixed;
        if (j.contains("fixed_runs")) p.fixed_runs = j.at("fixed_runs").get<std::size_t>();
    } else if (mode == "adaptive") {
        p.mode = RunPolicy::Mode::Adaptive;
        if (j.contains("min_runs")) p.min_runs = j.at("min_runs").get<std::size_t>();
        if (j.contains("min_total_time")) p.min_total_time = j.at("min_total_time").get<double>();
        if (j.contains("max_runs")) p.max_runs = j.at("max_runs").get<std::size_t>();
    } else {
        throw LoadError(context + ": run_policy mode must be fixed or adaptive");
    }
    return p;
}

BenchmarkSpec parse_spec(const json& j) {
    require_keys(j,
                 {"id", "command_template", "env_template", "params", "variants", "warmup_count",
                  "run_policy", "check_template", "expected_wall_range", "tags"},
                 "benchmark");
    BenchmarkSpec spec;
    spec.id = j.at("id").get<std::string>();
    const std::string ctx = "benchmark '" + spec.id + "'";
    spec.command_template = j.at("command_template").get<std::string>();

    if (j.contains("env_template"))
        spec.env_template = j.at("env_template").get<std::map<std::string, std::string>>();

    if (j.contains("params")) {
        for (const auto& [name, domain] : j.at("params").items())
            spec.params[name] = parse_domain(domain, ctx + " param '" + name + "'");
    }

    for (const json& v : j.at("variants")) {
        require_keys(v, {"name", "bindings"}, ctx + " variant");
        Variant variant;
        variant.name = v.at("name").get<std::string>();
        if (v.contains("bindings"))
            variant.bindings = v.at("bindings").get<std::map<std::string, std::string>>();
        spec.variants.push_back(std::move(variant));
    }

    if (j.contains("warmup_count")) spec.warmup_count = j.at("warmup_count").get<std::size_t>();
    if (j.contains("run_policy"))
        spec.run_policy = parse_policy(j.at("run_policy"), ctx + " run_policy");
    if (j.contains("check_template"))
        spec.check_template = j.at("check_template").get<std::string>();
    if (j.contains("expected_wall_range")) {
        const json& r = j.at("expected_wall_range");
        if (!r.is_array() || r.size() != 2)
            throw LoadError(ctx + ": expected_wall_range must be [low, high]");
        spec.expected_wall_range = {r[0].get<double>(), r[1].get<double>()};
    }
    if (j.contains("tags")) spec.tags = j.at("tags").get<std::vector<std::string>>();
    return spec;
}

QualitativeClaim parse_claim(const json& j) {
    require_keys(j, {"claim_id", "subject_variant", "reference_variant", "spec_ids", "kind",
                     "margin"},
                 "claim");
    QualitativeClaim c;
    c.claim_id = j.at("claim_id").get<std::string>();
    c.subject_variant = j.at("subject_variant").get<std::string>();
    c.reference_variant = j.at("reference_variant").get<std::string>();
    c.spec_ids = j.at("spec_ids").get<std::vector<std::string>>();
    if (j.contains("kind")) c.kind = j.at("kind").get<std::string>();
    if (c.kind != "noticeably_faster")
        throw LoadError("claim '" + c.claim_id + "': unsupported kind '" + c.kind + "'");
    if (j.contains("margin")) c.margin = j.at("margin").get<double>();
    if (c.margin < 0.0) throw LoadError("claim '" + c.claim_id + "': margin must be >= 0");
    if (c.subject_variant == c.reference_variant)
        throw LoadError("claim '" + c.claim_id + "': subject and reference must differ");
    return c;
}

ProjectSettings parse_settings(const json& j) {
    require_keys(j, {"mode", "cv_elevated", "cv_high", "system_high"}, "settings");
    ProjectSettings s;
    if (j.contains("mode")) s.mode = summary_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("cv_elevated")) s.thresholds.cv_elevated = j.at("cv_elevated").get<double>();
    if (j.contains("cv_high")) s.thresholds.cv_high = j.at("cv_high").get<double>();
    if (j.contains("system_high")) s.thresholds.system_high = j.at("system_high").get<double>();
    return s;
}

}  // namespace

const BenchmarkSpec* Project::find_spec(const std::string& id) const {
    for (const BenchmarkSpec& s : specs)
        if (s.id == id) return &s;
    return nullptr;
}

std::string project_spec_path(const std::string& dir) {
    return (fs::path(dir) / "benchspec.json").string();
}

std::string project_journal_path(const std::string& dir) {
    return (fs::path(dir) / "journal.ndjson").string();
}

Project load_project(const std::string& dir) {
    const std::string path = project_spec_path(dir);
    std::ifstream in(path);
    if (!in) throw MissingFileError(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    json j;
    try {
        j = json::parse(content);
    } catch (const std::exception& e) {
        throw LoadError(path + ": " + e.what());
    }

    require_keys(j, {"format_version", "settings", "benchmarks", "claims"}, path);
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw LoadError(path + ": format_version must be 1");

    Project project;
    project.dir = dir;
    project.spec_path = path;
    project.spec_file_hash = content_hash(content);
    if (j.contains("settings")) project.settings = parse_settings(j.at("settings"));
    for (const json& b : j.at("benchmarks")) project.specs.push_back(parse_spec(b));
    if (j.contains("claims"))
        for (const json& c : j.at("claims")) project.claims.push_back(parse_claim(c));
    return project;
}

void write_sample_project(const std::string& dir) {
    const std::string path = project_spec_path(dir);
    if (fs::exists(path)) throw Error(path + " already exists, refusing to overwrite");
    fs::create_directories(dir);

    json j;
    j["format_version"] = 1;
    j["settings"] = {{"mode", "mean"}};
    j["benchmarks"] = json::array({{
        {"id", "startup"},
        {"command_template", "sleep {dur}"},
        {"params", json::object()},
        {"variants", json::array({
                         {{"name", "short"}, {"bindings", {{"dur", "0.05"}}}},
                         {{"name", "long"}, {"bindings", {{"dur", "0.08"}}}},
                     })},
        {"run_policy", {{"mode", "adaptive"},
                        {"min_runs", 10},
                        {"min_total_time", 3.0},
                        {"max_runs", 100}}},
        {"tags", json::array({"demo"})},
    }});
    j["claims"] = json::array({{
        {"claim_id", "short-beats-long"},
        {"subject_variant", "short"},
        {"reference_variant", "long"},
        {"spec_ids", json::array({"startup"})},
        {"kind", "noticeably_faster"},
        {"margin", 0.05},
    }});

    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace benchlab
