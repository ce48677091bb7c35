#include "benchlab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "benchlab/errors.hpp"
#include "benchlab/project.hpp"

namespace benchlab {

using nlohmann::json;

std::string to_string(ClaimOutcome o) {
    switch (o) {
        case ClaimOutcome::Pass: return "pass";
        case ClaimOutcome::Fail: return "fail";
        case ClaimOutcome::Undetermined: return "undetermined";
    }
    return "?";
}

std::string format_ms(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", seconds * 1000.0);
    return buf;
}

std::string format_ratio(const RatioWithUncertainty& r) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", r.ratio, r.sigma);
    return buf;
}

std::string render_comparison(const std::vector<std::pair<std::string, Summary>>& variants,
                              SummaryMode mode) {
    // Baseline: fastest central value; ties go to the first declared variant.
    std::size_t base = 0;
    for (std::size_t i = 1; i < variants.size(); ++i)
        if (variants[i].second.central(mode) < variants[base].second.central(mode)) base = i;

    std::ostringstream out;
    out << "| Command | Mean [ms] | Min [ms] | Max [ms] | Relative |\n";
    out << "|:---|---:|---:|---:|---:|\n";
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto& [name, s] = variants[i];
        out << "| " << name << " | " << format_ms(s.mean) << " ± " << format_ms(s.stddev) << " | "
            << format_ms(s.min) << " | " << format_ms(s.max) << " | ";
        if (i == base) {
            out << "1.00";
        } else {
            out << format_ratio(compare(s, variants[base].second, mode, name,
                                        variants[base].first));
        }
        out << " |\n";
    }
    return out.str();
}

ClaimVerdict evaluate_claim(
    const QualitativeClaim& claim,
    const std::vector<std::pair<std::string, RatioWithUncertainty>>& evidence) {
    ClaimVerdict v;
    v.claim_id = claim.claim_id;

    bool any_fail = false;
    bool all_pass = !evidence.empty();
    for (const auto& [label, ratio] : evidence) {
        ClaimEvidencePoint point;
        point.label = label;
        point.ratio = ratio;
        const double threshold = 1.0 + claim.margin;
        if (ratio.ratio - ratio.sigma > threshold) {
            point.outcome = ClaimOutcome::Pass;
        } else if (ratio.ratio + ratio.sigma < threshold) {
            point.outcome = ClaimOutcome::Fail;
            any_fail = true;
            all_pass = false;
        } else {
            point.outcome = ClaimOutcome::Undetermined;
            all_pass = false;
        }
        v.evidence.push_back(std::move(point));
    }
    v.verdict = any_fail   ? ClaimOutcome::Fail
                : all_pass ? ClaimOutcome::Pass
                           : ClaimOutcome::Undetermined;
    return v;
}

std::string point_key(const ParamPoint& point) {
    if (point.assignments.empty()) return "";
    std::string out;
    for (const auto& [k, v] : point.assignments) {
        if (!out.empty()) out += ",";
        out += k + "=" + v;
    }
    return out;
}

LatestResults latest_results(const Store& store, const std::string& spec_id) {
    LatestResults latest;
    ResultFilter f;
    f.spec_id = spec_id;
    std::vector<ResultSet> results;
    try {
        results = store.load_results(f);
    } catch (const MissingFileError&) {
        return latest;  // nothing measured yet
    }
    for (ResultSet& rs : results) {
        const std::string key = point_key(rs.param_point);
        if (!latest.by_point.count(key)) latest.point_keys.push_back(key);
        latest.by_point[key][rs.variant_name] = std::move(rs);  // later records win
    }
    return latest;
}

ClaimVerdict evaluate_claim_against_store(const QualitativeClaim& claim, const Store& store,
                                          SummaryMode mode) {
    std::vector<std::pair<std::string, RatioWithUncertainty>> evidence;
    for (const std::string& spec_id : claim.spec_ids) {
        const LatestResults latest = latest_results(store, spec_id);
        bool found_any = false;
        for (const std::string& key : latest.point_keys) {
            const auto& variants = latest.by_point.at(key);
            const auto subject = variants.find(claim.subject_variant);
            const auto reference = variants.find(claim.reference_variant);
            if (subject == variants.end() || reference == variants.end()) continue;
            found_any = true;
            const Summary s_sub = summarize(subject->second.wall_times());
            const Summary s_ref = summarize(reference->second.wall_times());
            // reference / subject: > 1 means the subject is faster
            RatioWithUncertainty r = compare(s_ref, s_sub, mode, claim.reference_variant,
                                             claim.subject_variant);
            std::string label = spec_id;
            if (!key.empty()) label += " @ " + key;
            evidence.emplace_back(std::move(label), r);
        }
        if (!found_any)
            throw MissingResultsError("claim '" + claim.claim_id + "': spec '" + spec_id +
                                      "' has no results covering both '" +
                                      claim.subject_variant + "' and '" +
                                      claim.reference_variant + "'");
    }
    return evaluate_claim(claim, evidence);
}

namespace {

std::string fingerprint_line(const EnvironmentFingerprint& fp) {
    auto tri = [](const std::optional<bool>& v) {
        return !v ? std::string("unknown") : (*v ? std::string("yes") : std::string("no"));
    };
    std::ostringstream os;
    os << fp.cpu_model << "; governor " << fp.governor.value_or("unknown") << "; frequency fixed "
       << tri(fp.frequency_fixed) << "; turbo " << tri(fp.turbo_enabled) << "; AC power "
       << tri(fp.on_ac_power) << "; " << fp.os_descriptor;
    return os.str();
}

void render_noise_line(std::ostringstream& out, const std::string& variant,
                       const NoiseReport& nr) {
    char cv[32];
    std::snprintf(cv, sizeof(cv), "%.1f%%", nr.cv * 100.0);
    out << "- `" << variant << "`: cv " << cv << " (" << to_string(nr.cv_verdict) << ")";
    if (nr.outliers_applicable && !nr.outlier_indices.empty()) {
        out << "; outlier runs:";
        for (std::size_t i : nr.outlier_indices) out << " " << i;
    }
    if (nr.trend.flagged) {
        char rho[32];
        std::snprintf(rho, sizeof(rho), "%.2f", nr.trend.rho);
        out << "; drift across runs (rho " << rho << ")";
    }
    char sf[32];
    std::snprintf(sf, sizeof(sf), "%.1f%%", nr.system_fraction * 100.0);
    out << "; system time " << sf << " (" << to_string(nr.system_verdict) << ")";
    out << "\n";
}

}  // namespace

std::string render_report(const Project& project, const Store& store, const Journal& journal) {
    std::ostringstream out;
    out << "# Benchmark report\n\n";
    out << "Generated " << utc_timestamp_now() << " by " << kToolVersion << ".\n\n";

    // ---- 1. qualitative claims -------------------------------------------
    out << "## Claims\n\n";
    if (project.claims.empty()) {
        out << "No claims declared.\n\n";
    } else {
        for (const QualitativeClaim& claim : project.claims) {
            out << "- **" << claim.claim_id << "**: `" << claim.subject_variant
                << "` noticeably faster than `" << claim.reference_variant << "` (margin "
                << static_cast<int>(claim.margin * 100.0) << "%): ";
            try {
                const ClaimVerdict v =
                    evaluate_claim_against_store(claim, store, project.settings.mode);
                out << "**" << to_string(v.verdict) << "**\n";
                for (const ClaimEvidencePoint& p : v.evidence)
                    out << "  - " << p.label << ": " << format_ratio(p.ratio) << " ("
                        << to_string(p.outcome) << ")\n";
            } catch (const MissingResultsError& e) {
                out << "**undetermined** (" << e.what() << ")\n";
            }
        }
        out << "\n";
    }

    // ---- 2. per-benchmark results ----------------------------------------
    out << "## Benchmarks\n\n";
    bool any_results = false;
    for (const BenchmarkSpec& spec : project.specs) {
        out << "### " << spec.id << "\n\n";
        if (!spec.tags.empty()) {
            out << "Tags:";
            for (const std::string& t : spec.tags) out << " `" << t << "`";
            out << "\n\n";
        }
        if (!spec.check_template) out << "No correctness check declared.\n\n";

        const LatestResults latest = latest_results(store, spec.id);
        if (latest.point_keys.empty()) {
            out << "No stored results.\n\n";
            continue;
        }
        any_results = true;

        for (const std::string& key : latest.point_keys) {
            if (!key.empty()) out << "At `" << key << "`:\n\n";
            // Keep the spec's variant declaration order.
            std::vector<std::pair<std::string, Summary>> rows;
            std::vector<std::pair<std::string, NoiseReport>> noise;
            std::vector<const ResultSet*> shown;
            for (const Variant& v : spec.variants) {
                const auto it = latest.by_point.at(key).find(v.name);
                if (it == latest.by_point.at(key).end()) continue;
                rows.emplace_back(v.name, summarize(it->second.wall_times()));
                noise.emplace_back(v.name,
                                   noise_report(it->second, project.settings.thresholds));
                shown.push_back(&it->second);
            }
            if (rows.empty()) continue;
            out << render_comparison(rows, project.settings.mode) << "\n";
            for (const auto& [name, nr] : noise) render_noise_line(out, name, nr);
            out << "\n";

            for (std::size_t i = 0; i < shown.size(); ++i)
                for (std::size_t j = i + 1; j < shown.size(); ++j) {
                    if (const auto flag = detect_indistinguishable(*shown[i], *shown[j]))
                        out << "Warning: " << flag->message << "\n\n";
                    if (const auto guard = store.comparison_guard(*shown[i], *shown[j]))
                        out << "Warning: " << guard->message << "\n\n";
                }

            if (spec.expected_wall_range) {
                for (const ResultSet* rs : shown)
                    if (const auto w = plausibility_check(*rs, spec, project.settings.mode))
                        out << "Warning: " << w->message << "\n\n";
            }
        }
    }
    if (project.specs.empty()) out << "No benchmarks declared.\n\n";
    (void)any_results;

    // ---- explanations by derived status -----------------------------------
    std::vector<const JournalEntry*> confirmed, conjectures, refuted;
    for (const JournalEntry& e : journal.entries()) {
        if (e.kind != EntryKind::Explanation) continue;
        switch (journal.derived_status(e.entry_id)) {
            case ExplanationStatus::Confirmed: confirmed.push_back(&e); break;
            case ExplanationStatus::Proposed:
            case ExplanationStatus::Conjecture: conjectures.push_back(&e); break;
            case ExplanationStatus::Refuted: refuted.push_back(&e); break;
        }
    }

    out << "## Explanations\n\n";
    if (confirmed.empty()) out << "No tested explanations yet.\n";
    for (const JournalEntry* e : confirmed) out << "- (#" << e->entry_id << ") " << e->text << "\n";
    out << "\n";

    out << "## Conjectures\n\n";
    if (conjectures.empty()) out << "None.\n";
    for (const JournalEntry* e : conjectures)
        out << "- we conjecture that " << e->text << " (#" << e->entry_id
            << ", not validated experimentally)\n";
    out << "\n";

    if (!refuted.empty()) {
        out << "## Refuted explanations\n\n";
        const JournalStatusReport js = journal.status({});
        for (const JournalEntry* e : refuted) {
            out << "- (#" << e->entry_id << ") " << e->text;
            if (std::find(js.refuted_without_revision.begin(), js.refuted_without_revision.end(),
                          e->entry_id) != js.refuted_without_revision.end())
                out << " — needs a revised explanation";
            out << "\n";
        }
        out << "\n";
    }

    // ---- 3. environment & sessions ----------------------------------------
    out << "## Environment and sessions\n\n";
    const std::vector<Session> sessions = store.load_sessions();
    if (sessions.empty()) out << "No recorded sessions.\n";
    for (const Session& s : sessions) {
        out << "- `" << s.session_id << "` (" << s.started_at << "): "
            << fingerprint_line(s.fingerprint) << "\n";
        for (const EnvWarning& w : check_environment(s.fingerprint))
            if (w.kind != EnvWarningKind::Unknown) out << "  - warning: " << w.message << "\n";
    }
    out << "\n";

    // ---- 4. expectations vs outcomes ---------------------------------------
    out << "## Expectations\n\n";
    std::vector<std::string> specs_with_results;
    for (const BenchmarkSpec& spec : project.specs)
        if (store.has_results_for(spec.id)) specs_with_results.push_back(spec.id);

    bool any_expectation = false;
    for (const JournalEntry& e : journal.entries()) {
        if (e.kind != EntryKind::Expectation) continue;
        any_expectation = true;
        out << "- ";
        for (const std::string& ref : e.refs)
            if (ref.rfind("spec:", 0) == 0) out << "`" << ref.substr(5) << "`: ";
        out << e.text;
        if (e.post_hoc.value_or(false)) out << " *(recorded after results existed)*";
        out << "\n";
    }
    if (!any_expectation) out << "No expectations recorded.\n";

    const JournalStatusReport js = journal.status(specs_with_results);
    for (const std::string& spec_id : js.specs_missing_expectation)
        out << "- `" << spec_id << "` has results but no pre-registered expectation\n";
    out << "\n";

    return out.str();
}

std::string export_json(const Project& project, const Store& store, const Journal& journal) {
    json root;
    root["schema_version"] = 1;
    root["generated_at"] = utc_timestamp_now();
    root["mode"] = to_string(project.settings.mode);

    json benchmarks = json::array();
    for (const BenchmarkSpec& spec : project.specs) {
        json b;
        b["spec_id"] = spec.id;
        b["tags"] = spec.tags;
        json points = json::array();

        const LatestResults latest = latest_results(store, spec.id);
        for (const std::string& key : latest.point_keys) {
            json point;
            const auto& by_variant = latest.by_point.at(key);

            // Baseline for the relative column: fastest central value among
            // the variants present, declaration order breaking ties.
            std::vector<std::pair<std::string, Summary>> rows;
            for (const Variant& v : spec.variants) {
                const auto it = by_variant.find(v.name);
                if (it == by_variant.end()) continue;
                rows.emplace_back(v.name, summarize(it->second.wall_times()));
            }
            if (rows.empty()) continue;
            std::size_t base = 0;
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (rows[i].second.central(project.settings.mode) <
                    rows[base].second.central(project.settings.mode))
                    base = i;

            point["param_point"] = by_variant.begin()->second.param_point.assignments;
            json variants = json::array();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const ResultSet& rs = by_variant.at(rows[i].first);
                const Summary& s = rows[i].second;
                json v;
                v["variant_name"] = rows[i].first;
                v["session_id"] = rs.session_id;
                v["summary"] = {{"mean", s.mean},     {"stddev", s.stddev}, {"min", s.min},
                                {"max", s.max},       {"median", s.median}, {"n", s.n},
                                {"single_sample", s.single_sample}};
                v["wall_times"] = rs.wall_times();
                v["user_times"] = rs.user_times();
                v["system_times"] = rs.system_times();
                json rss = json::array();
                for (const Measurement& m : rs.measurements) rss.push_back(m.max_rss);
                v["max_rss"] = std::move(rss);
                if (i == base) {
                    v["relative"] = nullptr;
                } else {
                    const RatioWithUncertainty r = compare(s, rows[base].second,
                                                           project.settings.mode);
                    v["relative"] = {{"ratio", r.ratio},
                                     {"sigma", r.sigma},
                                     {"baseline", rows[base].first}};
                }
                variants.push_back(std::move(v));
            }
            point["variants"] = std::move(variants);
            points.push_back(std::move(point));
        }
        b["points"] = std::move(points);
        benchmarks.push_back(std::move(b));
    }
    root["benchmarks"] = std::move(benchmarks);

    json claims = json::array();
    for (const QualitativeClaim& claim : project.claims) {
        json c;
        c["claim_id"] = claim.claim_id;
        c["subject_variant"] = claim.subject_variant;
        c["reference_variant"] = claim.reference_variant;
        c["margin"] = claim.margin;
        try {
            const ClaimVerdict v =
                evaluate_claim_against_store(claim, store, project.settings.mode);
            c["verdict"] = to_string(v.verdict);
            json ev = json::array();
            for (const ClaimEvidencePoint& p : v.evidence)
                ev.push_back({{"label", p.label},
                              {"ratio", p.ratio.ratio},
                              {"sigma", p.ratio.sigma},
                              {"outcome", to_string(p.outcome)}});
            c["evidence"] = std::move(ev);
        } catch (const MissingResultsError& e) {
            c["verdict"] = "undetermined";
            c["error"] = e.what();
        }
        claims.push_back(std::move(c));
    }
    root["claims"] = std::move(claims);

    json entries = json::array();
    for (const JournalEntry& e : journal.entries()) {
        json je;
        je["entry_id"] = e.entry_id;
        je["kind"] = to_string(e.kind);
        je["text"] = e.text;
        if (e.kind == EntryKind::Explanation)
            je["status"] = to_string(journal.derived_status(e.entry_id));
        entries.push_back(std::move(je));
    }
    root["journal"] = std::move(entries);

    return root.dump(2);
}

}  // namespace benchlab
