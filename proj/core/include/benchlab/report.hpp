#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "benchlab/journal.hpp"
#include "benchlab/stats.hpp"
#include "benchlab/store.hpp"

namespace benchlab {

struct Project;  // project.hpp

// A directional statement the report checks against measured ratios, the
// robust counterpart of fragile absolute numbers.
struct QualitativeClaim {
    std::string claim_id;
    std::string subject_variant;
    std::string reference_variant;
    std::vector<std::string> spec_ids;
    std::string kind = "noticeably_faster";  // the only kind in v1
    double margin = 0.05;
};

enum class ClaimOutcome { Pass, Fail, Undetermined };
std::string to_string(ClaimOutcome o);

struct ClaimEvidencePoint {
    std::string label;  // "spec @ param=value"
    RatioWithUncertainty ratio;  // reference/subject, > 1 means subject is faster
    ClaimOutcome outcome = ClaimOutcome::Undetermined;
};

struct ClaimVerdict {
    std::string claim_id;
    ClaimOutcome verdict = ClaimOutcome::Undetermined;
    std::vector<ClaimEvidencePoint> evidence;
};

// Milliseconds with one decimal: 0.6226 -> "622.6".
std::string format_ms(double seconds);
// "1.35 ± 0.04" (two decimals).
std::string format_ratio(const RatioWithUncertainty& r);

// Canonical "k=v,k=v" key for grouping results by parameter point.
std::string point_key(const ParamPoint& point);

// Latest stored ResultSet per (param point, variant) of one spec, points in
// first-appearance order. Comparisons and exports always use these.
struct LatestResults {
    std::vector<std::string> point_keys;
    std::map<std::string, std::map<std::string, ResultSet>> by_point;
};
LatestResults latest_results(const Store& store, const std::string& spec_id);

// Markdown table with columns Command | Mean [ms] | Min [ms] | Max [ms] |
// Relative. Relative compares against the fastest variant (ties broken by
// declaration order); the baseline row shows a bare 1.00.
std::string render_comparison(const std::vector<std::pair<std::string, Summary>>& variants,
                              SummaryMode mode = SummaryMode::Mean);

// Per point: pass iff ratio - sigma > 1 + margin, fail iff ratio + sigma
// < 1 + margin, otherwise undetermined. The claim passes only when every
// point passes and fails as soon as one fails; cherry-picking is not an
// option.
ClaimVerdict evaluate_claim(const QualitativeClaim& claim,
                            const std::vector<std::pair<std::string, RatioWithUncertainty>>& evidence);

// Builds the evidence from the latest stored results per (spec, point).
// Throws MissingResultsError when a referenced spec lacks results for either
// variant.
ClaimVerdict evaluate_claim_against_store(const QualitativeClaim& claim, const Store& store,
                                          SummaryMode mode);

// Full markdown report: claims with verdicts, per-benchmark tables and noise,
// explanations grouped by derived status (untested ones under "Conjectures"),
// environment appendix, and the expectations-vs-outcomes diff.
std::string render_report(const Project& project, const Store& store, const Journal& journal);

// Machine-readable mirror: summaries, every raw measurement, relative ratios
// and claim verdicts under a versioned schema. Returns serialized JSON.
std::string export_json(const Project& project, const Store& store, const Journal& journal);

}  // namespace benchlab
