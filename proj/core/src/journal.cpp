#include "benchlab/journal.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "benchlab/errors.hpp"
#include "benchlab/runner.hpp"

namespace benchlab {

using nlohmann::json;

std::string to_string(EntryKind k) {
    switch (k) {
        case EntryKind::Expectation: return "expectation";
        case EntryKind::Observation: return "observation";
        case EntryKind::Explanation: return "explanation";
        case EntryKind::Test: return "test";
        case EntryKind::Improvement: return "improvement";
    }
    return "?";
}

std::string to_string(TestVerdict v) {
    switch (v) {
        case TestVerdict::Confirmed: return "confirmed";
        case TestVerdict::Refuted: return "refuted";
        case TestVerdict::Inconclusive: return "inconclusive";
        case TestVerdict::Untestable: return "untestable";
    }
    return "?";
}

std::string to_string(ExplanationStatus s) {
    switch (s) {
        case ExplanationStatus::Proposed: return "proposed";
        case ExplanationStatus::Confirmed: return "confirmed";
        case ExplanationStatus::Refuted: return "refuted";
        case ExplanationStatus::Conjecture: return "conjecture";
    }
    return "?";
}

EntryKind entry_kind_from_string(const std::string& s) {
    if (s == "expectation") return EntryKind::Expectation;
    if (s == "observation") return EntryKind::Observation;
    if (s == "explanation") return EntryKind::Explanation;
    if (s == "test") return EntryKind::Test;
    if (s == "improvement") return EntryKind::Improvement;
    throw LoadError("unknown journal entry kind '" + s + "'");
}

TestVerdict verdict_from_string(const std::string& s) {
    if (s == "confirmed") return TestVerdict::Confirmed;
    if (s == "refuted") return TestVerdict::Refuted;
    if (s == "inconclusive") return TestVerdict::Inconclusive;
    if (s == "untestable") return TestVerdict::Untestable;
    throw Error("unknown test verdict '" + s + "' (expected confirmed|refuted|inconclusive|untestable)");
}

namespace {

struct ParsedRef {
    std::string kind;
    std::string value;
};

ParsedRef parse_ref(const std::string& ref) {
    const auto colon = ref.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= ref.size())
        throw DanglingRefError(ref);
    return {ref.substr(0, colon), ref.substr(colon + 1)};
}

json entry_to_json(const JournalEntry& e) {
    json j;
    j["entry_id"] = e.entry_id;
    j["kind"] = to_string(e.kind);
    j["text"] = e.text;
    j["refs"] = e.refs;
    j["created_at"] = e.created_at;
    if (e.post_hoc) j["post_hoc"] = *e.post_hoc;
    if (e.verdict) j["verdict"] = to_string(*e.verdict);
    return j;
}

JournalEntry entry_from_json(const json& j) {
    JournalEntry e;
    e.entry_id = j.at("entry_id").get<std::int64_t>();
    e.kind = entry_kind_from_string(j.at("kind").get<std::string>());
    e.text = j.at("text").get<std::string>();
    e.refs = j.at("refs").get<std::vector<std::string>>();
    e.created_at = j.at("created_at").get<std::string>();
    if (j.contains("post_hoc")) e.post_hoc = j.at("post_hoc").get<bool>();
    if (j.contains("verdict")) e.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    return e;
}

}  // namespace

Journal::Journal(std::string path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    std::ifstream in(path_);
    if (!in) throw LoadError("cannot open journal file " + path_);

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const bool last_and_unterminated = in.eof();
        try {
            entries_.push_back(entry_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            if (last_and_unterminated) {
                load_warnings_.push_back("journal line " + std::to_string(line_no) +
                                         " is truncated and was skipped");
                break;
            }
            throw LoadError("journal line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void Journal::set_results_probe(std::function<bool(const std::string&)> probe) {
    results_probe_ = std::move(probe);
}
void Journal::set_session_probe(std::function<bool(const std::string&)> probe) {
    session_probe_ = std::move(probe);
}
void Journal::set_spec_probe(std::function<bool(const std::string&)> probe) {
    spec_probe_ = std::move(probe);
}

JournalEntry Journal::append(JournalEntry entry) {
    entry.entry_id = entries_.empty() ? 1 : entries_.back().entry_id + 1;
    entry.created_at = utc_timestamp_now();
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw Error("cannot append to journal file " + path_);
        out << entry_to_json(entry).dump() << '\n';
        out.flush();
    }
    entries_.push_back(std::move(entry));
    return entries_.back();
}

void Journal::validate_refs(const std::vector<std::string>& refs,
                            bool explanation_link_rules) const {
    for (const std::string& ref : refs) {
        const ParsedRef p = parse_ref(ref);
        if (p.kind == "entry") {
            std::int64_t id = 0;
            try {
                id = std::stoll(p.value);
            } catch (...) {
                throw DanglingRefError(ref);
            }
            const JournalEntry* target = find(id);
            if (!target) throw DanglingRefError(ref);
            if (explanation_link_rules && target->kind != EntryKind::Observation &&
                target->kind != EntryKind::Explanation)
                throw DanglingRefError(ref);
        } else if (p.kind == "session") {
            if (session_probe_ && !session_probe_(p.value)) throw DanglingRefError(ref);
        } else if (p.kind == "spec") {
            if (spec_probe_ && !spec_probe_(p.value)) throw DanglingRefError(ref);
        } else {
            throw DanglingRefError(ref);
        }
    }
}

JournalEntry Journal::record_expectation(const std::string& spec_id,
                                                const std::string& text) {
    JournalEntry e;
    e.kind = EntryKind::Expectation;
    e.text = text;
    e.refs = {"spec:" + spec_id};
    e.post_hoc = results_probe_ ? results_probe_(spec_id) : false;
    return append(std::move(e));
}

JournalEntry Journal::record_observation(const std::string& text,
                                                const std::vector<std::string>& refs) {
    validate_refs(refs, false);
    JournalEntry e;
    e.kind = EntryKind::Observation;
    e.text = text;
    e.refs = refs;
    return append(std::move(e));
}

JournalEntry Journal::record_explanation(const std::string& text,
                                                const std::vector<std::string>& refs) {
    validate_refs(refs, true);
    JournalEntry e;
    e.kind = EntryKind::Explanation;
    e.text = text;
    e.refs = refs;
    return append(std::move(e));
}

JournalEntry Journal::attach_test(std::int64_t explanation_id, const std::string& text,
                                         TestVerdict verdict) {
    const JournalEntry* target = find(explanation_id);
    if (!target || target->kind != EntryKind::Explanation)
        throw UnknownExplanationError(explanation_id);
    JournalEntry e;
    e.kind = EntryKind::Test;
    e.text = text;
    e.refs = {"entry:" + std::to_string(explanation_id)};
    e.verdict = verdict;
    return append(std::move(e));
}

JournalEntry Journal::record_improvement(const std::string& text,
                                                const std::vector<std::string>& refs) {
    validate_refs(refs, false);
    JournalEntry e;
    e.kind = EntryKind::Improvement;
    e.text = text;
    e.refs = refs;
    return append(std::move(e));
}

const JournalEntry* Journal::find(std::int64_t id) const {
    for (const JournalEntry& e : entries_)
        if (e.entry_id == id) return &e;
    return nullptr;
}

ExplanationStatus Journal::derived_status(std::int64_t explanation_id) const {
    const JournalEntry* target = find(explanation_id);
    if (!target || target->kind != EntryKind::Explanation)
        throw UnknownExplanationError(explanation_id);

    const std::string link = "entry:" + std::to_string(explanation_id);
    ExplanationStatus status = ExplanationStatus::Proposed;
    for (const JournalEntry& e : entries_) {
        if (e.kind != EntryKind::Test || !e.verdict) continue;
        if (std::find(e.refs.begin(), e.refs.end(), link) == e.refs.end()) continue;
        switch (*e.verdict) {
            case TestVerdict::Confirmed: status = ExplanationStatus::Confirmed; break;
            case TestVerdict::Refuted: status = ExplanationStatus::Refuted; break;
            case TestVerdict::Untestable: status = ExplanationStatus::Conjecture; break;
            case TestVerdict::Inconclusive: break;  // leaves the previous status
        }
    }
    return status;
}

JournalStatusReport Journal::status(const std::vector<std::string>& specs_with_results) const {
    JournalStatusReport report;

    for (const JournalEntry& e : entries_) {
        if (e.kind == EntryKind::Explanation) {
            const ExplanationStatus s = derived_status(e.entry_id);
            if (s == ExplanationStatus::Proposed) {
                report.untested_explanations.push_back(e.entry_id);
            } else if (s == ExplanationStatus::Conjecture) {
                report.conjectures.push_back(e.entry_id);
            } else if (s == ExplanationStatus::Refuted) {
                // A revision is a later explanation that links the refuted one.
                const std::string link = "entry:" + std::to_string(e.entry_id);
                bool revised = false;
                for (const JournalEntry& later : entries_) {
                    if (later.kind == EntryKind::Explanation && later.entry_id > e.entry_id &&
                        std::find(later.refs.begin(), later.refs.end(), link) != later.refs.end()) {
                        revised = true;
                        break;
                    }
                }
                if (!revised) report.refuted_without_revision.push_back(e.entry_id);
            }
        } else if (e.kind == EntryKind::Expectation && e.post_hoc.value_or(false)) {
            report.post_hoc_expectations.push_back(e.entry_id);
        }
    }

    for (const std::string& spec_id : specs_with_results) {
        const std::string ref = "spec:" + spec_id;
        bool found = false;
        for (const JournalEntry& e : entries_) {
            if (e.kind == EntryKind::Expectation &&
                std::find(e.refs.begin(), e.refs.end(), ref) != e.refs.end()) {
                found = true;
                break;
            }
        }
        if (!found) report.specs_missing_expectation.push_back(spec_id);
    }
    return report;
}

}  // namespace benchlab
