#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace benchlab {

enum class EntryKind { Expectation, Observation, Explanation, Test, Improvement };
enum class TestVerdict { Confirmed, Refuted, Inconclusive, Untestable };
enum class ExplanationStatus { Proposed, Confirmed, Refuted, Conjecture };

std::string to_string(EntryKind k);
std::string to_string(TestVerdict v);
std::string to_string(ExplanationStatus s);
EntryKind entry_kind_from_string(const std::string& s);
TestVerdict verdict_from_string(const std::string& s);

// One immutable line of the journal. Entries are never edited or deleted;
// corrections are new entries linking the old one.
//
// refs use a small prefixed vocabulary:
//   entry:<id>      another journal entry
//   spec:<id>       a benchmark spec
//   session:<id>    a stored result session
struct JournalEntry {
    std::int64_t entry_id = 0;
    EntryKind kind = EntryKind::Observation;
    std::string text;
    std::vector<std::string> refs;
    std::string created_at;
    std::optional<bool> post_hoc;            // expectations only
    std::optional<TestVerdict> verdict;      // tests only
};

struct JournalStatusReport {
    std::vector<std::int64_t> untested_explanations;       // derived status proposed
    std::vector<std::int64_t> conjectures;                 // explicitly untestable
    std::vector<std::int64_t> refuted_without_revision;
    std::vector<std::string> specs_missing_expectation;
    std::vector<std::int64_t> post_hoc_expectations;

    bool clean() const {
        return untested_explanations.empty() && refuted_without_revision.empty() &&
               specs_missing_expectation.empty() && post_hoc_expectations.empty();
    }
};

// Append-only ledger of expectations, observations, explanations, tests and
// improvements. Explanation status is always derived from linked test entries,
// never stored, so the log cannot go stale.
class Journal {
public:
    // In-memory journal (tests, dry runs).
    Journal() = default;
    // Backed by one newline-delimited file of structured records; loads any
    // existing entries. Throws LoadError on a malformed interior line; a
    // truncated final line is skipped and reported via load_warnings().
    explicit Journal(std::string path);

    // Wired by the caller so the journal can tell pre-registered expectations
    // from post-hoc ones and validate session refs. Unset probes make the
    // corresponding ref kinds unverifiable (accepted).
    void set_results_probe(std::function<bool(const std::string& spec_id)> probe);
    void set_session_probe(std::function<bool(const std::string& session_id)> probe);
    void set_spec_probe(std::function<bool(const std::string& spec_id)> probe);

    // post_hoc is true iff results for spec_id already exist; flagged, never
    // rejected.
    JournalEntry record_expectation(const std::string& spec_id, const std::string& text);

    JournalEntry record_observation(const std::string& text,
                                           const std::vector<std::string>& refs);

    // Status starts as proposed. Entry refs must point to existing observation
    // or explanation entries (the latter are revision links). Throws
    // DanglingRefError.
    JournalEntry record_explanation(const std::string& text,
                                           const std::vector<std::string>& refs);

    // Links exactly one explanation. confirmed/refuted flip the derived
    // status; inconclusive leaves it proposed; untestable turns it into a
    // conjecture. Throws UnknownExplanationError.
    JournalEntry attach_test(std::int64_t explanation_id, const std::string& text,
                                    TestVerdict verdict);

    JournalEntry record_improvement(const std::string& text,
                                           const std::vector<std::string>& refs);

    // Derived, pure function of the linked test entries: the latest decisive
    // verdict (confirmed/refuted/untestable) wins; inconclusive never changes
    // anything. Throws UnknownExplanationError.
    ExplanationStatus derived_status(std::int64_t explanation_id) const;

    JournalStatusReport status(const std::vector<std::string>& specs_with_results) const;

    const std::vector<JournalEntry>& entries() const { return entries_; }
    const JournalEntry* find(std::int64_t id) const;
    const std::vector<std::string>& load_warnings() const { return load_warnings_; }

private:
    JournalEntry append(JournalEntry entry);
    void validate_refs(const std::vector<std::string>& refs, bool explanation_link_rules) const;

    std::string path_;  // empty: in-memory only
    std::vector<JournalEntry> entries_;
    std::vector<std::string> load_warnings_;
    std::function<bool(const std::string&)> results_probe_;
    std::function<bool(const std::string&)> session_probe_;
    std::function<bool(const std::string&)> spec_probe_;
};

}  // namespace benchlab
