#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "benchlab/envcheck.hpp"
#include "benchlab/runner.hpp"

namespace benchlab {

// One invocation of the measuring tool: binds every result it produced to a
// single environment fingerprint and a hash of the spec file as it was then.
struct Session {
    std::string session_id;  // timestamp + random suffix
    EnvironmentFingerprint fingerprint;
    std::string spec_file_hash;
    std::string started_at;
};

struct ResultFilter {
    std::optional<std::string> spec_id;
    std::optional<std::string> variant_name;
    std::optional<std::string> session_id;

    bool matches(const ResultSet& rs) const;
};

struct CrossSessionWarning {
    bool escalated = false;  // fingerprints or spec hashes differ, not just sessions
    std::vector<FieldMismatch> fingerprint_mismatches;
    bool spec_hash_differs = false;
    std::string message;
};

// Versioned, append-only persistence inside a project directory:
//   results.ndjson    one result set per line
//   sessions.ndjson   one session per line, fingerprint embedded
// Records carry a format_version field; numeric fields round-trip exactly.
class Store {
public:
    explicit Store(std::string project_dir);

    // Single writer per project directory, advisory flock on .benchlab.lock.
    // Throws StoreLockedError if another writer holds it. Readers never lock.
    void acquire_writer_lock();
    void release_writer_lock();
    ~Store();

    Session open_session(const EnvironmentFingerprint& fp, const std::string& spec_file_hash);

    void append_results(const Session& session, const std::vector<ResultSet>& results);
    void append_result(const Session& session, const ResultSet& rs);

    // Matching records in append order. Throws MissingFileError when the
    // results log does not exist yet.
    std::vector<ResultSet> load_results(const ResultFilter& filter = {}) const;

    std::vector<Session> load_sessions() const;
    std::optional<Session> find_session(const std::string& session_id) const;

    bool has_results_for(const std::string& spec_id) const;

    // No warning within one session. Across sessions: mild when the recorded
    // fingerprints and spec hashes agree, escalated (naming the fields) when
    // they do not.
    std::optional<CrossSessionWarning> comparison_guard(const ResultSet& a,
                                                        const ResultSet& b) const;

    // Non-fatal problems from the last load (e.g. a truncated final record).
    const std::vector<std::string>& load_warnings() const { return load_warnings_; }

    std::string results_path() const;
    std::string sessions_path() const;
    const std::string& dir() const { return dir_; }

    static std::string make_session_id();

private:
    std::string dir_;
    int lock_fd_ = -1;
    mutable std::vector<std::string> load_warnings_;
};

}  // namespace benchlab
