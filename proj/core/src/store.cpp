#include "benchlab/store.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "benchlab/errors.hpp"

namespace benchlab {

using nlohmann::json;

namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

json fingerprint_to_json(const EnvironmentFingerprint& fp) {
    json j;
    j["fingerprint_id"] = fp.fingerprint_id;
    j["cpu_model"] = fp.cpu_model;
    j["governor"] = fp.governor ? json(*fp.governor) : json(nullptr);
    j["frequency_fixed"] = fp.frequency_fixed ? json(*fp.frequency_fixed) : json(nullptr);
    j["turbo_enabled"] = fp.turbo_enabled ? json(*fp.turbo_enabled) : json(nullptr);
    j["on_ac_power"] = fp.on_ac_power ? json(*fp.on_ac_power) : json(nullptr);
    j["os_descriptor"] = fp.os_descriptor;
    j["tool_version"] = fp.tool_version;
    j["captured_at"] = fp.captured_at;
    return j;
}

EnvironmentFingerprint fingerprint_from_json(const json& j) {
    EnvironmentFingerprint fp;
    fp.fingerprint_id = j.at("fingerprint_id").get<std::string>();
    fp.cpu_model = j.at("cpu_model").get<std::string>();
    if (!j.at("governor").is_null()) fp.governor = j.at("governor").get<std::string>();
    if (!j.at("frequency_fixed").is_null())
        fp.frequency_fixed = j.at("frequency_fixed").get<bool>();
    if (!j.at("turbo_enabled").is_null()) fp.turbo_enabled = j.at("turbo_enabled").get<bool>();
    if (!j.at("on_ac_power").is_null()) fp.on_ac_power = j.at("on_ac_power").get<bool>();
    fp.os_descriptor = j.at("os_descriptor").get<std::string>();
    fp.tool_version = j.at("tool_version").get<std::string>();
    fp.captured_at = j.at("captured_at").get<std::string>();
    return fp;
}

json result_to_json(const ResultSet& rs) {
    json j;
    j["format_version"] = kFormatVersion;
    j["spec_id"] = rs.spec_id;
    j["variant_name"] = rs.variant_name;
    j["param_point"] = rs.param_point.assignments;
    j["warmups_discarded"] = rs.warmups_discarded;
    j["session_id"] = rs.session_id;
    j["fingerprint_id"] = rs.fingerprint_id;
    j["started_at"] = rs.started_at;
    j["notes"] = rs.notes;
    json ms = json::array();
    for (const Measurement& m : rs.measurements) {
        ms.push_back({{"wall_time", m.wall_time},
                      {"user_time", m.user_time},
                      {"system_time", m.system_time},
                      {"max_rss", m.max_rss},
                      {"exit_status", m.exit_status}});
    }
    j["measurements"] = std::move(ms);
    return j;
}

ResultSet result_from_json(const json& j) {
    ResultSet rs;
    rs.spec_id = j.at("spec_id").get<std::string>();
    rs.variant_name = j.at("variant_name").get<std::string>();
    rs.param_point.assignments =
        j.at("param_point").get<std::map<std::string, std::string>>();
    rs.warmups_discarded = j.at("warmups_discarded").get<std::size_t>();
    rs.session_id = j.at("session_id").get<std::string>();
    rs.fingerprint_id = j.at("fingerprint_id").get<std::string>();
    rs.started_at = j.at("started_at").get<std::string>();
    rs.notes = j.at("notes").get<std::vector<std::string>>();
    for (const json& m : j.at("measurements")) {
        Measurement meas;
        meas.wall_time = m.at("wall_time").get<double>();
        meas.user_time = m.at("user_time").get<double>();
        meas.system_time = m.at("system_time").get<double>();
        meas.max_rss = m.at("max_rss").get<long long>();
        meas.exit_status = m.at("exit_status").get<int>();
        rs.measurements.push_back(meas);
    }
    return rs;
}

void append_line(const std::string& path, const json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot append to " + path);
    out << record.dump() << '\n';
    out.flush();
}

// Shared ndjson reader: tolerates exactly one truncated record at EOF (a
// crashed writer), everything else is a hard error.
std::vector<json> read_ndjson(const std::string& path, std::vector<std::string>& warnings) {
    std::ifstream in(path);
    if (!in) throw MissingFileError(path);
    std::vector<json> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const bool last_and_unterminated = in.eof();
        try {
            records.push_back(json::parse(line));
        } catch (const std::exception& e) {
            if (last_and_unterminated) {
                warnings.push_back(path + " line " + std::to_string(line_no) +
                                   " is truncated and was skipped");
                break;
            }
            throw LoadError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace

bool ResultFilter::matches(const ResultSet& rs) const {
    if (spec_id && rs.spec_id != *spec_id) return false;
    if (variant_name && rs.variant_name != *variant_name) return false;
    if (session_id && rs.session_id != *session_id) return false;
    return true;
}

Store::Store(std::string project_dir) : dir_(std::move(project_dir)) {}

Store::~Store() { release_writer_lock(); }

std::string Store::results_path() const { return (fs::path(dir_) / "results.ndjson").string(); }
std::string Store::sessions_path() const { return (fs::path(dir_) / "sessions.ndjson").string(); }

void Store::acquire_writer_lock() {
    if (lock_fd_ >= 0) return;
    const std::string lock_path = (fs::path(dir_) / ".benchlab.lock").string();
    lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (lock_fd_ < 0) throw Error("cannot open lock file " + lock_path);
    if (flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(lock_fd_);
        lock_fd_ = -1;
        throw StoreLockedError(lock_path);
    }
}

void Store::release_writer_lock() {
    if (lock_fd_ >= 0) {
        flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
        lock_fd_ = -1;
    }
}

std::string Store::make_session_id() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);

    std::random_device rd;
    std::mt19937_64 gen(rd());
    std::uniform_int_distribution<int> dist(0, 15);
    std::string suffix;
    for (int i = 0; i < 6; ++i) suffix.push_back("0123456789abcdef"[dist(gen)]);
    return std::string(stamp) + "-" + suffix;
}

Session Store::open_session(const EnvironmentFingerprint& fp, const std::string& spec_file_hash) {
    Session s;
    s.session_id = make_session_id();
    s.fingerprint = fp;
    s.spec_file_hash = spec_file_hash;
    s.started_at = utc_timestamp_now();

    json j;
    j["format_version"] = kFormatVersion;
    j["session_id"] = s.session_id;
    j["fingerprint"] = fingerprint_to_json(fp);
    j["spec_file_hash"] = spec_file_hash;
    j["started_at"] = s.started_at;
    append_line(sessions_path(), j);
    return s;
}

void Store::append_result(const Session& session, const ResultSet& rs) {
    ResultSet tagged = rs;
    tagged.session_id = session.session_id;
    tagged.fingerprint_id = session.fingerprint.fingerprint_id;
    append_line(results_path(), result_to_json(tagged));
}

void Store::append_results(const Session& session, const std::vector<ResultSet>& results) {
    for (const ResultSet& rs : results) append_result(session, rs);
}

std::vector<ResultSet> Store::load_results(const ResultFilter& filter) const {
    load_warnings_.clear();
    std::vector<ResultSet> out;
    for (const json& j : read_ndjson(results_path(), load_warnings_)) {
        ResultSet rs = result_from_json(j);
        if (filter.matches(rs)) out.push_back(std::move(rs));
    }
    return out;
}

std::vector<Session> Store::load_sessions() const {
    if (!fs::exists(sessions_path())) return {};
    std::vector<Session> out;
    for (const json& j : read_ndjson(sessions_path(), load_warnings_)) {
        Session s;
        s.session_id = j.at("session_id").get<std::string>();
        s.fingerprint = fingerprint_from_json(j.at("fingerprint"));
        s.spec_file_hash = j.at("spec_file_hash").get<std::string>();
        s.started_at = j.at("started_at").get<std::string>();
        out.push_back(std::move(s));
    }
    return out;
}

std::optional<Session> Store::find_session(const std::string& session_id) const {
    for (Session& s : load_sessions())
        if (s.session_id == session_id) return std::move(s);
    return std::nullopt;
}

bool Store::has_results_for(const std::string& spec_id) const {
    if (!fs::exists(results_path())) return false;
    ResultFilter f;
    f.spec_id = spec_id;
    return !load_results(f).empty();
}

std::optional<CrossSessionWarning> Store::comparison_guard(const ResultSet& a,
                                                           const ResultSet& b) const {
    if (a.session_id == b.session_id) return std::nullopt;

    CrossSessionWarning w;
    std::ostringstream msg;
    msg << "comparing results from different sessions (" << a.session_id << " vs "
        << b.session_id << ")";

    const auto sa = find_session(a.session_id);
    const auto sb = find_session(b.session_id);
    if (sa && sb) {
        w.fingerprint_mismatches = diff_fingerprints(sa->fingerprint, sb->fingerprint);
        w.spec_hash_differs = sa->spec_file_hash != sb->spec_file_hash;
        if (!w.fingerprint_mismatches.empty()) {
            w.escalated = true;
            msg << "; environment differs:";
            for (const FieldMismatch& m : w.fingerprint_mismatches)
                msg << " " << m.field << " (" << m.a << " vs " << m.b << ")";
        }
        if (w.spec_hash_differs) {
            w.escalated = true;
            msg << "; the spec file changed between sessions";
        }
    } else {
        msg << "; session records are incomplete, environment cannot be verified";
    }
    if (!w.escalated) msg << "; environmental noise may bias this comparison";
    w.message = msg.str();
    return w;
}

}  // namespace benchlab
