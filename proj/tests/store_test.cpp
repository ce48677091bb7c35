#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "benchlab/envcheck.hpp"
#include "benchlab/errors.hpp"
#include "benchlab/store.hpp"
#include "test_util.hpp"

using namespace benchlab;

namespace {

EnvironmentFingerprint fingerprint_with_power(bool on_ac) {
    EnvironmentFingerprint fp;
    fp.cpu_model = "Example CPU";
    fp.governor = "performance";
    fp.frequency_fixed = true;
    fp.turbo_enabled = false;
    fp.on_ac_power = on_ac;
    fp.os_descriptor = "Linux test";
    fp.tool_version = kToolVersion;
    fp.captured_at = "2026-01-01T00:00:00Z";
    fp.rehash();
    return fp;
}

ResultSet sample_result(const std::string& spec_id, const std::string& variant) {
    ResultSet rs;
    rs.spec_id = spec_id;
    rs.variant_name = variant;
    rs.param_point.assignments = {{"size", "10000"}};
    // awkward decimals on purpose: round-trips must be exact
    rs.measurements = {{0.62260001238412, 0.6012, 0.0098, 1048576, 0},
                       {0.61111111111117, 0.5933, 0.0101, 1049600, 0}};
    rs.warmups_discarded = 1;
    rs.started_at = "2026-01-01T00:00:01Z";
    rs.notes = {"MetricUnavailable: max_rss"};
    return rs;
}

}  // namespace

TEST_CASE("results round-trip exactly, in order") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session session = store.open_session(fingerprint_with_power(true), "hash1");

    const ResultSet a = sample_result("sort", "quicksort");
    const ResultSet b = sample_result("sort", "mergesort");
    store.append_results(session, {a, b});

    const std::vector<ResultSet> loaded = store.load_results();
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].variant_name == "quicksort");
    CHECK(loaded[1].variant_name == "mergesort");
    for (std::size_t i = 0; i < 2; ++i) {
        const ResultSet& orig = i == 0 ? a : b;
        REQUIRE(loaded[i].measurements.size() == orig.measurements.size());
        for (std::size_t m = 0; m < orig.measurements.size(); ++m) {
            // bitwise-equal doubles, not approximately equal
            CHECK(loaded[i].measurements[m].wall_time == orig.measurements[m].wall_time);
            CHECK(loaded[i].measurements[m].user_time == orig.measurements[m].user_time);
            CHECK(loaded[i].measurements[m].system_time == orig.measurements[m].system_time);
            CHECK(loaded[i].measurements[m].max_rss == orig.measurements[m].max_rss);
        }
        CHECK(loaded[i].param_point.assignments == orig.param_point.assignments);
        CHECK(loaded[i].warmups_discarded == orig.warmups_discarded);
        CHECK(loaded[i].notes == orig.notes);
        CHECK(loaded[i].session_id == session.session_id);
    }
}

TEST_CASE("appending never rewrites existing bytes") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session session = store.open_session(fingerprint_with_power(true), "h");

    std::string previous;
    for (int i = 0; i < 4; ++i) {
        store.append_result(session, sample_result("s" + std::to_string(i), "v"));
        const std::string now = testutil::read_file(store.results_path());
        CHECK(now.size() > previous.size());
        CHECK(now.substr(0, previous.size()) == previous);
        previous = now;
    }
}

TEST_CASE("a truncated final record is skipped and reported") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session session = store.open_session(fingerprint_with_power(true), "h");
    store.append_result(session, sample_result("sort", "quicksort"));
    store.append_result(session, sample_result("sort", "mergesort"));

    // crash injection: chop the final record mid-way
    std::string content = testutil::read_file(store.results_path());
    content.resize(content.size() - 25);
    testutil::write_file(store.results_path(), content);

    const std::vector<ResultSet> loaded = store.load_results();
    CHECK(loaded.size() == 1);
    CHECK(loaded[0].variant_name == "quicksort");
    REQUIRE(store.load_warnings().size() == 1);
    CHECK(store.load_warnings()[0].find("truncated") != std::string::npos);
}

TEST_CASE("filters select by spec, variant and session") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session s1 = store.open_session(fingerprint_with_power(true), "h");
    const Session s2 = store.open_session(fingerprint_with_power(true), "h");
    store.append_result(s1, sample_result("sort", "quicksort"));
    store.append_result(s1, sample_result("hash", "fnv"));
    store.append_result(s2, sample_result("sort", "mergesort"));

    ResultFilter by_spec;
    by_spec.spec_id = "sort";
    CHECK(store.load_results(by_spec).size() == 2);

    ResultFilter by_variant;
    by_variant.variant_name = "fnv";
    CHECK(store.load_results(by_variant).size() == 1);

    ResultFilter by_session;
    by_session.session_id = s2.session_id;
    CHECK(store.load_results(by_session).size() == 1);

    ResultFilter unknown;
    unknown.session_id = "no-such-session";
    CHECK(store.load_results(unknown).empty());

    CHECK(store.load_results().size() == 3);
    CHECK(store.has_results_for("sort"));
    CHECK_FALSE(store.has_results_for("nope"));
}

TEST_CASE("loading a missing results file is an explicit error") {
    testutil::TempDir tmp;
    const Store store(tmp.path());
    CHECK_THROWS_AS(store.load_results(), MissingFileError);
}

TEST_CASE("session ids are unique and sessions round-trip") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session s1 = store.open_session(fingerprint_with_power(true), "hash1");
    const Session s2 = store.open_session(fingerprint_with_power(false), "hash2");
    CHECK(s1.session_id != s2.session_id);

    const auto sessions = store.load_sessions();
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].session_id == s1.session_id);
    CHECK(sessions[0].fingerprint.on_ac_power == true);
    CHECK(sessions[1].fingerprint.on_ac_power == false);
    CHECK(sessions[1].spec_file_hash == "hash2");

    CHECK(store.find_session(s1.session_id).has_value());
    CHECK_FALSE(store.find_session("missing").has_value());
}

TEST_CASE("comparison guard is quiet within a session") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session s = store.open_session(fingerprint_with_power(true), "h");
    ResultSet a = sample_result("sort", "quicksort");
    ResultSet b = sample_result("sort", "mergesort");
    a.session_id = s.session_id;
    b.session_id = s.session_id;
    CHECK_FALSE(store.comparison_guard(a, b).has_value());
}

TEST_CASE("comparison guard warns mildly across equal-environment sessions") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session s1 = store.open_session(fingerprint_with_power(true), "h");
    const Session s2 = store.open_session(fingerprint_with_power(true), "h");

    ResultSet a = sample_result("sort", "quicksort");
    ResultSet b = sample_result("sort", "mergesort");
    a.session_id = s1.session_id;
    b.session_id = s2.session_id;

    const auto warning = store.comparison_guard(a, b);
    REQUIRE(warning.has_value());
    CHECK_FALSE(warning->escalated);
    CHECK(warning->fingerprint_mismatches.empty());
}

TEST_CASE("comparison guard escalates and names the differing field") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session plugged = store.open_session(fingerprint_with_power(true), "h");
    const Session on_battery = store.open_session(fingerprint_with_power(false), "h");

    ResultSet a = sample_result("sort", "quicksort");
    ResultSet b = sample_result("sort", "mergesort");
    a.session_id = plugged.session_id;
    b.session_id = on_battery.session_id;

    const auto warning = store.comparison_guard(a, b);
    REQUIRE(warning.has_value());
    CHECK(warning->escalated);
    REQUIRE(warning->fingerprint_mismatches.size() == 1);
    CHECK(warning->fingerprint_mismatches[0].field == "on_ac_power");
    CHECK(warning->message.find("on_ac_power") != std::string::npos);
}

TEST_CASE("comparison guard escalates on a changed spec file") {
    testutil::TempDir tmp;
    Store store(tmp.path());
    const Session s1 = store.open_session(fingerprint_with_power(true), "hash-before");
    const Session s2 = store.open_session(fingerprint_with_power(true), "hash-after");

    ResultSet a = sample_result("sort", "quicksort");
    ResultSet b = sample_result("sort", "mergesort");
    a.session_id = s1.session_id;
    b.session_id = s2.session_id;

    const auto warning = store.comparison_guard(a, b);
    REQUIRE(warning.has_value());
    CHECK(warning->escalated);
    CHECK(warning->spec_hash_differs);
    CHECK(warning->message.find("spec file changed") != std::string::npos);
}

TEST_CASE("only one writer may hold the project lock") {
    testutil::TempDir tmp;
    Store first(tmp.path());
    first.acquire_writer_lock();

    Store second(tmp.path());
    CHECK_THROWS_AS(second.acquire_writer_lock(), StoreLockedError);

    first.release_writer_lock();
    CHECK_NOTHROW(second.acquire_writer_lock());
}
