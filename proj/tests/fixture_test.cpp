#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "benchlab/runner.hpp"
#include "benchlab/stats.hpp"
#include "fixtures/sort_impls.hpp"
#include "test_util.hpp"

using namespace benchlab;

namespace {

ConcreteInvocation invocation(const char* program, std::map<std::string, std::string> env) {
    ConcreteInvocation inv;
    inv.argv = {program};
    inv.command_line = program;
    inv.env = std::move(env);
    return inv;
}

}  // namespace

TEST_CASE("both sort implementations agree with the trusted sort on 1000 random lists") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> size_dist(0, 100);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = size_dist(rng);
        std::vector<int> values(n);
        for (int& v : values) v = n > 0 ? static_cast<int>(rng() % static_cast<unsigned>(n)) : 0;

        std::vector<int> expected = values;
        std::sort(expected.begin(), expected.end());

        fixture::Arena arena;
        const fixture::Node* input = fixture::from_vector(values, arena);
        CHECK(fixture::to_vector(fixture::quicksort(input, arena)) == expected);
        CHECK(fixture::to_vector(fixture::mergesort(input, arena)) == expected);
    }
}

TEST_CASE("degenerate lists sort trivially") {
    fixture::Arena arena;
    CHECK(fixture::to_vector(fixture::quicksort(nullptr, arena)).empty());
    CHECK(fixture::to_vector(fixture::mergesort(nullptr, arena)).empty());

    const fixture::Node* one = fixture::from_vector({7}, arena);
    CHECK(fixture::to_vector(fixture::quicksort(one, arena)) == std::vector<int>{7});
    CHECK(fixture::to_vector(fixture::mergesort(one, arena)) == std::vector<int>{7});

    const fixture::Node* two = fixture::from_vector({9, 3}, arena);
    CHECK(fixture::to_vector(fixture::quicksort(two, arena)) == std::vector<int>{3, 9});
    CHECK(fixture::to_vector(fixture::mergesort(two, arena)) == std::vector<int>{3, 9});
}

TEST_CASE("the sort binary verifies itself and runs the requested iterations") {
    const Runner runner(RunnerOptions{});
    const Measurement m = runner.run_once(invocation(
        SORT_BENCH_PATH, {{"IMPL", "mergesort"}, {"SIZE", "1000"}, {"NITERS", "3"}}));
    CHECK(m.exit_status == 0);

    // underscores in numbers are accepted
    const Measurement m2 = runner.run_once(invocation(
        SORT_BENCH_PATH, {{"IMPL", "quicksort"}, {"SIZE", "10_00"}, {"NITERS", "2"}}));
    CHECK(m2.exit_status == 0);

    // single-element list sorts under both implementations
    for (const char* impl : {"quicksort", "mergesort"}) {
        const Measurement m3 = runner.run_once(
            invocation(SORT_BENCH_PATH, {{"IMPL", impl}, {"SIZE", "1"}, {"NITERS", "1"}}));
        CHECK(m3.exit_status == 0);
    }
}

TEST_CASE("the sort binary fails helpfully on missing or invalid env vars") {
    const Runner runner(RunnerOptions{});

    std::string tail;
    Measurement m = runner.run_once(
        invocation(SORT_BENCH_PATH, {{"SIZE", "100"}, {"NITERS", "1"}}), &tail);
    CHECK(m.exit_status == 2);
    CHECK(tail.find("environment variable \"IMPL\" is missing") != std::string::npos);

    m = runner.run_once(invocation(SORT_BENCH_PATH, {{"IMPL", "bubblesort"},
                                                     {"SIZE", "100"},
                                                     {"NITERS", "1"}}),
                        &tail);
    CHECK(m.exit_status == 2);
    CHECK(tail.find("incorrect value \"bubblesort\"") != std::string::npos);
    CHECK(tail.find("[quicksort | mergesort]") != std::string::npos);

    m = runner.run_once(invocation(SORT_BENCH_PATH, {{"IMPL", "mergesort"},
                                                     {"SIZE", "abc"},
                                                     {"NITERS", "1"}}),
                        &tail);
    CHECK(m.exit_status == 2);
    CHECK(tail.find("\"SIZE\"") != std::string::npos);
}

TEST_CASE("the synthetic workload obeys its configured cost model within 15%") {
    const Runner runner(RunnerOptions{});
    for (const char* mode : {"spin", "sleep"}) {
        // 0.1 s fixed + 5 x 20 ms = 0.2 s in total
        const Measurement m = runner.run_once(invocation(SYNTH_WORKLOAD_PATH,
                                                         {{"MODE", mode},
                                                          {"SETUP_MS", "100"},
                                                          {"BASE_MS", "20"},
                                                          {"NITERS", "5"}}));
        CHECK(m.exit_status == 0);
        CHECK(m.wall_time == doctest::Approx(0.2).epsilon(0.15));
    }
}

TEST_CASE("a low-noise spin workload stays under 2% cv across 10 runs") {
    BenchmarkSpec spec;
    spec.id = "steady";
    spec.command_template = SYNTH_WORKLOAD_PATH;
    spec.env_template = {{"BASE_MS", "200"}, {"NITERS", "1"}};
    spec.variants = {{"only", {}}};
    spec.run_policy.mode = RunPolicy::Mode::Fixed;
    spec.run_policy.fixed_runs = 10;

    const ResultSet rs = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    const NoiseReport nr = noise_report(rs);
    CHECK(nr.cv < 0.02);
}

TEST_CASE("configured drift is visible to the trend detector") {
    testutil::TempDir tmp;
    BenchmarkSpec spec;
    spec.id = "drifting";
    spec.command_template = SYNTH_WORKLOAD_PATH;
    spec.env_template = {{"MODE", "sleep"},
                         {"BASE_MS", "30"},
                         {"NITERS", "1"},
                         {"DRIFT_PCT", "2"},
                         {"STATE_FILE", tmp.file("state")}};
    spec.variants = {{"only", {}}};
    spec.run_policy.mode = RunPolicy::Mode::Fixed;
    spec.run_policy.fixed_runs = 15;

    const ResultSet rs = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    CHECK(detect_trend(rs.wall_times()).flagged);
}

TEST_CASE("forced exit codes surface as failures") {
    const Measurement m = Runner(RunnerOptions{}).run_once(
        invocation(SYNTH_WORKLOAD_PATH, {{"BASE_MS", "1"}, {"EXIT_CODE", "3"}}));
    CHECK(m.exit_status == 3);
}

TEST_CASE("outlier injection is deterministic in seed and invocation count") {
    testutil::TempDir tmp;
    BenchmarkSpec spec;
    spec.id = "spiky";
    spec.command_template = SYNTH_WORKLOAD_PATH;
    spec.env_template = {{"MODE", "sleep"},
                         {"BASE_MS", "20"},
                         {"NITERS", "1"},
                         {"OUTLIER_P", "0.2"},
                         {"OUTLIER_MULT", "8"},
                         {"SEED", "7"},
                         {"STATE_FILE", tmp.file("state")}};
    spec.variants = {{"only", {}}};
    spec.run_policy.mode = RunPolicy::Mode::Fixed;
    spec.run_policy.fixed_runs = 12;

    auto spike_indices = [](const std::vector<double>& walls) {
        const double med = summarize(walls).median;
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < walls.size(); ++i)
            if (walls[i] > 4.0 * med) out.push_back(i);
        return out;
    };

    const ResultSet rs = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    const auto spikes = spike_indices(rs.wall_times());
    CHECK_FALSE(spikes.empty());

    // every injected spike is a detected outlier
    const auto detected = detect_outliers(rs.wall_times());
    for (std::size_t i : spikes)
        CHECK(std::find(detected.begin(), detected.end(), i) != detected.end());

    // same seed, fresh state file: the same runs spike again
    testutil::write_file(tmp.file("state"), "0\n");
    const ResultSet rs2 = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    CHECK(spike_indices(rs2.wall_times()) == spikes);
}
