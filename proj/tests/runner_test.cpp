#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <string>
#include <vector>

#include "benchlab/errors.hpp"
#include "benchlab/runner.hpp"
#include "test_util.hpp"

using namespace benchlab;

namespace {

// Benchmark spec around the synthetic workload; extra env entries become
// literal (placeholder-free) overrides.
BenchmarkSpec synth_spec(std::map<std::string, std::string> env) {
    BenchmarkSpec spec;
    spec.id = "synth";
    spec.command_template = SYNTH_WORKLOAD_PATH;
    spec.env_template = std::move(env);
    spec.variants = {{"only", {}}};
    spec.run_policy.mode = RunPolicy::Mode::Fixed;
    spec.run_policy.fixed_runs = 3;
    return spec;
}

ConcreteInvocation shell_invocation(const std::string& script) {
    ConcreteInvocation inv;
    inv.argv = {"/bin/sh", "-c", script};
    inv.command_line = script;
    return inv;
}

int count_in_state_file(const std::string& path) {
    const std::string content = testutil::read_file(path);
    return content.empty() ? 0 : std::stoi(content);
}

}  // namespace

TEST_CASE("run_once measures a no-op command quickly") {
    ConcreteInvocation inv;
    inv.argv = {"true"};
    inv.command_line = "true";
    const Measurement m = Runner(RunnerOptions{}).run_once(inv);
    CHECK(m.exit_status == 0);
    CHECK(m.wall_time >= 0.0);
    CHECK(m.wall_time < 0.1);
}

TEST_CASE("run_once wall time brackets a 200 ms sleep") {
    const BenchmarkSpec spec =
        synth_spec({{"MODE", "sleep"}, {"BASE_MS", "200"}, {"NITERS", "1"}});
    const ConcreteInvocation inv = resolve_invocation(spec, spec.variants[0], {});
    const Measurement m = Runner(RunnerOptions{}).run_once(inv);
    CHECK(m.exit_status == 0);
    CHECK(m.wall_time >= 0.2);
    CHECK(m.wall_time <= 0.3);
}

TEST_CASE("run_once records nonzero exits; run_series aborts on them") {
    const BenchmarkSpec spec = synth_spec({{"BASE_MS", "1"}, {"EXIT_CODE", "3"}});
    const ConcreteInvocation inv = resolve_invocation(spec, spec.variants[0], {});
    const Runner runner(RunnerOptions{});

    const Measurement m = runner.run_once(inv);
    CHECK(m.exit_status == 3);

    CHECK_THROWS_AS(runner.run_series(spec, spec.variants[0], {}), NonZeroExitError);
}

TEST_CASE("run_once reports spawn failures distinctly") {
    ConcreteInvocation inv;
    inv.argv = {"/nonexistent/program-that-is-not-here"};
    inv.command_line = inv.argv[0];
    CHECK_THROWS_AS(Runner(RunnerOptions{}).run_once(inv), SpawnFailureError);
}

TEST_CASE("timeout kills a stuck child") {
    const BenchmarkSpec spec =
        synth_spec({{"MODE", "sleep"}, {"BASE_MS", "5000"}, {"NITERS", "1"}});
    const ConcreteInvocation inv = resolve_invocation(spec, spec.variants[0], {});
    RunnerOptions options;
    options.timeout = 0.2;
    const auto start = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(Runner(options).run_once(inv), TimeoutError);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed < 2.0);
}

TEST_CASE("child output is captured, with the tail kept for error reports") {
    try {
        std::string tail;
        const Measurement m = Runner(RunnerOptions{}).run_once(shell_invocation("echo oops-marker; exit 3"),
                                                   &tail);
        CHECK(m.exit_status == 3);
        CHECK(tail.find("oops-marker") != std::string::npos);
    } catch (const Error& e) {
        FAIL(e.what());
    }
}

TEST_CASE("environment overlays the parent environment") {
    ConcreteInvocation inv = shell_invocation("test \"$BENCHLAB_TEST_FOO\" = bar");
    inv.env["BENCHLAB_TEST_FOO"] = "bar";
    CHECK(Runner(RunnerOptions{}).run_once(inv).exit_status == 0);
}

TEST_CASE("fixed policy runs exactly fixed_runs and warmups are discarded") {
    testutil::TempDir tmp;
    BenchmarkSpec spec =
        synth_spec({{"BASE_MS", "1"}, {"STATE_FILE", tmp.file("count")}});
    spec.warmup_count = 2;
    spec.run_policy.fixed_runs = 3;

    const ResultSet rs = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    CHECK(rs.measurements.size() == 3);
    CHECK(rs.warmups_discarded == 2);
    CHECK(count_in_state_file(tmp.file("count")) == 5);  // 2 warmups + 3 measured
}

TEST_CASE("adaptive policy satisfies both minimum runs and minimum total time") {
    BenchmarkSpec spec = synth_spec({{"MODE", "sleep"}, {"BASE_MS", "60"}, {"NITERS", "1"}});
    spec.run_policy.mode = RunPolicy::Mode::Adaptive;
    spec.run_policy.min_runs = 5;
    spec.run_policy.min_total_time = 0.2;
    spec.run_policy.max_runs = 50;

    const ResultSet rs = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    // 5 x 60 ms >= 0.2 s, so both conditions are met at exactly min_runs
    CHECK(rs.measurements.size() == 5);
}

TEST_CASE("adaptive policy keeps running until the time floor is reached") {
    BenchmarkSpec spec = synth_spec({{"MODE", "sleep"}, {"BASE_MS", "40"}, {"NITERS", "1"}});
    spec.run_policy.mode = RunPolicy::Mode::Adaptive;
    spec.run_policy.min_runs = 3;
    spec.run_policy.min_total_time = 0.3;
    spec.run_policy.max_runs = 50;

    const ResultSet rs = Runner(RunnerOptions{}).run_series(spec, spec.variants[0], {});
    const std::size_t n = rs.measurements.size();
    double total = 0.0;
    for (const Measurement& m : rs.measurements) total += m.wall_time;

    CHECK(n >= 3);
    CHECK(n <= 50);
    if (n < 50) CHECK(total >= 0.3);
    // a timed sleep can never be measured shorter than itself
    for (const Measurement& m : rs.measurements) CHECK(m.wall_time >= 0.04);
}

TEST_CASE("variants are interleaved round-robin, warmups included") {
    testutil::TempDir tmp;
    BenchmarkSpec spec = synth_spec({{"BASE_MS", "1"},
                                     {"MARK", "{tag}"},
                                     {"MARK_FILE", tmp.file("order")}});
    spec.variants = {{"a", {{"tag", "A"}}}, {"b", {{"tag", "B"}}}};
    spec.warmup_count = 1;
    spec.run_policy.fixed_runs = 3;

    const std::vector<ResultSet> results =
        Runner(RunnerOptions{}).run_interleaved(spec, spec.variants, {});
    CHECK(results.size() == 2);
    CHECK(results[0].measurements.size() == 3);
    CHECK(results[1].measurements.size() == 3);

    CHECK(testutil::read_file(tmp.file("order")) == "A\nB\nA\nB\nA\nB\nA\nB\n");
}

TEST_CASE("progress callback sees every run in order") {
    BenchmarkSpec spec = synth_spec({{"BASE_MS", "1"}});
    spec.warmup_count = 1;
    spec.run_policy.fixed_runs = 2;

    std::vector<std::pair<bool, std::size_t>> events;
    Runner runner(RunnerOptions{});
    runner.set_progress_callback(
        [&](const RunProgress& p) { events.emplace_back(p.warmup, p.run_index); });
    runner.run_series(spec, spec.variants[0], {});

    REQUIRE(events.size() == 3);
    CHECK(events[0] == std::pair<bool, std::size_t>{true, 0});
    CHECK(events[1] == std::pair<bool, std::size_t>{false, 0});
    CHECK(events[2] == std::pair<bool, std::size_t>{false, 1});
}

TEST_CASE("correctness check gates on the check command's exit status") {
    BenchmarkSpec spec;
    spec.id = "checked";
    spec.command_template = "true";
    spec.check_template = "sh -c 'exit {check_exit}'";
    spec.variants = {{"good", {{"check_exit", "0"}}}, {"bad", {{"check_exit", "1"}}}};

    const Runner runner(RunnerOptions{});
    CHECK_FALSE(runner.check_correctness(spec, spec.variants[0], {}).has_value());

    const auto failure = runner.check_correctness(spec, spec.variants[1], {});
    REQUIRE(failure.has_value());
    CHECK(failure->exit_status == 1);

    BenchmarkSpec unchecked = spec;
    unchecked.check_template.reset();
    CHECK_THROWS_AS(runner.check_correctness(unchecked, unchecked.variants[0], {}), Error);
}

TEST_CASE("plausibility check compares the central value against the range") {
    BenchmarkSpec spec;
    spec.id = "plaus";
    spec.command_template = "x";
    spec.expected_wall_range = {{1.0, 3.0}};

    ResultSet rs;
    rs.variant_name = "v";

    auto with_mean = [&](double mean) {
        ResultSet out = rs;
        out.measurements = {{mean, 0, 0, 0, 0}, {mean, 0, 0, 0, 0}};
        return out;
    };

    const auto fast = plausibility_check(with_mean(0.2), spec);
    REQUIRE(fast.has_value());
    CHECK(fast->kind == PlausibilityKind::WronglyFast);

    const auto slow = plausibility_check(with_mean(7.0), spec);
    REQUIRE(slow.has_value());
    CHECK(slow->kind == PlausibilityKind::WronglySlow);

    CHECK_FALSE(plausibility_check(with_mean(2.0), spec).has_value());
}

TEST_CASE("overhead probe splits fixed setup cost from per-iteration cost") {
    BenchmarkSpec spec = synth_spec({{"MODE", "sleep"},
                                     {"SETUP_MS", "100"},
                                     {"BASE_MS", "2"},
                                     {"NITERS", "{n}"}});
    spec.params["n"] = ValueDomain::list({"50"});
    spec.run_policy.fixed_runs = 3;

    ParamPoint point;
    point.assignments["n"] = "50";

    // true cost 0.1 + 0.002*n: t(50)=0.2, t(100)=0.3
    const OverheadEstimate est =
        Runner(RunnerOptions{}).estimate_overhead(spec, spec.variants[0], point, "n", 50);
    CHECK(est.n_low == 50);
    CHECK(est.n_high == 100);
    CHECK(est.per_iteration == doctest::Approx(0.002).epsilon(0.10));
    CHECK(est.fixed_overhead == doctest::Approx(0.1).epsilon(0.20));
}

TEST_CASE("overhead probe clamps negative fixed overhead to zero") {
    // pure per-iteration cost: fixed overhead is 0 up to measurement noise, so
    // the estimate must be >= 0 either way
    BenchmarkSpec spec =
        synth_spec({{"MODE", "sleep"}, {"BASE_MS", "2"}, {"NITERS", "{n}"}});
    spec.params["n"] = ValueDomain::list({"50"});
    spec.run_policy.fixed_runs = 2;

    ParamPoint point;
    point.assignments["n"] = "50";
    const OverheadEstimate est =
        Runner(RunnerOptions{}).estimate_overhead(spec, spec.variants[0], point, "n", 50);
    CHECK(est.fixed_overhead >= 0.0);
    CHECK(est.fixed_overhead < 0.05);
    CHECK(est.per_iteration == doctest::Approx(0.002).epsilon(0.10));
}

TEST_CASE("user and system time come from child accounting") {
    // a spinning child burns user CPU close to its wall time
    const BenchmarkSpec spec =
        synth_spec({{"MODE", "spin"}, {"BASE_MS", "150"}, {"NITERS", "1"}});
    const ConcreteInvocation inv = resolve_invocation(spec, spec.variants[0], {});
    const Measurement m = Runner(RunnerOptions{}).run_once(inv);
    CHECK(m.exit_status == 0);
    CHECK(m.user_time > 0.05);
    CHECK(m.max_rss > 0);
}
