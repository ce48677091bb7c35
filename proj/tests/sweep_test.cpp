#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "benchlab/errors.hpp"
#include "benchlab/sweep.hpp"
#include "test_util.hpp"

using namespace benchlab;

namespace {

// size scales a sleep linearly: 0.4 ms per unit keeps the whole sweep fast
BenchmarkSpec linear_cost_spec() {
    BenchmarkSpec spec;
    spec.id = "linear";
    spec.command_template = SYNTH_WORKLOAD_PATH;
    spec.env_template = {{"MODE", "sleep"},
                         {"BASE_MS", "0.4"},
                         {"NITERS", "{size}"}};
    spec.params["size"] = ValueDomain::list({"50", "100", "200"});
    spec.variants = {{"a", {}}};
    spec.run_policy.mode = RunPolicy::Mode::Fixed;
    spec.run_policy.fixed_runs = 2;
    return spec;
}

SweepSpec sweep_over_sizes(const BenchmarkSpec& spec) {
    SweepSpec sweep;
    sweep.spec_id = spec.id;
    sweep.swept_param = "size";
    sweep.points = spec.params.at("size");
    sweep.per_point_policy = spec.run_policy;
    return sweep;
}

}  // namespace

TEST_CASE("log generators expand to exact decades") {
    const ValueDomain domain = ValueDomain::log(1e3, 1e6, 4);
    CHECK(domain.expand_numeric() == std::vector<double>{1000, 10000, 100000, 1000000});
}

TEST_CASE("sweep validation catches undeclared params and bad point sets") {
    const BenchmarkSpec spec = linear_cost_spec();

    SweepSpec good = sweep_over_sizes(spec);
    CHECK(validate_sweep(good, spec).empty());

    SweepSpec wrong_param = good;
    wrong_param.swept_param = "nope";
    CHECK_FALSE(validate_sweep(wrong_param, spec).empty());

    SweepSpec one_point = good;
    one_point.points = ValueDomain::list({"10"});
    CHECK_FALSE(validate_sweep(one_point, spec).empty());

    SweepSpec unsorted = good;
    unsorted.points = ValueDomain::list({"20", "10"});
    CHECK_FALSE(validate_sweep(unsorted, spec).empty());

    SweepSpec bad_log = good;
    bad_log.points = ValueDomain::log(0.0, 10.0, 3);
    CHECK_FALSE(validate_sweep(bad_log, spec).empty());
}

TEST_CASE("a sweep measures every point x variant, ascending") {
    BenchmarkSpec spec = linear_cost_spec();
    spec.variants = {{"a", {}}, {"b", {}}};
    // distinguish the variants or the identity detector would rightly complain
    spec.env_template["TAG"] = "{tag}";
    spec.variants[0].bindings["tag"] = "a";
    spec.variants[1].bindings["tag"] = "b";

    SweepSpec sweep = sweep_over_sizes(spec);
    sweep.points = ValueDomain::list({"50", "100"});

    const Runner runner(RunnerOptions{});
    const SweepResult sr = run_sweep(runner, spec, sweep, spec.variants, {});
    CHECK(sr.complete);
    REQUIRE(sr.points.size() == 2);
    CHECK(sr.points[0].param_value == 50);
    CHECK(sr.points[1].param_value == 100);
    for (const SweepPointResult& pr : sr.points) {
        CHECK(pr.variant_names == std::vector<std::string>{"a", "b"});
        CHECK(pr.summaries.size() == 2);
        CHECK(pr.noise.size() == 2);
    }
}

TEST_CASE("per-point means grow with a linearly scaled workload") {
    const BenchmarkSpec spec = linear_cost_spec();
    const SweepSpec sweep = sweep_over_sizes(spec);

    const SweepResult sr = run_sweep(Runner(RunnerOptions{}), spec, sweep, spec.variants, {});
    CHECK(sr.complete);
    REQUIRE(sr.points.size() == 3);
    for (std::size_t i = 1; i < sr.points.size(); ++i)
        CHECK(sr.points[i].summaries[0].mean >= sr.points[i - 1].summaries[0].mean);
}

TEST_CASE("a failing point stops the sweep and keeps partial results") {
    BenchmarkSpec spec = linear_cost_spec();
    // fail only at size 100
    spec.env_template["EXIT_CODE"] = "{code}";
    spec.params["code"] = ValueDomain::list({"0"});
    spec.variants[0].bindings.clear();

    SweepSpec sweep = sweep_over_sizes(spec);
    sweep.swept_param = "size";
    sweep.points = ValueDomain::list({"50", "100"});

    ParamPoint base;
    base.assignments["code"] = "0";

    // sanity: with code=0 everywhere the sweep completes
    CHECK(run_sweep(Runner(RunnerOptions{}), spec, sweep, spec.variants, base).complete);

    // now make every run fail: nothing completes, error is carried out
    base.assignments["code"] = "9";
    const SweepResult sr = run_sweep(Runner(RunnerOptions{}), spec, sweep, spec.variants, base);
    CHECK_FALSE(sr.complete);
    CHECK(sr.points.empty());
    CHECK(sr.error.find("size=50") != std::string::npos);
}

TEST_CASE("calibration lands a linear workload inside the window") {
    // 5 ms per iteration: expect a count near 89 and a measured time near the
    // 0.447 s target
    BenchmarkSpec spec = linear_cost_spec();
    spec.env_template["BASE_MS"] = "5";
    spec.env_template["NITERS"] = "{n}";
    spec.params.clear();
    spec.params["n"] = ValueDomain::list({"1"});

    const CalibrationResult cal =
        calibrate_iterations(Runner(RunnerOptions{}), spec, spec.variants[0], {}, "n");
    CHECK_FALSE(cal.oversized);
    CHECK(cal.count >= 40);
    CHECK(cal.count <= 200);
    CHECK(cal.measured_wall >= kCalibrationWindowLow);
    CHECK(cal.measured_wall <= kCalibrationWindowHigh);
}

TEST_CASE("calibration returns 1 with a note when one iteration overflows the window") {
    BenchmarkSpec spec = linear_cost_spec();
    spec.env_template["BASE_MS"] = "1200";
    spec.env_template["NITERS"] = "{n}";
    spec.params.clear();
    spec.params["n"] = ValueDomain::list({"1"});

    const CalibrationResult cal =
        calibrate_iterations(Runner(RunnerOptions{}), spec, spec.variants[0], {}, "n");
    CHECK(cal.count == 1);
    CHECK(cal.oversized);
    CHECK(cal.measured_wall > kCalibrationWindowHigh);
}

TEST_CASE("the calibration target is the geometric midpoint of the window") {
    CHECK(calibration_target() == doctest::Approx(0.4472135955).epsilon(1e-9));
}

TEST_CASE("plot emission writes the documented csv shape and a gnuplot script") {
    SweepResult sr;
    sr.spec_id = "linear";
    sr.swept_param = "size";
    sr.log_scale = true;

    for (double size : {1000.0, 10000.0}) {
        SweepPointResult pr;
        pr.param_value = size;
        pr.variant_names = {"a", "b"};
        for (int v = 0; v < 2; ++v) {
            Summary s;
            s.mean = size / 1e6 + v * 0.001 + 0.000123456789;
            s.stddev = 0.0001;
            s.min = s.mean - 0.0002;
            s.max = s.mean + 0.0002;
            s.median = s.mean;
            s.n = 5;
            pr.summaries.push_back(s);
            pr.noise.emplace_back();
        }
        sr.points.push_back(pr);
    }

    testutil::TempDir tmp;
    const auto files = emit_plot_data(sr, tmp.file("plot"));
    REQUIRE(files.size() == 2);

    const std::string csv = testutil::read_file(files[0]);
    std::istringstream lines(csv);
    std::string header, row1, row2, extra;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    CHECK_FALSE(std::getline(lines, extra));  // exactly 2 data rows

    CHECK(header == "# size,a_mean,a_stddev,a_min,a_max,b_mean,b_stddev,b_min,b_max");
    // 9 columns = param + 4 per variant
    CHECK(std::count(row1.begin(), row1.end(), ',') == 8);
    CHECK(row1.rfind("1000,", 0) == 0);
    CHECK(row2.rfind("10000,", 0) == 0);

    // round-trip: parsing the emitted row reproduces the summaries exactly
    std::istringstream fields(row1.substr(row1.find(',') + 1));
    std::string cell;
    std::getline(fields, cell, ',');
    CHECK(std::strtod(cell.c_str(), nullptr) == sr.points[0].summaries[0].mean);
    std::getline(fields, cell, ',');
    CHECK(std::strtod(cell.c_str(), nullptr) == sr.points[0].summaries[0].stddev);

    const std::string script = testutil::read_file(files[1]);
    CHECK(script.find("set logscale x") != std::string::npos);
    CHECK(script.find("yerrorlines") != std::string::npos);
    CHECK(script.find("title 'a'") != std::string::npos);
    CHECK(script.find("title 'b'") != std::string::npos);

    // when gnuplot is around, the script must actually run
    if (std::system("command -v gnuplot >/dev/null 2>&1") == 0) {
        const std::string cmd = "cd " + tmp.path() + " && gnuplot -e 'set terminal dumb' " +
                                files[1] + " >/dev/null 2>&1";
        CHECK(std::system(cmd.c_str()) == 0);
    } else {
        MESSAGE("gnuplot not installed; script execution not verified");
    }
}

TEST_CASE("a single-variant, single-policy sweep point matches run_series") {
    BenchmarkSpec spec = linear_cost_spec();
    spec.params["size"] = ValueDomain::list({"50", "100"});

    SweepSpec sweep = sweep_over_sizes(spec);
    sweep.points = ValueDomain::list({"50", "100"});

    const Runner runner(RunnerOptions{});
    const SweepResult sr = run_sweep(runner, spec, sweep, spec.variants, {});

    ParamPoint point;
    point.assignments["size"] = "50";
    const ResultSet direct = runner.run_series(spec, spec.variants[0], point);

    // same fixture, same policy: deterministic sleep makes the two paths agree
    REQUIRE(sr.complete);
    CHECK(sr.points[0].summaries[0].n == direct.measurements.size());
    CHECK(sr.points[0].summaries[0].mean ==
          doctest::Approx(summarize(direct.wall_times()).mean).epsilon(0.25));
    CHECK(sr.points[0].raw[0].param_point.assignments.at("size") == "50");
}
