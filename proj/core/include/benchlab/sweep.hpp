#pragma once

#include <optional>
#include <string>
#include <vector>

#include "benchlab/model.hpp"
#include "benchlab/runner.hpp"
#include "benchlab/stats.hpp"

namespace benchlab {

// Measures how performance varies over one input parameter, the capability a
// single-point comparison tool cannot offer.
struct SweepSpec {
    std::string spec_id;
    std::string swept_param;
    ValueDomain points;        // needs >= 2 points; log generators need positive bounds
    RunPolicy per_point_policy;
};

struct SweepPointResult {
    double param_value = 0.0;
    std::vector<std::string> variant_names;   // same set at every point
    std::vector<Summary> summaries;           // parallel to variant_names
    std::vector<NoiseReport> noise;           // parallel to variant_names
    std::vector<ResultSet> raw;               // parallel to variant_names
};

struct SweepResult {
    std::string spec_id;
    std::string swept_param;
    bool log_scale = false;  // drives log-x in the emitted plot script
    std::vector<SweepPointResult> points;  // param values strictly increasing
    std::string session_id;
    bool complete = true;
    std::string error;  // set when a point failed and the sweep stopped early
};

struct CalibrationResult {
    long long count = 1;
    double measured_wall = 0.0;  // seconds, at the returned count
    bool oversized = false;      // a single iteration already exceeds the window
};

// Validates a sweep against its benchmark spec (swept param declared, >= 2
// strictly increasing points, positive bounds for log scale).
std::vector<Diagnostic> validate_sweep(const SweepSpec& sweep, const BenchmarkSpec& spec);

// One full interleaved series per point x variant, points in ascending order.
// A failing point stops the sweep; everything measured so far is returned with
// complete == false so the caller can persist the partial data.
//
// calibrate_iter_param, when non-empty, re-calibrates that iteration count at
// every point (probed on the first variant, applied to all variants of the
// point so they stay comparable). Calibration is opt-in; by default points run
// exactly as declared.
SweepResult run_sweep(const Runner& runner, const BenchmarkSpec& spec, const SweepSpec& sweep,
                      const std::vector<Variant>& variants, const ParamPoint& base_point,
                      const std::string& calibrate_iter_param = "");

// Searches for an iteration count that lands the measured run inside the
// [0.2 s, 1.0 s] feedback window, aiming at their geometric mean (~0.447 s).
// Probes once, derives count = round(target / per_iteration), then re-probes
// up to twice. Returns count 1 with oversized set when a single iteration
// already exceeds the window. Throws CalibrationFailedError when the window is
// still missed after the re-probes.
CalibrationResult calibrate_iterations(const Runner& runner, const BenchmarkSpec& spec,
                                       const Variant& variant, const ParamPoint& point,
                                       const std::string& iter_param);

// Writes <base>.csv (comma-delimited, '#'-prefixed header: param followed by
// mean/stddev/min/max per variant) and <base>.gnuplot (mean with stddev error
// bars per variant, log-x when the sweep was log-scaled). Returns the two
// paths written.
std::vector<std::string> emit_plot_data(const SweepResult& sr, const std::string& base_path);

// Calibration window bounds and target, shared with tests.
constexpr double kCalibrationWindowLow = 0.2;
constexpr double kCalibrationWindowHigh = 1.0;
double calibration_target();  // sqrt(low * high)

}  // namespace benchlab
