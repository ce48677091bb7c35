#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "benchlab/model.hpp"
#include "benchlab/stats.hpp"

namespace benchlab {

// One child process execution. Wall time brackets the child's lifetime;
// user/system/max_rss come from the kernel's per-child accounting.
struct Measurement {
    double wall_time = 0.0;    // seconds
    double user_time = 0.0;    // seconds
    double system_time = 0.0;  // seconds
    long long max_rss = 0;     // bytes, 0 when the platform reports nothing
    int exit_status = 0;
};

struct ResultSet {
    std::string spec_id;
    std::string variant_name;
    ParamPoint param_point;
    std::vector<Measurement> measurements;  // in execution order
    std::size_t warmups_discarded = 0;
    std::string session_id;
    std::string fingerprint_id;
    std::string started_at;  // ISO-8601 UTC
    std::vector<std::string> notes;

    std::vector<double> wall_times() const;
    std::vector<double> user_times() const;
    std::vector<double> system_times() const;
};

struct OverheadEstimate {
    double fixed_overhead = 0.0;  // seconds
    double per_iteration = 0.0;   // seconds
    long long n_low = 0;
    long long n_high = 0;  // always 2 * n_low
    bool noise_suspected = false;  // raw fixed overhead came out negative
};

struct CheckFailure {
    int exit_status = 0;
    std::string output_tail;
};

enum class PlausibilityKind { WronglyFast, WronglySlow };

struct PlausibilityWarning {
    PlausibilityKind kind;
    double central = 0.0;  // seconds
    double low = 0.0;
    double high = 0.0;
    std::string message;
};

struct RunnerOptions {
    std::optional<double> timeout = std::nullopt;  // seconds per child
    bool use_shell = false;  // run the substituted command line through /bin/sh -c
    SummaryMode mode = SummaryMode::Mean;
};

struct RunProgress {
    std::string spec_id;
    std::string variant_name;
    bool warmup = false;
    std::size_t run_index = 0;
    double wall_time = 0.0;
};

// Executes invocations strictly sequentially: exactly one measured child at a
// time. Concurrent benchmark execution is a noise source, so there is no
// parallel mode by construction.
class Runner {
public:
    explicit Runner(RunnerOptions options = {});

    void set_session(std::string session_id, std::string fingerprint_id);
    void set_progress_callback(std::function<void(const RunProgress&)> cb);

    const RunnerOptions& options() const { return options_; }

    // Throws SpawnFailureError / TimeoutError. A nonzero exit is NOT an error
    // here; it is recorded in the Measurement for the caller to judge.
    Measurement run_once(const ConcreteInvocation& inv, std::string* output_tail = nullptr) const;

    // Warmups first (discarded), then measurements per the spec's run policy.
    // Throws NonZeroExitError on any nonzero exit, plus run_once errors.
    ResultSet run_series(const BenchmarkSpec& spec, const Variant& variant,
                         const ParamPoint& point) const;

    // Round-robin across variants (A,B,A,B,...) so slow environmental drift
    // lands evenly on every variant. Each ResultSet still satisfies the run
    // policy on its own. Results come back in the variants' order.
    std::vector<ResultSet> run_interleaved(const BenchmarkSpec& spec,
                                           const std::vector<Variant>& variants,
                                           const ParamPoint& point) const;
    std::vector<ResultSet> run_interleaved(const BenchmarkSpec& spec,
                                           const std::vector<Variant>& variants,
                                           const ParamPoint& point,
                                           const RunPolicy& policy_override) const;

    // Runs the resolved check command once; pass == exit status 0.
    // Requires spec.check_template to be present.
    std::optional<CheckFailure> check_correctness(const BenchmarkSpec& spec,
                                                  const Variant& variant,
                                                  const ParamPoint& point) const;

    // Measures t(n_low) and t(2*n_low) over iter_param and splits the cost into
    // fixed_overhead = 2*t(n) - t(2n) and per_iteration = (t(2n) - t(n))/n.
    // iter_param must scale work linearly; that is the caller's contract.
    OverheadEstimate estimate_overhead(const BenchmarkSpec& spec, const Variant& variant,
                                       const ParamPoint& point, const std::string& iter_param,
                                       long long n_low) const;

private:
    ResultSet run_series_with_policy(const BenchmarkSpec& spec, const Variant& variant,
                                     const ParamPoint& point, const RunPolicy& policy) const;

    RunnerOptions options_;
    std::string session_id_;
    std::string fingerprint_id_;
    std::function<void(const RunProgress&)> progress_;
};

// Pure range check against spec.expected_wall_range; the central value follows
// the given summary mode. Requires the range to be present.
std::optional<PlausibilityWarning> plausibility_check(const ResultSet& rs,
                                                      const BenchmarkSpec& spec,
                                                      SummaryMode mode = SummaryMode::Mean);

// ISO-8601 UTC timestamp for "now", second resolution.
std::string utc_timestamp_now();

}  // namespace benchlab
