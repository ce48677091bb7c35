#include "benchlab/runner.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <deque>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include "benchlab/errors.hpp"

extern char** environ;

namespace benchlab {

namespace {

constexpr std::size_t kOutputTailBytes = 4096;

double timeval_seconds(const timeval& tv) {
    return static_cast<double>(tv.tv_sec) + static_cast<double>(tv.tv_usec) / 1e6;
}

// Parent environment overlaid with the invocation's resolved entries.
std::vector<std::string> build_environment(const std::map<std::string, std::string>& overlay) {
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) {
        const char* eq = std::strchr(*e, '=');
        if (!eq) continue;
        const std::string name(*e, eq - *e);
        if (!overlay.count(name)) env.emplace_back(*e);
    }
    for (const auto& [name, value] : overlay) env.push_back(name + "=" + value);
    return env;
}

class RollingTail {
public:
    void feed(const char* data, std::size_t n) {
        buf_.insert(buf_.end(), data, data + n);
        if (buf_.size() > kOutputTailBytes)
            buf_.erase(buf_.begin(), buf_.begin() + (buf_.size() - kOutputTailBytes));
    }
    std::string str() const { return std::string(buf_.begin(), buf_.end()); }

private:
    std::deque<char> buf_;
};

struct ChildResult {
    int exit_status = 0;
    rusage usage{};
    double wall = 0.0;
    std::string output_tail;
};

int decode_status(int raw) {
    if (WIFEXITED(raw)) return WEXITSTATUS(raw);
    if (WIFSIGNALED(raw)) return 128 + WTERMSIG(raw);
    return -1;
}

ChildResult spawn_and_wait(const std::vector<std::string>& argv,
                           const std::map<std::string, std::string>& env_overlay,
                           std::optional<double> timeout) {
    if (argv.empty()) throw SpawnFailureError("", "empty command");

    int out_pipe[2];
    int err_pipe[2];  // exec-failure errno channel, closed on successful exec
    if (pipe(out_pipe) != 0) throw SpawnFailureError(argv[0], std::strerror(errno));
    if (pipe2(err_pipe, O_CLOEXEC) != 0) {
        close(out_pipe[0]);
        close(out_pipe[1]);
        throw SpawnFailureError(argv[0], std::strerror(errno));
    }

    std::vector<std::string> env_strings = build_environment(env_overlay);
    std::vector<char*> envp;
    envp.reserve(env_strings.size() + 1);
    for (std::string& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);

    std::vector<char*> args;
    std::vector<std::string> argv_copy = argv;
    args.reserve(argv_copy.size() + 1);
    for (std::string& s : argv_copy) args.push_back(s.data());
    args.push_back(nullptr);

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = fork();
    if (pid < 0) {
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        throw SpawnFailureError(argv[0], std::strerror(errno));
    }

    if (pid == 0) {
        // child: output captured, not inherited; console writes perturb timing
        close(out_pipe[0]);
        close(err_pipe[0]);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(out_pipe[1], STDERR_FILENO);
        close(out_pipe[1]);
        execvpe(args[0], args.data(), envp.data());
        const int err = errno;
        ssize_t ignored = write(err_pipe[1], &err, sizeof(err));
        (void)ignored;
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);

    // Drain child output into a rolling 4 KiB tail; a full pipe would block
    // the child and corrupt the timing.
    RollingTail tail;
    bool timed_out = false;
    const auto deadline = timeout ? start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        std::chrono::duration<double>(*timeout))
                                  : std::chrono::steady_clock::time_point::max();
    char buf[8192];
    bool eof = false;
    while (!eof) {
        int wait_ms = -1;
        if (timeout) {
            const auto remaining = deadline - std::chrono::steady_clock::now();
            wait_ms = static_cast<int>(
                std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count());
            // enforce the deadline even when the child keeps the pipe busy
            if (wait_ms <= 0) {
                kill(pid, SIGKILL);
                timed_out = true;
                ssize_t n;
                while ((n = read(out_pipe[0], buf, sizeof(buf))) > 0)
                    tail.feed(buf, static_cast<std::size_t>(n));
                break;
            }
        }
        pollfd pfd{out_pipe[0], POLLIN, 0};
        const int rc = poll(&pfd, 1, wait_ms);
        if (rc > 0) {
            const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                tail.feed(buf, static_cast<std::size_t>(n));
            } else {
                eof = true;
            }
        } else if (rc == 0) {
            continue;  // deadline handled at the top of the loop
        } else if (errno != EINTR) {
            eof = true;
        }
    }
    close(out_pipe[0]);

    ChildResult result;
    int raw_status = 0;
    std::memset(&result.usage, 0, sizeof(result.usage));
    while (wait4(pid, &raw_status, 0, &result.usage) < 0 && errno == EINTR) {
    }
    result.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    int exec_errno = 0;
    const ssize_t n = read(err_pipe[0], &exec_errno, sizeof(exec_errno));
    close(err_pipe[0]);
    if (n == sizeof(exec_errno))
        throw SpawnFailureError(argv[0], std::strerror(exec_errno));
    if (timed_out) throw TimeoutError(argv[0], timeout.value_or(0.0));

    result.exit_status = decode_status(raw_status);
    result.output_tail = tail.str();
    return result;
}

}  // namespace

std::vector<double> ResultSet::wall_times() const {
    std::vector<double> out;
    out.reserve(measurements.size());
    for (const Measurement& m : measurements) out.push_back(m.wall_time);
    return out;
}

std::vector<double> ResultSet::user_times() const {
    std::vector<double> out;
    out.reserve(measurements.size());
    for (const Measurement& m : measurements) out.push_back(m.user_time);
    return out;
}

std::vector<double> ResultSet::system_times() const {
    std::vector<double> out;
    out.reserve(measurements.size());
    for (const Measurement& m : measurements) out.push_back(m.system_time);
    return out;
}

std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Runner::Runner(RunnerOptions options) : options_(std::move(options)) {}

void Runner::set_session(std::string session_id, std::string fingerprint_id) {
    session_id_ = std::move(session_id);
    fingerprint_id_ = std::move(fingerprint_id);
}

void Runner::set_progress_callback(std::function<void(const RunProgress&)> cb) {
    progress_ = std::move(cb);
}

Measurement Runner::run_once(const ConcreteInvocation& inv, std::string* output_tail) const {
    std::vector<std::string> argv;
    if (options_.use_shell) {
        argv = {"/bin/sh", "-c", inv.command_line};
    } else {
        argv = inv.argv;
    }

    const ChildResult child = spawn_and_wait(argv, inv.env, options_.timeout);

    Measurement m;
    m.wall_time = child.wall;
    m.user_time = timeval_seconds(child.usage.ru_utime);
    m.system_time = timeval_seconds(child.usage.ru_stime);
    m.max_rss = static_cast<long long>(child.usage.ru_maxrss) * 1024;  // ru_maxrss is KiB on Linux
    m.exit_status = child.exit_status;
    if (output_tail) *output_tail = child.output_tail;
    return m;
}

namespace {

bool policy_satisfied(const RunPolicy& policy, std::size_t n, double total_wall) {
    if (policy.mode == RunPolicy::Mode::Fixed) return n >= policy.fixed_runs;
    if (n >= policy.max_runs) return true;
    return n >= policy.min_runs && total_wall >= policy.min_total_time;
}

bool maxrss_available(const std::vector<ResultSet>& results) {
    for (const ResultSet& rs : results)
        for (const Measurement& m : rs.measurements)
            if (m.max_rss > 0) return true;
    return false;
}

}  // namespace

ResultSet Runner::run_series_with_policy(const BenchmarkSpec& spec, const Variant& variant,
                                         const ParamPoint& point,
                                         const RunPolicy& policy) const {
    std::vector<Variant> single{variant};
    BenchmarkSpec patched = spec;
    patched.run_policy = policy;
    return run_interleaved(patched, single, point).front();
}

ResultSet Runner::run_series(const BenchmarkSpec& spec, const Variant& variant,
                             const ParamPoint& point) const {
    return run_series_with_policy(spec, variant, point, spec.run_policy);
}

std::vector<ResultSet> Runner::run_interleaved(const BenchmarkSpec& spec,
                                               const std::vector<Variant>& variants,
                                               const ParamPoint& point,
                                               const RunPolicy& policy_override) const {
    BenchmarkSpec patched = spec;
    patched.run_policy = policy_override;
    return run_interleaved(patched, variants, point);
}

std::vector<ResultSet> Runner::run_interleaved(const BenchmarkSpec& spec,
                                               const std::vector<Variant>& variants,
                                               const ParamPoint& point) const {
    // Resolve everything up front so a malformed spec fails before any child runs.
    std::vector<ConcreteInvocation> invocations;
    invocations.reserve(variants.size());
    for (const Variant& v : variants) invocations.push_back(resolve_invocation(spec, v, point));

    std::vector<ResultSet> results(variants.size());
    const std::string started = utc_timestamp_now();
    for (std::size_t i = 0; i < variants.size(); ++i) {
        results[i].spec_id = spec.id;
        results[i].variant_name = variants[i].name;
        results[i].param_point = point;
        results[i].warmups_discarded = spec.warmup_count;
        results[i].session_id = session_id_;
        results[i].fingerprint_id = fingerprint_id_;
        results[i].started_at = started;
    }

    auto execute = [&](std::size_t i, bool warmup, std::size_t run_index) {
        std::string tail;
        const Measurement m = run_once(invocations[i], &tail);
        if (m.exit_status != 0)
            throw NonZeroExitError(invocations[i].argv.empty() ? "" : invocations[i].argv[0],
                                   m.exit_status, tail);
        if (progress_)
            progress_({spec.id, variants[i].name, warmup, run_index, m.wall_time});
        return m;
    };

    // Warmup rounds, interleaved like the measured runs, all discarded.
    for (std::size_t w = 0; w < spec.warmup_count; ++w)
        for (std::size_t i = 0; i < variants.size(); ++i) execute(i, true, w);

    // Round-robin measurement: one run per unfinished variant per round, so
    // slow environmental drift spreads evenly instead of biasing whole blocks.
    std::vector<double> totals(variants.size(), 0.0);
    std::vector<bool> finished(variants.size(), false);
    std::size_t remaining = variants.size();
    while (remaining > 0) {
        for (std::size_t i = 0; i < variants.size(); ++i) {
            if (finished[i]) continue;
            const Measurement m = execute(i, false, results[i].measurements.size());
            results[i].measurements.push_back(m);
            totals[i] += m.wall_time;
            if (policy_satisfied(spec.run_policy, results[i].measurements.size(), totals[i])) {
                finished[i] = true;
                --remaining;
            }
        }
    }

    if (!maxrss_available(results)) {
        for (ResultSet& rs : results) rs.notes.push_back("MetricUnavailable: max_rss");
    }
    return results;
}

std::optional<CheckFailure> Runner::check_correctness(const BenchmarkSpec& spec,
                                                      const Variant& variant,
                                                      const ParamPoint& point) const {
    if (!spec.check_template) throw Error("spec '" + spec.id + "' has no check_template");

    // The check runs with the same substitutions and environment as the
    // measured command.
    BenchmarkSpec check_spec = spec;
    check_spec.command_template = *spec.check_template;
    const ConcreteInvocation inv = resolve_invocation(check_spec, variant, point);

    std::string tail;
    const Measurement m = run_once(inv, &tail);
    if (m.exit_status == 0) return std::nullopt;
    return CheckFailure{m.exit_status, tail};
}

OverheadEstimate Runner::estimate_overhead(const BenchmarkSpec& spec, const Variant& variant,
                                           const ParamPoint& point, const std::string& iter_param,
                                           long long n_low) const {
    if (n_low <= 0) throw Error("n_low must be positive");
    if (!point.assignments.count(iter_param) && !spec.params.count(iter_param))
        throw Error("'" + iter_param + "' is not a parameter of '" + spec.id + "'");

    auto with_count = [&](long long n) {
        ParamPoint p = point;
        p.assignments[iter_param] = format_param_value(static_cast<double>(n));
        return p;
    };

    const ResultSet low = run_series(spec, variant, with_count(n_low));
    const ResultSet high = run_series(spec, variant, with_count(2 * n_low));
    const double t_low = summarize(low.wall_times()).central(options_.mode);
    const double t_high = summarize(high.wall_times()).central(options_.mode);

    OverheadEstimate est;
    est.n_low = n_low;
    est.n_high = 2 * n_low;
    est.per_iteration = std::max(0.0, (t_high - t_low) / static_cast<double>(n_low));
    const double fixed = 2.0 * t_low - t_high;
    if (fixed < 0.0) {
        est.fixed_overhead = 0.0;
        est.noise_suspected = true;
    } else {
        est.fixed_overhead = fixed;
    }
    return est;
}

std::optional<PlausibilityWarning> plausibility_check(const ResultSet& rs,
                                                      const BenchmarkSpec& spec,
                                                      SummaryMode mode) {
    if (!spec.expected_wall_range)
        throw Error("spec '" + spec.id + "' has no expected_wall_range");
    const auto [low, high] = *spec.expected_wall_range;
    const double central = summarize(rs.wall_times()).central(mode);

    if (central >= low && central <= high) return std::nullopt;

    PlausibilityWarning w;
    w.central = central;
    w.low = low;
    w.high = high;
    if (central < low) {
        w.kind = PlausibilityKind::WronglyFast;
        w.message = "'" + rs.variant_name + "' ran in " + std::to_string(central) +
                    " s, faster than the expected [" + std::to_string(low) + ", " +
                    std::to_string(high) + "] s; it may be skipping work";
    } else {
        w.kind = PlausibilityKind::WronglySlow;
        w.message = "'" + rs.variant_name + "' ran in " + std::to_string(central) +
                    " s, slower than the expected [" + std::to_string(low) + ", " +
                    std::to_string(high) + "] s; check build flags and configuration";
    }
    return w;
}

}  // namespace benchlab
