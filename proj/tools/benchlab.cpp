// benchlab: process-level benchmark harness with repeat-run statistics,
// input-size sweeps, environment diagnostics and an append-only analysis
// journal.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "benchlab/envcheck.hpp"
#include "benchlab/errors.hpp"
#include "benchlab/journal.hpp"
#include "benchlab/model.hpp"
#include "benchlab/project.hpp"
#include "benchlab/report.hpp"
#include "benchlab/runner.hpp"
#include "benchlab/stats.hpp"
#include "benchlab/store.hpp"
#include "benchlab/sweep.hpp"

namespace {

using namespace benchlab;

constexpr int kExitOk = 0;
constexpr int kExitChildFailure = 1;
constexpr int kExitUsage = 2;

bool use_color() {
    static const bool enabled = isatty(STDOUT_FILENO) && std::getenv("NO_COLOR") == nullptr;
    return enabled;
}

void print_warning(const std::string& msg) {
    if (use_color())
        std::cout << "\033[33mwarning:\033[0m " << msg << "\n";
    else
        std::cout << "warning: " << msg << "\n";
}

void print_note(const std::string& msg) { std::cout << "note: " << msg << "\n"; }

[[noreturn]] void die_usage(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    std::exit(kExitUsage);
}

std::string describe_point(const ParamPoint& point) {
    std::string out;
    for (const auto& [k, v] : point.assignments) {
        if (!out.empty()) out += " ";
        out += k + "=" + v;
    }
    return out;
}

void print_series_summary(const ResultSet& rs) {
    const Summary s = summarize(rs.wall_times());
    const Summary user = summarize(rs.user_times());
    const Summary sys = summarize(rs.system_times());
    std::cout << "  " << rs.variant_name << ":\n";
    std::cout << "    Time (mean ± σ):  " << format_ms(s.mean) << " ms ± " << format_ms(s.stddev)
              << " ms  [User: " << format_ms(user.mean) << " ms, System: " << format_ms(sys.mean)
              << " ms]\n";
    std::cout << "    Range (min … max):  " << format_ms(s.min) << " ms … " << format_ms(s.max)
              << " ms  (" << s.n << " runs";
    if (rs.warmups_discarded > 0) std::cout << ", " << rs.warmups_discarded << " warmups";
    std::cout << ")\n";
}

void print_noise(const ResultSet& rs, const NoiseThresholds& thresholds) {
    const NoiseReport nr = noise_report(rs, thresholds);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f%%", nr.cv * 100.0);
    std::string line = rs.variant_name + ": cv " + buf + " (" + to_string(nr.cv_verdict) + ")";

    std::snprintf(buf, sizeof(buf), "%.1f%%", nr.system_fraction * 100.0);
    line += ", system time " + std::string(buf) + " (" + to_string(nr.system_verdict) + ")";

    if (nr.cv_verdict == CvVerdict::Ok && nr.system_verdict == SystemVerdict::Ok &&
        nr.outlier_indices.empty() && !nr.trend.flagged) {
        std::cout << "  noise: " << line << "\n";
        return;
    }
    if (!nr.outlier_indices.empty()) {
        line += ", outlier runs:";
        for (std::size_t i : nr.outlier_indices) line += " " + std::to_string(i);
    }
    if (nr.trend.flagged) {
        std::snprintf(buf, sizeof(buf), "%.2f", nr.trend.rho);
        line += ", drift across runs (rho " + std::string(buf) +
                "); check frequency scaling and thermal state";
    }
    print_warning("noise: " + line);
}

Project load_project_or_die(const std::string& dir) {
    try {
        return load_project(dir);
    } catch (const MissingFileError& e) {
        die_usage(std::string(e.what()) + " (run 'benchlab init' first?)");
    } catch (const LoadError& e) {
        die_usage(e.what());
    }
}

void validate_or_die(const Project& project) {
    const std::vector<Diagnostic> diags = validate_project(project.specs);
    if (diags.empty()) return;
    for (const Diagnostic& d : diags)
        std::cerr << "error [" << to_string(d.code) << "] " << d.spec_id << ": " << d.message
                  << "\n";
    std::exit(kExitUsage);
}

Journal open_journal(const Project& project, const Store& store) {
    Journal journal(project_journal_path(project.dir));
    for (const std::string& w : journal.load_warnings()) print_warning(w);
    journal.set_results_probe([&store](const std::string& id) { return store.has_results_for(id); });
    journal.set_spec_probe(
        [&project](const std::string& id) { return project.find_spec(id) != nullptr; });
    journal.set_session_probe([&store](const std::string& id) {
        return store.find_session(id).has_value();
    });
    return journal;
}

// ---- run ---------------------------------------------------------------

struct RunArgs {
    std::vector<std::string> only;
    std::vector<std::string> skip;
    std::string mode;
    bool shell = false;
    double timeout = 0.0;
};

int cmd_run(const std::string& dir, const RunArgs& args) {
    Project project = load_project_or_die(dir);
    validate_or_die(project);
    if (!args.mode.empty()) project.settings.mode = summary_mode_from_string(args.mode);

    for (const std::string& id : args.only)
        if (!project.find_spec(id)) die_usage("--only: no benchmark named '" + id + "'");
    for (const std::string& id : args.skip)
        if (!project.find_spec(id)) die_usage("--skip: no benchmark named '" + id + "'");

    std::vector<const BenchmarkSpec*> selected;
    for (const BenchmarkSpec& spec : project.specs) {
        if (!args.only.empty() &&
            std::find(args.only.begin(), args.only.end(), spec.id) == args.only.end())
            continue;
        if (std::find(args.skip.begin(), args.skip.end(), spec.id) != args.skip.end()) continue;
        selected.push_back(&spec);
    }
    if (selected.empty()) {
        print_note("nothing to run");
        return kExitOk;
    }

    const EnvironmentFingerprint fp = capture_fingerprint();
    for (const EnvWarning& w : check_environment(fp)) {
        if (w.kind == EnvWarningKind::Unknown)
            print_note(w.message);
        else
            print_warning(w.message);
    }

    Store store(dir);
    try {
        store.acquire_writer_lock();
    } catch (const StoreLockedError& e) {
        die_usage(e.what());
    }
    Journal journal = open_journal(project, store);

    // tip-of-the-hat to pre-registration: nudge, never a gate
    for (const BenchmarkSpec* spec : selected) {
        bool has_expectation = false;
        for (const JournalEntry& e : journal.entries())
            if (e.kind == EntryKind::Expectation &&
                std::find(e.refs.begin(), e.refs.end(), "spec:" + spec->id) != e.refs.end())
                has_expectation = true;
        if (!has_expectation)
            print_note("no expectation recorded for '" + spec->id +
                       "' — consider 'benchlab journal expect " + spec->id +
                       " \"...\"' before looking at results");
    }

    const Session session = store.open_session(fp, project.spec_file_hash);

    RunnerOptions options;
    options.use_shell = args.shell;
    options.mode = project.settings.mode;
    if (args.timeout > 0.0) options.timeout = args.timeout;
    Runner runner(options);
    runner.set_session(session.session_id, fp.fingerprint_id);

    int exit_code = kExitOk;
    for (const BenchmarkSpec* spec : selected) {
        for (const ParamPoint& point : spec->param_points()) {
            std::cout << "\nBenchmark " << spec->id;
            const std::string pd = describe_point(point);
            if (!pd.empty()) std::cout << " (" << pd << ")";
            std::cout << ":\n";

            // correctness gate before any timing
            std::vector<Variant> included;
            for (const Variant& v : spec->variants) {
                if (spec->check_template) {
                    const auto failure = runner.check_correctness(*spec, v, point);
                    if (failure) {
                        print_warning("'" + v.name + "' is functionally incorrect (check exited " +
                                      std::to_string(failure->exit_status) +
                                      ") — excluded from comparison");
                        if (!failure->output_tail.empty())
                            std::cout << "    check output tail:\n" << failure->output_tail << "\n";
                        continue;
                    }
                }
                included.push_back(v);
            }
            if (included.empty()) {
                print_warning("no variant of '" + spec->id + "' passed its correctness check");
                exit_code = kExitChildFailure;
                continue;
            }

            std::vector<ResultSet> results;
            try {
                results = runner.run_interleaved(*spec, included, point);
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitChildFailure;
            }

            store.append_results(session, results);
            for (ResultSet& rs : results) {
                rs.session_id = session.session_id;
                rs.fingerprint_id = fp.fingerprint_id;
            }

            for (const ResultSet& rs : results) print_series_summary(rs);
            std::cout << "\n";

            // noise verdicts always come before ratios
            for (const ResultSet& rs : results) print_noise(rs, project.settings.thresholds);

            if (spec->expected_wall_range)
                for (const ResultSet& rs : results)
                    if (const auto w = plausibility_check(rs, *spec, project.settings.mode))
                        print_warning(w->message);

            for (std::size_t i = 0; i < results.size(); ++i)
                for (std::size_t j = i + 1; j < results.size(); ++j)
                    if (const auto flag = detect_indistinguishable(results[i], results[j]))
                        print_warning(flag->message);

            if (results.size() >= 2) {
                std::vector<std::pair<std::string, Summary>> rows;
                for (const ResultSet& rs : results)
                    rows.emplace_back(rs.variant_name, summarize(rs.wall_times()));
                std::cout << "\n" << render_comparison(rows, project.settings.mode);
            }
        }
    }
    return exit_code;
}

// ---- compare -------------------------------------------------------------

int cmd_compare(const std::string& dir, const std::string& only_spec, const std::string& mode) {
    Project project = load_project_or_die(dir);
    if (!mode.empty()) project.settings.mode = summary_mode_from_string(mode);
    Store store(dir);

    bool printed = false;
    for (const BenchmarkSpec& spec : project.specs) {
        if (!only_spec.empty() && spec.id != only_spec) continue;
        const LatestResults latest = latest_results(store, spec.id);
        for (const std::string& w : store.load_warnings()) print_warning(w);
        if (latest.point_keys.empty()) continue;

        for (const std::string& key : latest.point_keys) {
            std::cout << "\n" << spec.id;
            if (!key.empty()) std::cout << " (" << key << ")";
            std::cout << ":\n";

            std::vector<std::pair<std::string, Summary>> rows;
            std::vector<const ResultSet*> shown;
            for (const Variant& v : spec.variants) {
                const auto it = latest.by_point.at(key).find(v.name);
                if (it == latest.by_point.at(key).end()) continue;
                rows.emplace_back(v.name, summarize(it->second.wall_times()));
                shown.push_back(&it->second);
            }
            if (rows.empty()) continue;

            for (std::size_t i = 0; i < shown.size(); ++i)
                for (std::size_t j = i + 1; j < shown.size(); ++j)
                    if (const auto guard = store.comparison_guard(*shown[i], *shown[j]))
                        print_warning(guard->message);

            std::cout << render_comparison(rows, project.settings.mode);
            printed = true;
        }
    }
    if (!printed) print_note("no stored results yet; run 'benchlab run' first");
    return kExitOk;
}

// ---- sweep ---------------------------------------------------------------

struct SweepArgs {
    std::string spec_id;
    std::string param;
    std::string points_csv;
    std::string linear;
    std::string log_range;
    bool calibrate = false;
    std::string iter_param;
    std::size_t runs = 0;
    std::string out_base;
};

ValueDomain parse_range_flag(const std::string& text, bool log_scale) {
    double start = 0.0, stop = 0.0;
    std::size_t count = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%zu", &start, &stop, &count) != 3)
        die_usage("range must look like start:stop:count, got '" + text + "'");
    return log_scale ? ValueDomain::log(start, stop, count)
                     : ValueDomain::linear(start, stop, count);
}

int cmd_sweep(const std::string& dir, const SweepArgs& args) {
    Project project = load_project_or_die(dir);
    validate_or_die(project);
    const BenchmarkSpec* spec = project.find_spec(args.spec_id);
    if (!spec) die_usage("no benchmark named '" + args.spec_id + "'");
    if (!spec->params.count(args.param))
        die_usage("'" + args.param + "' is not a parameter of '" + args.spec_id + "'");
    if (args.calibrate && args.iter_param.empty())
        die_usage("--calibrate needs --iter-param NAME");

    SweepSpec sweep;
    sweep.spec_id = spec->id;
    sweep.swept_param = args.param;
    if (!args.points_csv.empty()) {
        std::vector<std::string> values;
        std::string token;
        std::stringstream ss(args.points_csv);
        while (std::getline(ss, token, ',')) values.push_back(token);
        sweep.points = ValueDomain::list(values);
    } else if (!args.linear.empty()) {
        sweep.points = parse_range_flag(args.linear, false);
    } else if (!args.log_range.empty()) {
        sweep.points = parse_range_flag(args.log_range, true);
    } else {
        sweep.points = spec->params.at(args.param);  // the declared domain is the axis
    }
    sweep.per_point_policy = spec->run_policy;
    if (args.runs > 0) {
        sweep.per_point_policy.mode = RunPolicy::Mode::Fixed;
        sweep.per_point_policy.fixed_runs = args.runs;
    }

    for (const Diagnostic& d : validate_sweep(sweep, *spec))
        die_usage("[" + to_string(d.code) + "] " + d.message);

    // Base point: first value of every other parameter's domain.
    ParamPoint base;
    for (const auto& [name, domain] : spec->params) {
        if (name == args.param) continue;
        const auto values = domain.expand();
        base.assignments[name] = values.front();
    }

    const EnvironmentFingerprint fp = capture_fingerprint();
    Store store(dir);
    try {
        store.acquire_writer_lock();
    } catch (const StoreLockedError& e) {
        die_usage(e.what());
    }
    const Session session = store.open_session(fp, project.spec_file_hash);

    Runner runner(RunnerOptions{});
    runner.set_session(session.session_id, fp.fingerprint_id);

    SweepResult sr = run_sweep(runner, *spec, sweep, spec->variants, base,
                               args.calibrate ? args.iter_param : "");

    for (const SweepPointResult& pr : sr.points) {
        store.append_results(session, pr.raw);
        std::cout << args.param << "=" << format_param_value(pr.param_value) << ":\n";
        std::vector<std::pair<std::string, Summary>> rows;
        for (std::size_t i = 0; i < pr.variant_names.size(); ++i)
            rows.emplace_back(pr.variant_names[i], pr.summaries[i]);
        std::cout << render_comparison(rows, project.settings.mode);
    }

    if (!sr.complete) {
        std::cerr << "error: sweep incomplete: " << sr.error << "\n";
        std::cerr << "partial results were persisted\n";
        return kExitChildFailure;
    }

    const std::string base_path = args.out_base.empty()
                                      ? dir + "/sweep-" + spec->id + "-" + args.param
                                      : args.out_base;
    for (const std::string& path : emit_plot_data(sr, base_path))
        std::cout << "wrote " << path << "\n";
    return kExitOk;
}

// ---- journal --------------------------------------------------------------

int cmd_journal_status(const Project& project, const Store& store, Journal& journal) {
    std::vector<std::string> with_results;
    for (const BenchmarkSpec& spec : project.specs)
        if (store.has_results_for(spec.id)) with_results.push_back(spec.id);

    const JournalStatusReport report = journal.status(with_results);
    if (report.clean() && report.conjectures.empty()) {
        std::cout << "journal is clean: expectations pre-registered, explanations tested\n";
        return kExitOk;
    }
    for (std::int64_t id : report.untested_explanations)
        std::cout << "untested (will render as conjecture): #" << id << " "
                  << journal.find(id)->text << "\n";
    for (std::int64_t id : report.conjectures)
        std::cout << "conjecture (marked untestable): #" << id << " " << journal.find(id)->text
                  << "\n";
    for (std::int64_t id : report.refuted_without_revision)
        std::cout << "refuted without revision: #" << id << " " << journal.find(id)->text << "\n";
    for (const std::string& spec_id : report.specs_missing_expectation)
        std::cout << "no pre-registered expectation: " << spec_id << "\n";
    for (std::int64_t id : report.post_hoc_expectations)
        std::cout << "post-hoc expectation: #" << id << " " << journal.find(id)->text << "\n";
    return kExitOk;
}

// ---- overhead ----------------------------------------------------------------

int cmd_overhead(const std::string& dir, const std::string& spec_id,
                 const std::string& iter_param, long long n_low, const std::string& variant_name) {
    Project project = load_project_or_die(dir);
    validate_or_die(project);
    const BenchmarkSpec* spec = project.find_spec(spec_id);
    if (!spec) die_usage("no benchmark named '" + spec_id + "'");
    if (!spec->params.count(iter_param))
        die_usage("'" + iter_param + "' is not a parameter of '" + spec_id + "'");

    const Variant* variant =
        variant_name.empty() ? &spec->variants.front() : spec->find_variant(variant_name);
    if (!variant) die_usage("no variant named '" + variant_name + "'");

    ParamPoint point;
    for (const auto& [name, domain] : spec->params)
        point.assignments[name] = domain.expand().front();

    Runner runner(RunnerOptions{});
    try {
        const OverheadEstimate est =
            runner.estimate_overhead(*spec, *variant, point, iter_param, n_low);
        std::cout << "fixed overhead:  " << format_ms(est.fixed_overhead) << " ms";
        if (est.noise_suspected) std::cout << "  (clamped from negative; noise suspected)";
        std::cout << "\nper iteration:   " << est.per_iteration * 1000.0 << " ms\n";
        std::cout << "probed at " << iter_param << "=" << est.n_low << " and " << est.n_high
                  << "\n";
        const double at_low =
            est.fixed_overhead /
            (est.fixed_overhead + est.per_iteration * static_cast<double>(est.n_low));
        if (at_low > 0.1)
            print_warning("fixed overhead is a large fraction of the runtime at " + iter_param +
                          "=" + std::to_string(est.n_low) + "; raise the iteration count");
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitChildFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"process benchmark harness with repeat-run statistics, sweeps and an analysis journal"};
    app.require_subcommand(1);
    std::string dir = ".";
    app.add_option("-C,--dir", dir, "project directory (default: current)");

    // init
    auto* init = app.add_subcommand("init", "scaffold a project spec file");

    // run
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "measure benchmarks and persist results");
    run->add_option("--only", run_args.only, "run only these benchmark ids");
    run->add_option("--skip", run_args.skip, "skip these benchmark ids");
    run->add_option("--mode", run_args.mode, "summary mode: mean|min")
        ->check(CLI::IsMember({"mean", "min"}));
    run->add_flag("--shell", run_args.shell, "run commands through /bin/sh -c");
    run->add_option("--timeout", run_args.timeout, "kill a child after this many seconds");

    // sweep
    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "measure across an input-size parameter");
    sweep->add_option("spec", sweep_args.spec_id, "benchmark id")->required();
    sweep->add_option("--param", sweep_args.param, "parameter to sweep")->required();
    sweep->add_option("--points", sweep_args.points_csv, "explicit comma-separated values");
    sweep->add_option("--linear", sweep_args.linear, "linear range start:stop:count");
    sweep->add_option("--log", sweep_args.log_range, "log range start:stop:count");
    sweep->add_flag("--calibrate", sweep_args.calibrate,
                    "calibrate the iteration count per point (needs --iter-param)");
    sweep->add_option("--iter-param", sweep_args.iter_param, "iteration-count parameter");
    sweep->add_option("--runs", sweep_args.runs, "fixed runs per point (overrides the policy)");
    sweep->add_option("--out", sweep_args.out_base, "output base path for .csv/.gnuplot");

    // compare
    std::string compare_spec, compare_mode;
    auto* compare_cmd = app.add_subcommand("compare", "re-render comparisons from stored results");
    compare_cmd->add_option("--spec", compare_spec, "limit to one benchmark id");
    compare_cmd->add_option("--mode", compare_mode, "summary mode: mean|min")
        ->check(CLI::IsMember({"mean", "min"}));

    // journal
    auto* journal_cmd = app.add_subcommand("journal", "append-only analysis ledger");
    journal_cmd->require_subcommand(1);
    std::string j_spec, j_text, j_verdict;
    std::vector<std::string> j_refs;
    std::int64_t j_expl_id = 0;

    auto* j_expect = journal_cmd->add_subcommand("expect", "pre-register an expectation");
    j_expect->add_option("spec", j_spec, "benchmark id")->required();
    j_expect->add_option("text", j_text, "expectation text")->required();

    auto* j_observe = journal_cmd->add_subcommand("observe", "record an observation");
    j_observe->add_option("text", j_text, "observation text")->required();
    j_observe->add_option("--ref", j_refs, "refs: spec:ID, session:ID, entry:N");

    auto* j_explain = journal_cmd->add_subcommand("explain", "propose an explanation");
    j_explain->add_option("text", j_text, "explanation text")->required();
    j_explain->add_option("--ref", j_refs, "refs: entry:N (observation), session:ID");

    auto* j_test = journal_cmd->add_subcommand("test", "attach a test to an explanation");
    j_test->add_option("explanation", j_expl_id, "explanation entry id")->required();
    j_test->add_option("verdict", j_verdict, "confirmed|refuted|inconclusive|untestable")
        ->required()
        ->check(CLI::IsMember({"confirmed", "refuted", "inconclusive", "untestable"}));
    j_test->add_option("text", j_text, "what was tested and how")->required();

    auto* j_improve = journal_cmd->add_subcommand("improve", "record an improvement");
    j_improve->add_option("text", j_text, "improvement text")->required();
    j_improve->add_option("--ref", j_refs, "refs");

    auto* j_status = journal_cmd->add_subcommand("status", "what still needs attention");

    // report
    std::string export_md, export_json_path;
    auto* report_cmd = app.add_subcommand("report", "render the full analysis report");
    report_cmd->add_option("--export-markdown", export_md, "write markdown report here");
    report_cmd->add_option("--export-json", export_json_path, "write machine-readable mirror here");

    // check-env
    auto* checkenv = app.add_subcommand("check-env", "inspect the machine state");

    // overhead
    std::string oh_spec, oh_iter_param, oh_variant;
    long long oh_n_low = 100;
    auto* overhead = app.add_subcommand("overhead", "split fixed setup cost from per-iteration cost");
    overhead->add_option("spec", oh_spec, "benchmark id")->required();
    overhead->add_option("--iter-param", oh_iter_param, "linearly scaling parameter")->required();
    overhead->add_option("--n-low", oh_n_low, "lower probe count (default 100)");
    overhead->add_option("--variant", oh_variant, "variant to probe (default: first)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*init) {
            try {
                write_sample_project(dir);
            } catch (const Error& e) {
                die_usage(e.what());
            }
            std::cout << "wrote " << project_spec_path(dir) << "\n";
            std::cout << "edit it, then: benchlab run\n";
            return kExitOk;
        }
        if (*run) return cmd_run(dir, run_args);
        if (*sweep) return cmd_sweep(dir, sweep_args);
        if (*compare_cmd) return cmd_compare(dir, compare_spec, compare_mode);

        if (*journal_cmd) {
            Project project = load_project_or_die(dir);
            Store store(dir);
            Journal journal = open_journal(project, store);
            try {
                if (*j_expect) {
                    if (!project.find_spec(j_spec))
                        die_usage("no benchmark named '" + j_spec + "'");
                    const JournalEntry& e = journal.record_expectation(j_spec, j_text);
                    std::cout << "recorded expectation #" << e.entry_id;
                    if (e.post_hoc.value_or(false))
                        std::cout << " (post-hoc: results for '" << j_spec << "' already exist)";
                    std::cout << "\n";
                } else if (*j_observe) {
                    const JournalEntry& e = journal.record_observation(j_text, j_refs);
                    std::cout << "recorded observation #" << e.entry_id << "\n";
                } else if (*j_explain) {
                    const JournalEntry& e = journal.record_explanation(j_text, j_refs);
                    std::cout << "recorded explanation #" << e.entry_id
                              << " (proposed — attach a test or it stays a conjecture)\n";
                } else if (*j_test) {
                    const JournalEntry& e =
                        journal.attach_test(j_expl_id, j_text, verdict_from_string(j_verdict));
                    std::cout << "recorded test #" << e.entry_id << "; explanation #" << j_expl_id
                              << " is now " << to_string(journal.derived_status(j_expl_id)) << "\n";
                    if (journal.derived_status(j_expl_id) == ExplanationStatus::Refuted)
                        print_note("record a revised explanation linking entry:" +
                                   std::to_string(j_expl_id));
                } else if (*j_improve) {
                    const JournalEntry& e = journal.record_improvement(j_text, j_refs);
                    std::cout << "recorded improvement #" << e.entry_id << "\n";
                } else if (*j_status) {
                    return cmd_journal_status(project, store, journal);
                }
            } catch (const DanglingRefError& e) {
                die_usage(e.what());
            } catch (const UnknownExplanationError& e) {
                die_usage(e.what());
            }
            return kExitOk;
        }

        if (*report_cmd) {
            const Project project = load_project_or_die(dir);
            Store store(dir);
            const Journal journal = open_journal(project, store);
            const std::string md = render_report(project, store, journal);
            if (!export_md.empty()) {
                std::ofstream out(export_md);
                if (!out) die_usage("cannot write " + export_md);
                out << md;
                std::cout << "wrote " << export_md << "\n";
            }
            if (!export_json_path.empty()) {
                std::ofstream out(export_json_path);
                if (!out) die_usage("cannot write " + export_json_path);
                out << export_json(project, store, journal) << "\n";
                std::cout << "wrote " << export_json_path << "\n";
            }
            if (export_md.empty() && export_json_path.empty()) std::cout << md;
            return kExitOk;
        }

        if (*checkenv) {
            const EnvironmentFingerprint fp = capture_fingerprint();
            std::cout << "fingerprint:     " << fp.fingerprint_id << "\n";
            std::cout << "cpu:             " << fp.cpu_model << "\n";
            std::cout << "governor:        " << fp.governor.value_or("unknown") << "\n";
            auto tri = [](const std::optional<bool>& v) {
                return !v ? "unknown" : (*v ? "yes" : "no");
            };
            std::cout << "frequency fixed: " << tri(fp.frequency_fixed) << "\n";
            std::cout << "turbo enabled:   " << tri(fp.turbo_enabled) << "\n";
            std::cout << "on AC power:     " << tri(fp.on_ac_power) << "\n";
            std::cout << "os:              " << fp.os_descriptor << "\n";
            for (const EnvWarning& w : check_environment(fp)) {
                if (w.kind == EnvWarningKind::Unknown)
                    print_note(w.message);
                else
                    print_warning(w.message);
            }
            return kExitOk;  // informational, never a failure
        }

        if (*overhead) return cmd_overhead(dir, oh_spec, oh_iter_param, oh_n_low, oh_variant);
    } catch (const LoadError& e) {
        die_usage(e.what());
    } catch (const MissingFileError& e) {
        die_usage(e.what());
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitChildFailure;
    }
    return kExitOk;
}
