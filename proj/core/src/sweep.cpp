#include "benchlab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "benchlab/errors.hpp"

namespace benchlab {

double calibration_target() { return std::sqrt(kCalibrationWindowLow * kCalibrationWindowHigh); }

std::vector<Diagnostic> validate_sweep(const SweepSpec& sweep, const BenchmarkSpec& spec) {
    std::vector<Diagnostic> out;
    if (!spec.params.count(sweep.swept_param))
        out.push_back({Diagnostic::Code::UnboundPlaceholder, spec.id,
                       "swept parameter '" + sweep.swept_param + "' is not declared by '" +
                           spec.id + "'"});

    std::vector<double> values;
    try {
        values = sweep.points.expand_numeric();
    } catch (const Error& e) {
        out.push_back({Diagnostic::Code::EmptyParamDomain, spec.id, e.what()});
        return out;
    }
    if (values.size() < 2)
        out.push_back({Diagnostic::Code::EmptyParamDomain, spec.id,
                       "a sweep needs at least 2 points, got " + std::to_string(values.size())});
    if (!std::is_sorted(values.begin(), values.end()) ||
        std::adjacent_find(values.begin(), values.end()) != values.end())
        out.push_back({Diagnostic::Code::EmptyParamDomain, spec.id,
                       "sweep points must be strictly increasing"});
    if (sweep.points.kind == ValueDomain::Kind::Log &&
        (sweep.points.start <= 0.0 || sweep.points.stop <= 0.0))
        out.push_back({Diagnostic::Code::EmptyParamDomain, spec.id,
                       "log sweeps need positive start and stop"});
    return out;
}

SweepResult run_sweep(const Runner& runner, const BenchmarkSpec& spec, const SweepSpec& sweep,
                      const std::vector<Variant>& variants, const ParamPoint& base_point,
                      const std::string& calibrate_iter_param) {
    SweepResult sr;
    sr.spec_id = spec.id;
    sr.swept_param = sweep.swept_param;
    sr.log_scale = sweep.points.kind == ValueDomain::Kind::Log;

    const std::vector<double> values = sweep.points.expand_numeric();

    for (double value : values) {
        ParamPoint point = base_point;
        point.assignments[sweep.swept_param] = format_param_value(value);

        SweepPointResult pr;
        pr.param_value = value;
        try {
            if (!calibrate_iter_param.empty()) {
                const CalibrationResult cal = calibrate_iterations(
                    runner, spec, variants.front(), point, calibrate_iter_param);
                point.assignments[calibrate_iter_param] =
                    format_param_value(static_cast<double>(cal.count));
            }
            // Variants interleave within the point so drift hits them equally.
            std::vector<ResultSet> results =
                runner.run_interleaved(spec, variants, point, sweep.per_point_policy);
            for (ResultSet& rs : results) {
                pr.variant_names.push_back(rs.variant_name);
                pr.summaries.push_back(summarize(rs.wall_times()));
                pr.noise.push_back(noise_report(rs));
                pr.raw.push_back(std::move(rs));
            }
        } catch (const Error& e) {
            sr.complete = false;
            sr.error = "at " + sweep.swept_param + "=" + format_param_value(value) + ": " +
                       e.what();
            return sr;
        }
        sr.points.push_back(std::move(pr));
    }
    return sr;
}

namespace {

double measure_once_at(const Runner& runner, const BenchmarkSpec& spec, const Variant& variant,
                       ParamPoint point, const std::string& iter_param, long long count) {
    point.assignments[iter_param] = format_param_value(static_cast<double>(count));
    const ConcreteInvocation inv = resolve_invocation(spec, variant, point);
    std::string tail;
    const Measurement m = runner.run_once(inv, &tail);
    if (m.exit_status != 0)
        throw NonZeroExitError(inv.argv.empty() ? "" : inv.argv[0], m.exit_status, tail);
    return m.wall_time;
}

}  // namespace

CalibrationResult calibrate_iterations(const Runner& runner, const BenchmarkSpec& spec,
                                       const Variant& variant, const ParamPoint& point,
                                       const std::string& iter_param) {
    if (!spec.params.count(iter_param) && !point.assignments.count(iter_param))
        throw CalibrationFailedError("'" + iter_param + "' is not a parameter of '" + spec.id +
                                     "'");

    const double target = calibration_target();

    // Initial probe: grow the count until the run is long enough to trust the
    // per-iteration estimate (>= 20 ms).
    long long probe_n = 1;
    double t = measure_once_at(runner, spec, variant, point, iter_param, probe_n);
    if (t > kCalibrationWindowHigh) return {1, t, true};
    while (t < 0.02 && probe_n < (1LL << 40)) {
        probe_n *= 4;
        t = measure_once_at(runner, spec, variant, point, iter_param, probe_n);
    }

    for (int attempt = 0; attempt < 3; ++attempt) {
        const double per_iter = t / static_cast<double>(probe_n);
        long long n = std::llround(target / per_iter);
        if (n < 1) n = 1;

        const double measured = measure_once_at(runner, spec, variant, point, iter_param, n);
        if (n == 1 && measured > kCalibrationWindowHigh) return {1, measured, true};
        if (measured >= kCalibrationWindowLow && measured <= kCalibrationWindowHigh)
            return {n, measured, false};

        probe_n = n;
        t = measured;
    }
    throw CalibrationFailedError("could not land '" + spec.id + "'/'" + variant.name +
                                 "' inside the [0.2 s, 1.0 s] window after re-probing");
}

std::vector<std::string> emit_plot_data(const SweepResult& sr, const std::string& base_path) {
    const std::string csv_path = base_path + ".csv";
    const std::string plot_path = base_path + ".gnuplot";

    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot write " + csv_path);

    const std::vector<std::string>& names =
        sr.points.empty() ? std::vector<std::string>{} : sr.points.front().variant_names;

    csv << "# " << sr.swept_param;
    for (const std::string& name : names)
        csv << "," << name << "_mean," << name << "_stddev," << name << "_min," << name << "_max";
    csv << "\n";

    char buf[128];
    for (const SweepPointResult& pr : sr.points) {
        csv << format_param_value(pr.param_value);
        for (const Summary& s : pr.summaries) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g,%.17g", s.mean, s.stddev, s.min,
                          s.max);
            csv << buf;
        }
        csv << "\n";
    }
    csv.close();

    std::ofstream plot(plot_path);
    if (!plot) throw Error("cannot write " + plot_path);

    const std::string csv_name =
        csv_path.find('/') == std::string::npos ? csv_path
                                                : csv_path.substr(csv_path.rfind('/') + 1);
    plot << "set datafile separator ','\n";
    plot << "set xlabel '" << sr.swept_param << "'\n";
    plot << "set ylabel 'wall time [s]'\n";
    plot << "set key left top\n";
    if (sr.log_scale) plot << "set logscale x\n";
    plot << "plot ";
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::size_t mean_col = 2 + i * 4;
        if (i > 0) plot << ", \\\n     ";
        plot << "'" << csv_name << "' using 1:" << mean_col << ":" << (mean_col + 1)
             << " with yerrorlines title '" << names[i] << "'";
    }
    plot << "\n";
    plot.close();

    return {csv_path, plot_path};
}

}  // namespace benchlab
