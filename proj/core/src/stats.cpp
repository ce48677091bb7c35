#include "benchlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "benchlab/errors.hpp"
#include "benchlab/runner.hpp"

namespace benchlab {

SummaryMode summary_mode_from_string(const std::string& s) {
    if (s == "mean") return SummaryMode::Mean;
    if (s == "min") return SummaryMode::Min;
    throw Error("unknown summary mode '" + s + "' (expected mean|min)");
}

std::string to_string(SummaryMode m) { return m == SummaryMode::Mean ? "mean" : "min"; }

std::string to_string(CvVerdict v) {
    switch (v) {
        case CvVerdict::Ok: return "ok";
        case CvVerdict::Elevated: return "elevated";
        case CvVerdict::High: return "high";
    }
    return "?";
}

std::string to_string(SystemVerdict v) { return v == SystemVerdict::Ok ? "ok" : "high"; }

namespace {

double median_of_sorted(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

// Average ranks, 1-based; ties share the mean of the ranks they span.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;  // no rank variation on one axis
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

Summary summarize(const std::vector<double>& samples) {
    if (samples.empty()) throw EmptySeriesError();

    Summary s;
    s.n = samples.size();
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
             static_cast<double>(samples.size());

    if (samples.size() == 1) {
        s.single_sample = true;
        s.stddev = 0.0;
    } else {
        double ss = 0.0;
        for (double x : samples) {
            const double d = x - s.mean;
            ss += d * d;
        }
        s.stddev = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    }

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = median_of_sorted(sorted);
    return s;
}

RatioWithUncertainty compare(const Summary& a, const Summary& b, SummaryMode mode,
                             const std::string& a_id, const std::string& b_id) {
    const double ca = a.central(mode);
    const double cb = b.central(mode);
    if (ca <= 0.0 || cb <= 0.0) throw DegenerateSummaryError();

    RatioWithUncertainty r;
    r.ratio = ca / cb;
    const double ra = a.mean > 0.0 ? a.stddev / a.mean : 0.0;
    const double rb = b.mean > 0.0 ? b.stddev / b.mean : 0.0;
    r.sigma = r.ratio * std::sqrt(ra * ra + rb * rb);
    r.numerator_id = a_id;
    r.denominator_id = b_id;
    r.mode = mode;
    return r;
}

double geometric_mean(const std::vector<double>& ratios) {
    if (ratios.empty()) throw NonPositiveRatioError();
    double log_sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw NonPositiveRatioError();
        log_sum += std::log(r);
    }
    return std::exp(log_sum / static_cast<double>(ratios.size()));
}

std::vector<std::size_t> detect_outliers(const std::vector<double>& samples) {
    if (samples.size() < 4) throw SeriesTooShortError(samples.size());

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double med = median_of_sorted(sorted);

    std::vector<double> deviations(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) deviations[i] = std::fabs(samples[i] - med);
    std::vector<double> dev_sorted = deviations;
    std::sort(dev_sorted.begin(), dev_sorted.end());
    const double mad = median_of_sorted(dev_sorted);

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (mad == 0.0) {
            if (samples[i] != med) out.push_back(i);
        } else if (0.6745 * deviations[i] / mad > 3.5) {
            out.push_back(i);
        }
    }
    return out;
}

TrendReport detect_trend(const std::vector<double>& samples) {
    TrendReport t;
    const std::size_t n = samples.size();
    if (n < 2) return t;

    std::vector<double> index(n);
    std::iota(index.begin(), index.end(), 0.0);
    t.rho = pearson(index, average_ranks(samples));
    t.flagged = n >= 8 && std::fabs(t.rho) >= 0.8;
    return t;
}

NoiseReport noise_report(const std::vector<double>& wall_times,
                         const std::vector<double>& system_times,
                         const NoiseThresholds& th) {
    NoiseReport nr;
    const Summary s = summarize(wall_times);
    nr.cv = s.mean > 0.0 ? s.stddev / s.mean : 0.0;
    nr.cv_verdict = nr.cv >= th.cv_high      ? CvVerdict::High
                    : nr.cv >= th.cv_elevated ? CvVerdict::Elevated
                                              : CvVerdict::Ok;

    if (wall_times.size() >= 4) {
        nr.outliers_applicable = true;
        nr.outlier_indices = detect_outliers(wall_times);
    }
    nr.trend = detect_trend(wall_times);

    if (!system_times.empty() && s.mean > 0.0) {
        const double sys_mean = std::accumulate(system_times.begin(), system_times.end(), 0.0) /
                                static_cast<double>(system_times.size());
        nr.system_fraction = sys_mean / s.mean;
    }
    nr.system_verdict =
        nr.system_fraction > th.system_high ? SystemVerdict::High : SystemVerdict::Ok;
    return nr;
}

NoiseReport noise_report(const ResultSet& rs, const NoiseThresholds& th) {
    return noise_report(rs.wall_times(), rs.system_times(), th);
}

std::optional<SuspiciouslyIdentical> detect_indistinguishable(const std::string& name_a,
                                                              const std::vector<double>& samples_a,
                                                              const std::string& name_b,
                                                              const std::vector<double>& samples_b) {
    if (name_a == name_b) return std::nullopt;
    const Summary a = summarize(samples_a);
    const Summary b = summarize(samples_b);

    const double delta = std::fabs(a.mean - b.mean);
    if (delta > 0.5 * std::max(a.stddev, b.stddev)) return std::nullopt;

    const double overlap = std::min(a.max, b.max) - std::max(a.min, b.min);
    const double smaller_range = std::min(a.max - a.min, b.max - b.min);
    if (overlap < 0.9 * smaller_range) return std::nullopt;

    SuspiciouslyIdentical flag;
    flag.variant_a = name_a;
    flag.variant_b = name_b;
    flag.mean_delta = delta;
    flag.message = "'" + name_a + "' and '" + name_b +
                   "' measure suspiciously alike; verify they really differ by modifying one "
                   "implementation and re-measuring (results of both should never move together)";
    return flag;
}

std::optional<SuspiciouslyIdentical> detect_indistinguishable(const ResultSet& a,
                                                              const ResultSet& b) {
    return detect_indistinguishable(a.variant_name, a.wall_times(), b.variant_name,
                                    b.wall_times());
}

}  // namespace benchlab
