#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace benchlab {

struct ResultSet;  // runner.hpp

enum class SummaryMode { Mean, Min };

SummaryMode summary_mode_from_string(const std::string& s);
std::string to_string(SummaryMode m);

// Per-series statistics over wall times, in seconds.
struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample stddev (n-1); 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    std::size_t n = 0;
    bool single_sample = false;

    double central(SummaryMode mode) const { return mode == SummaryMode::Mean ? mean : min; }
};

// Pairwise speedup with first-order error propagation.
struct RatioWithUncertainty {
    double ratio = 1.0;
    double sigma = 0.0;
    std::string numerator_id;
    std::string denominator_id;
    SummaryMode mode = SummaryMode::Mean;
};

struct TrendReport {
    double rho = 0.0;  // Spearman rank correlation of (run index, wall time)
    bool flagged = false;
};

enum class CvVerdict { Ok, Elevated, High };
enum class SystemVerdict { Ok, High };

std::string to_string(CvVerdict v);
std::string to_string(SystemVerdict v);

struct NoiseThresholds {
    double cv_elevated = 0.02;   // cv >= this -> elevated
    double cv_high = 0.04;       // cv >= this -> high
    double system_high = 0.10;   // system/wall > this -> high
};

struct NoiseReport {
    double cv = 0.0;
    CvVerdict cv_verdict = CvVerdict::Ok;
    bool outliers_applicable = false;  // false when n < 4
    std::vector<std::size_t> outlier_indices;
    TrendReport trend;
    double system_fraction = 0.0;
    SystemVerdict system_verdict = SystemVerdict::Ok;
};

struct SuspiciouslyIdentical {
    std::string variant_a;
    std::string variant_b;
    double mean_delta = 0.0;
    std::string message;
};

// mean, sample stddev, min/max, median (even n: mean of the two middle values).
// Throws EmptySeriesError.
Summary summarize(const std::vector<double>& samples);

// ratio = central_a / central_b; sigma = ratio * sqrt((sa/ma)^2 + (sb/mb)^2).
// The relative sigmas are stddev/mean in both modes; for Min this is a
// documented approximation (the spread of the minimum is not tracked
// separately). Throws DegenerateSummaryError when a central value is <= 0.
RatioWithUncertainty compare(const Summary& a, const Summary& b, SummaryMode mode = SummaryMode::Mean,
                             const std::string& a_id = "", const std::string& b_id = "");

// exp(mean(log r)). The arithmetic mean of ratios is deliberately not offered.
// Throws NonPositiveRatioError.
double geometric_mean(const std::vector<double>& ratios);

// Indices whose modified z-score 0.6745*|x - median|/MAD exceeds 3.5.
// MAD == 0: every index that differs from the median is flagged.
// Throws SeriesTooShortError when n < 4.
std::vector<std::size_t> detect_outliers(const std::vector<double>& samples);

// Spearman rho between run index and value, average ranks for ties; a series
// with no rank variation yields rho = 0. Flags monotone drift when n >= 8 and
// |rho| >= 0.8.
TrendReport detect_trend(const std::vector<double>& samples_in_run_order);

NoiseReport noise_report(const std::vector<double>& wall_times,
                         const std::vector<double>& system_times,
                         const NoiseThresholds& thresholds = {});
NoiseReport noise_report(const ResultSet& rs, const NoiseThresholds& thresholds = {});

// Flags series whose means differ by at most half the larger stddev while the
// [min,max] ranges overlap over at least 90% of the smaller range. A heuristic
// prompt to perturb one implementation and re-measure, never an error.
std::optional<SuspiciouslyIdentical> detect_indistinguishable(const std::string& name_a,
                                                              const std::vector<double>& samples_a,
                                                              const std::string& name_b,
                                                              const std::vector<double>& samples_b);
std::optional<SuspiciouslyIdentical> detect_indistinguishable(const ResultSet& a,
                                                              const ResultSet& b);

}  // namespace benchlab
