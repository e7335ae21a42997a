#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "armst/criterion.hpp"
#include "armst/data.hpp"

namespace armst {

enum class IntervalMethod { Hulc, HulcAnti, Bootstrap, Wald };
enum class AnalysisMethod { Ct, Dt, Hulc };

std::string_view to_string(IntervalMethod m);
std::string_view to_string(AnalysisMethod m);
std::optional<AnalysisMethod> parse_analysis_method(std::string_view text);

struct ConfidenceInterval {
    double lower = 0;
    double upper = 0;
    double level = 0.95;
    IntervalMethod method = IntervalMethod::Wald;

    bool contains(double x) const { return lower <= x && x <= upper; }
};

struct Diagnostics {
    std::size_t requested = 0;  // resamples or folds
    std::size_t used = 0;
    std::size_t skipped = 0;    // dropped because the resample had no estimable point
};

// Candidate restriction-time interval; maximization clamps L_max per sample.
struct SearchRange {
    double L_min = 0;
    double L_max = 0;
};

// Parameters after `auto` defaults have been filled in. Echoed in results.
struct ResolvedConfig {
    AnalysisMethod method = AnalysisMethod::Ct;
    SearchRange range;
    std::vector<double> grid;  // dt only
    double alpha = 0.05;
    PenaltyConfig penalty;
    TimeUnit unit = TimeUnit::Years;
    std::uint64_t seed = 0;
    std::size_t bootstrap = 0;       // ct only
    std::size_t folds = 0;           // hulc only
    bool anti_conservative = true;   // hulc only
    bool stratified_bootstrap = false;
};

struct AnalysisResult {
    AnalysisMethod method = AnalysisMethod::Ct;
    double L_hat = 0;
    double kappa_hat = 0;
    std::optional<double> sigma2;  // Wald methods
    ConfidenceInterval ci_kappa;
    std::optional<ConfidenceInterval> ci_L;
    std::optional<double> p_value;
    bool reject = false;
    std::uint64_t seed = 0;
    Diagnostics diagnostics;
    std::vector<double> fold_estimates;  // hulc only
    ResolvedConfig config;
};

// ceil (conservative) or floor (anti-conservative) of 1 - ln(alpha)/ln(2).
std::size_t hulc_fold_count(double alpha, bool anti_conservative);

// Linear interpolation between order statistics (type 7). `sorted` ascending.
double quantile_type7(std::span<const double> sorted, double p);

// Convex-hull interval from fold-wise unpenalized estimates.
AnalysisResult hulc_interval(const TrialDataset& ds, double alpha, bool anti_conservative, const SearchRange& range,
                             std::uint64_t seed, unsigned workers = 1);

struct BootstrapOptions {
    bool stratified = false;
    unsigned workers = 1;
    // Largest tolerated fraction of unusable resamples.
    double max_skipped_fraction = 0.05;
};

// Percentile bootstrap for the penalized estimand pair.
AnalysisResult bootstrap_interval(const TrialDataset& ds, double alpha, std::size_t resamples, const SearchRange& range,
                                  const PenaltyConfig& pen, std::uint64_t seed, const BootstrapOptions& opts = {});

// Wald interval at the selected grid point; the interval for L is the point itself.
AnalysisResult wald_interval_discrete(const TrialDataset& ds, const std::vector<double>& grid, double alpha,
                                      const PenaltyConfig& pen);

// User-facing configuration; unset fields take the defaults of each method.
struct AnalysisConfig {
    AnalysisMethod method = AnalysisMethod::Ct;
    std::optional<double> L_min;
    std::optional<double> L_max;
    std::optional<std::vector<double>> grid;
    std::size_t grid_points = 10;
    double alpha = 0.05;
    std::optional<double> c;
    std::optional<double> l_tilde;
    std::optional<TimeUnit> unit;  // defaults to the dataset's unit
    std::uint64_t seed = 1;
    std::size_t bootstrap = 1000;
    bool anti_conservative = true;
    bool stratified_bootstrap = false;
    unsigned workers = 1;
};

ResolvedConfig resolve_config(const TrialDataset& ds, const AnalysisConfig& cfg);
AnalysisResult analyze(const TrialDataset& ds, const AnalysisConfig& cfg);

nlohmann::json to_json(const ConfidenceInterval& ci);
nlohmann::json to_json(const ResolvedConfig& cfg);
nlohmann::json to_json(const AnalysisResult& result);

}  // namespace armst
