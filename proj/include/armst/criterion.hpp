#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "armst/data.hpp"
#include "armst/rmst.hpp"

namespace armst {

// Quadratic penalty -c (L - l_tilde)^2 added to the signal-to-noise criterion.
struct PenaltyConfig {
    double c = 0;
    double l_tilde = 0;

    double operator()(double L) const { return c == 0.0 ? 0.0 : c * (L - l_tilde) * (L - l_tilde); }
};

struct CriterionProfile {
    std::vector<double> ls;
    std::vector<double> m_values;      // -inf where not estimable
    std::vector<double> m_pen_values;
    std::size_t argmax_index = 0;
};

void write_profile_csv(std::ostream& out, const CriterionProfile& profile);

// kappa^2 / sigma2 - penalty; -inf beyond the estimable range or where sigma2 == 0.
double criterion_value(const TrialDataset& ds, double L, const PenaltyConfig& pen);
double criterion_value(const KappaEvaluator& eval, double L, const PenaltyConfig& pen);
// Unpenalized criterion from an estimate.
double criterion_of(const RmstEstimate& est);

struct ContinuousFit {
    double L_hat = 0;
    double value = 0;  // penalized criterion at L_hat
    RmstEstimate estimate;
    CriterionProfile profile;  // empty unless requested
};

// Maximizes the penalized criterion over [L_min, min(L_max, max estimable)]:
// dense evaluation on event times plus a uniform grid, then ternary refinement
// inside the bracket around the best sample. Smallest L wins ties.
// Throws NoEstimablePoint when no point in the range is finite.
ContinuousFit maximize_continuous(const KappaEvaluator& eval, double L_min, double L_max, const PenaltyConfig& pen,
                                  bool keep_profile = false);
ContinuousFit maximize_continuous(const TrialDataset& ds, double L_min, double L_max, const PenaltyConfig& pen,
                                  bool keep_profile = false);

struct DiscreteFit {
    double L_hat = 0;
    std::size_t index = 0;
    double kappa_hat = 0;
    double sigma2 = 0;
    double value = 0;
    CriterionProfile profile;
};

// `grid` must be nonempty and strictly increasing; when c > 0, l_tilde must be a grid point.
DiscreteFit maximize_discrete(const KappaEvaluator& eval, const std::vector<double>& grid, const PenaltyConfig& pen);
DiscreteFit maximize_discrete(const TrialDataset& ds, const std::vector<double>& grid, const PenaltyConfig& pen);

// m equally spaced points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, std::size_t m);
// Index of the default initial guess floor((m+1)/2), zero-based.
std::size_t default_grid_center(std::size_t m);

enum class PenaltyKind { Continuous, Discrete };

// 0.002 (continuous) or 0.005 (discrete) * 16 / (L_max - L_min)^2 * (unit / year)^2.
double default_penalty(double L_min, double L_max, TimeUnit unit, PenaltyKind kind = PenaltyKind::Continuous);

// (ceil(n^{1/4}), floor(2 n^{1/4})); throws TooFewSubjects for n < 16.
std::pair<std::size_t, std::size_t> suggest_grid_size(std::size_t n);

// 5th percentile of pooled follow-up times and max_estimable_time.
std::pair<double, double> default_range(const TrialDataset& ds);

}  // namespace armst
