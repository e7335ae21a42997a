#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "armst/criterion.hpp"
#include "armst/rng.hpp"

namespace armst {

// Hazard rates[i] on [change_points[i], change_points[i+1]); the last piece is unbounded.
class PiecewiseExponential {
public:
    PiecewiseExponential(std::vector<double> change_points, std::vector<double> rates);

    double survival(double t) const;
    double hazard(double t) const;
    double cumulative_hazard(double t) const;
    // Exact integral of the survival function on [0, L].
    double rmst(double L) const;
    // Inverts the cumulative hazard at a unit exponential draw.
    double sample(Rng& rng) const;

    const std::vector<double>& change_points() const { return change_points_; }
    const std::vector<double>& rates() const { return rates_; }

private:
    std::vector<double> change_points_;
    std::vector<double> rates_;
};

struct ScenarioSpec {
    std::string name;
    PiecewiseExponential treatment;
    PiecewiseExponential control;
    double censor_rate = 0.5;
    double admin_time = 5.0;
    double beta = 0.5;  // treatment allocation fraction
};

// The nine simulation scenarios, in canonical order.
const std::vector<ScenarioSpec>& scenarios();
// Throws UnknownScenario.
const ScenarioSpec& find_scenario(std::string_view name);
std::size_t scenario_index(std::string_view name);

double pwexp_survival(const PiecewiseExponential& d, double t);
double pwexp_hazard(const PiecewiseExponential& d, double t);
double pwexp_sample(const PiecewiseExponential& d, Rng& rng);

double true_rmst(const PiecewiseExponential& d, double L);
double true_kappa(const ScenarioSpec& s, double L);

// Asymptotic variance of sqrt(n) * kappa_hat(L): the per-arm integrals
// int_0^L (theta_L - theta_v)^2 hazard(v) / (S(v) G(v)) dv scaled by 1/beta and
// 1/(1 - beta). Requires 0 <= L < admin_time. Throws QuadratureFailure.
double true_variance(const ScenarioSpec& s, double L);

// kappa^2 / V - penalty; -inf at L = 0.
double true_criterion(const ScenarioSpec& s, double L, const PenaltyConfig& pen);

struct TrueOptimum {
    double L = 0;
    double kappa = 0;
    double value = 0;
};

// 2048-point grid plus ternary refinement. Throws NonUniqueMaximizer when the
// near-maximal grid points do not form a single narrow peak.
TrueOptimum true_optimum(const ScenarioSpec& s, double L_min, double L_max, const PenaltyConfig& pen);
// Argmax over grid points; throws NonUniqueMaximizer on ties.
TrueOptimum true_optimum_discrete(const ScenarioSpec& s, const std::vector<double>& grid, const PenaltyConfig& pen);

// CSV `t,S0,S1,h0,h1,kappa,M,M_pen` on a uniform grid over [t_lo, t_hi].
void write_truth_curves(std::ostream& out, const ScenarioSpec& s, std::size_t points, const PenaltyConfig& pen,
                        double t_lo = 0.01, double t_hi = 4.2);

}  // namespace armst
