#pragma once

#include <vector>

#include "armst/data.hpp"
#include "armst/km.hpp"

namespace armst {

struct RmstEstimate {
    double L = 0;
    double theta1 = 0;
    double theta0 = 0;
    double kappa = 0;
    double sigma2 = 0;  // variance of sqrt(n) * kappa_hat(L)
    bool estimable = false;
};

// Area under the KM step function on [0, L]. Throws BeyondFollowUp.
double rmst_arm(const SurvivalCurve& curve, double L);

// Greenwood-form sum  sum_{T_j <= L} d_j / (Y_j (Y_j - d_j)) * (theta(L) - theta(T_j))^2
// for one arm, evaluated term by term. Terms with Y_j = d_j are dropped when their
// weight multiplies zero and raise DegenerateRiskSet otherwise.
double arm_variance_sum(const SurvivalCurve& curve, double L);

// Throws NotEstimable when L exceeds max_estimable_time(ds).
RmstEstimate kappa_hat(const TrialDataset& ds, double L);
double variance_hat(const TrialDataset& ds, double L);

// Prefix-summed form of one arm's RMST and variance sum, O(log m) per query.
class ArmFunctional {
public:
    explicit ArmFunctional(const SurvivalCurve& curve);

    double theta(double L) const;
    double variance_sum(double L) const;
    double max_follow_up() const { return max_follow_up_; }
    const std::vector<double>& event_times() const { return times_; }

private:
    std::size_t step_index(double L) const;

    std::vector<double> times_;   // event times
    std::vector<double> knot_t_;  // 0, T_1, ..., T_m
    std::vector<double> surv_;    // 1, S(T_1), ...
    std::vector<double> theta_;   // theta at knots
    std::vector<double> w_sum_;   // sum of weights up to knot
    std::vector<double> c1_;      // sum_k w_k (theta_j - theta_k)
    std::vector<double> c2_;      // sum_k w_k (theta_j - theta_k)^2
    double max_follow_up_ = 0;
};

// Both arms' functionals plus the total sample size; evaluates kappa_hat and
// sigma2 at arbitrary L without refitting.
class KappaEvaluator {
public:
    KappaEvaluator(const SurvivalCurve& control, const SurvivalCurve& treatment);
    explicit KappaEvaluator(const TrialDataset& ds);

    RmstEstimate estimate(double L) const;
    double max_estimable() const { return max_estimable_; }
    double n() const { return n_; }
    // Distinct event times pooled over both arms, ascending.
    const std::vector<double>& pooled_event_times() const { return pooled_; }

private:
    ArmFunctional arms_[2];
    double n_;
    double max_estimable_;
    std::vector<double> pooled_;
};

}  // namespace armst
