#include "armst/rmst.hpp"

#include <algorithm>
#include <string>

#include "armst/error.hpp"

namespace armst {

namespace {

void check_within(const SurvivalCurve& curve, double L) {
    if (L < 0.0) throw Error(ErrorCode::InvalidArgument, "negative restriction time");
    if (L > curve.max_follow_up)
        throw Error(ErrorCode::BeyondFollowUp,
                    "L=" + std::to_string(L) + " exceeds max follow-up " + std::to_string(curve.max_follow_up));
}

void check_estimable(const TrialDataset& ds, double L) {
    if (L < 0.0) throw Error(ErrorCode::InvalidArgument, "negative restriction time");
    double limit = max_estimable_time(ds);
    if (L > limit)
        throw Error(ErrorCode::NotEstimable,
                    "L=" + std::to_string(L) + " exceeds max estimable time " + std::to_string(limit));
}

// theta evaluated at each event time (area up to, not including, the drop).
std::vector<double> theta_at_events(const SurvivalCurve& curve) {
    std::vector<double> out(curve.size());
    double area = 0, prev = 0, s = 1;
    for (std::size_t j = 0; j < curve.size(); ++j) {
        area += s * (curve.event_times[j] - prev);
        out[j] = area;
        prev = curve.event_times[j];
        s = curve.survival[j];
    }
    return out;
}

}  // namespace

double rmst_arm(const SurvivalCurve& curve, double L) {
    check_within(curve, L);
    double area = 0, prev = 0, s = 1;
    for (std::size_t j = 0; j < curve.size() && curve.event_times[j] < L; ++j) {
        area += s * (curve.event_times[j] - prev);
        prev = curve.event_times[j];
        s = curve.survival[j];
    }
    return area + s * (L - prev);
}

double arm_variance_sum(const SurvivalCurve& curve, double L) {
    check_within(curve, L);
    const double theta_L = rmst_arm(curve, L);
    const auto theta_j = theta_at_events(curve);
    double total = 0;
    for (std::size_t j = 0; j < curve.size() && curve.event_times[j] <= L; ++j) {
        const double diff = theta_L - theta_j[j];
        const auto y = curve.at_risk[j];
        const auto d = curve.deaths[j];
        if (y == d) {
            if (diff != 0.0)
                throw Error(ErrorCode::DegenerateRiskSet,
                            "risk set exhausted at t=" + std::to_string(curve.event_times[j]) + " with nonzero remaining area");
            continue;
        }
        total += static_cast<double>(d) / (static_cast<double>(y) * static_cast<double>(y - d)) * diff * diff;
    }
    return total;
}

RmstEstimate kappa_hat(const TrialDataset& ds, double L) {
    check_estimable(ds, L);
    const auto c0 = fit_km(ds.arm(0));
    const auto c1 = fit_km(ds.arm(1));
    RmstEstimate est;
    est.L = L;
    est.theta0 = rmst_arm(c0, L);
    est.theta1 = rmst_arm(c1, L);
    est.kappa = est.theta1 - est.theta0;
    est.sigma2 = static_cast<double>(ds.n()) * (arm_variance_sum(c0, L) + arm_variance_sum(c1, L));
    est.estimable = true;
    return est;
}

double variance_hat(const TrialDataset& ds, double L) { return kappa_hat(ds, L).sigma2; }

ArmFunctional::ArmFunctional(const SurvivalCurve& curve)
    : times_(curve.event_times), max_follow_up_(curve.max_follow_up) {
    const std::size_t m = curve.size();
    knot_t_.assign(m + 1, 0.0);
    surv_.assign(m + 1, 1.0);
    theta_.assign(m + 1, 0.0);
    w_sum_.assign(m + 1, 0.0);
    c1_.assign(m + 1, 0.0);
    c2_.assign(m + 1, 0.0);
    for (std::size_t k = 1; k <= m; ++k) {
        knot_t_[k] = curve.event_times[k - 1];
        surv_[k] = curve.survival[k - 1];
        const double step = surv_[k - 1] * (knot_t_[k] - knot_t_[k - 1]);
        theta_[k] = theta_[k - 1] + step;
        // Shift the running sums from knot k-1 to knot k; every term stays non-negative.
        c2_[k] = c2_[k - 1] + 2.0 * step * c1_[k - 1] + step * step * w_sum_[k - 1];
        c1_[k] = c1_[k - 1] + step * w_sum_[k - 1];
        const auto y = curve.at_risk[k - 1];
        const auto d = curve.deaths[k - 1];
        // y == d only at a final drop to zero, after which theta is flat: the term is 0.
        const double w = (y == d) ? 0.0 : static_cast<double>(d) / (static_cast<double>(y) * static_cast<double>(y - d));
        w_sum_[k] = w_sum_[k - 1] + w;
    }
}

std::size_t ArmFunctional::step_index(double L) const {
    return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), L) - times_.begin());
}

double ArmFunctional::theta(double L) const {
    const std::size_t j = step_index(L);
    return theta_[j] + surv_[j] * (L - knot_t_[j]);
}

double ArmFunctional::variance_sum(double L) const {
    const std::size_t j = step_index(L);
    const double delta = surv_[j] * (L - knot_t_[j]);
    return delta * delta * w_sum_[j] + 2.0 * delta * c1_[j] + c2_[j];
}

KappaEvaluator::KappaEvaluator(const SurvivalCurve& control, const SurvivalCurve& treatment)
    : arms_{ArmFunctional(control), ArmFunctional(treatment)},
      n_(static_cast<double>(control.n_arm + treatment.n_arm)),
      max_estimable_(std::min(control.max_follow_up, treatment.max_follow_up)) {
    pooled_.reserve(control.size() + treatment.size());
    std::merge(control.event_times.begin(), control.event_times.end(), treatment.event_times.begin(),
               treatment.event_times.end(), std::back_inserter(pooled_));
    pooled_.erase(std::unique(pooled_.begin(), pooled_.end()), pooled_.end());
}

KappaEvaluator::KappaEvaluator(const TrialDataset& ds) : KappaEvaluator(fit_km(ds.arm(0)), fit_km(ds.arm(1))) {}

RmstEstimate KappaEvaluator::estimate(double L) const {
    RmstEstimate est;
    est.L = L;
    if (L < 0.0 || L > max_estimable_) return est;
    est.theta0 = arms_[0].theta(L);
    est.theta1 = arms_[1].theta(L);
    est.kappa = est.theta1 - est.theta0;
    est.sigma2 = n_ * (arms_[0].variance_sum(L) + arms_[1].variance_sum(L));
    est.estimable = true;
    return est;
}

}  // namespace armst
