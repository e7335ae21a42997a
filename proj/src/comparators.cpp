#include "armst/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "armst/error.hpp"

namespace armst {

namespace {

// Per distinct pooled event time: observed-minus-expected for the treatment
// arm, hypergeometric variance, and the pooled KM left limit.
struct LogrankTable {
    std::vector<double> o_minus_e;
    std::vector<double> var;
    std::vector<double> surv_minus;
};

LogrankTable tabulate(const TrialDataset& ds) {
    struct Row {
        double time;
        int arm;
        int event;
    };
    std::vector<Row> rows;
    rows.reserve(ds.n());
    for (const auto& r : ds.records()) rows.push_back({r.time, r.arm, r.event});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });

    LogrankTable t;
    double y0 = static_cast<double>(ds.n0());
    double y1 = static_cast<double>(ds.n1());
    double surv = 1.0;
    std::size_t i = 0;
    while (i < rows.size()) {
        const double time = rows[i].time;
        double d0 = 0, d1 = 0, leave0 = 0, leave1 = 0;
        for (; i < rows.size() && rows[i].time == time; ++i) {
            (rows[i].arm ? leave1 : leave0) += 1;
            if (rows[i].event) (rows[i].arm ? d1 : d0) += 1;
        }
        const double d = d0 + d1;
        if (d > 0) {
            const double y = y0 + y1;
            const double p1 = y1 / y;
            t.o_minus_e.push_back(d1 - d * p1);
            t.var.push_back(y > 1 ? d * p1 * (1 - p1) * (y - d) / (y - 1) : 0.0);
            t.surv_minus.push_back(surv);
            surv *= 1.0 - d / y;
        }
        y0 -= leave0;
        y1 -= leave1;
    }
    if (t.o_minus_e.empty()) throw Error(ErrorCode::NoEvents, "no events in either arm");
    return t;
}

std::vector<double> fh_weights(const LogrankTable& t, double rho, double gamma) {
    std::vector<double> w(t.surv_minus.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double s = t.surv_minus[k];
        w[k] = (rho == 0 ? 1.0 : std::pow(s, rho)) * (gamma == 0 ? 1.0 : std::pow(1.0 - s, gamma));
    }
    return w;
}

double two_sided_p(double z) {
    const boost::math::normal std_normal;
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(z))));
}

}  // namespace

TestOutcome weighted_logrank(const TrialDataset& ds, double rho, double gamma) {
    if (rho < 0 || gamma < 0) throw Error(ErrorCode::InvalidArgument, "rho and gamma must be non-negative");
    const auto table = tabulate(ds);
    const auto w = fh_weights(table, rho, gamma);
    double u = 0, v = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        u += w[k] * table.o_minus_e[k];
        v += w[k] * w[k] * table.var[k];
    }
    TestOutcome out;
    char name[64];
    std::snprintf(name, sizeof name, "FH(%g,%g)", rho, gamma);
    out.name = name;
    out.statistic = v > 0 ? u / std::sqrt(v) : 0.0;
    out.p_value = two_sided_p(out.statistic);
    return out;
}

TestOutcome maxcombo(const TrialDataset& ds) {
    static constexpr double kRho[] = {0, 0, 1, 1};
    static constexpr double kGamma[] = {0, 1, 0, 1};
    constexpr std::size_t k = 4;

    const auto table = tabulate(ds);
    std::vector<std::vector<double>> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = fh_weights(table, kRho[i], kGamma[i]);

    Matrix cov(k, std::vector<double>(k, 0.0));
    std::vector<double> u(k, 0.0);
    for (std::size_t e = 0; e < table.var.size(); ++e) {
        for (std::size_t i = 0; i < k; ++i) {
            u[i] += w[i][e] * table.o_minus_e[e];
            for (std::size_t j = 0; j <= i; ++j) cov[i][j] += w[i][e] * w[j][e] * table.var[e];
        }
    }
    TestOutcome out;
    out.name = "maxcombo";
    out.component_z.assign(k, 0.0);
    out.correlation.assign(k, std::vector<double>(k, 0.0));
    bool degenerate = false;
    for (std::size_t i = 0; i < k; ++i) {
        if (cov[i][i] > 0)
            out.component_z[i] = u[i] / std::sqrt(cov[i][i]);
        else
            degenerate = true;
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double r = (cov[i][i] > 0 && cov[j][j] > 0) ? cov[i][j] / std::sqrt(cov[i][i] * cov[j][j])
                                                               : (i == j ? 1.0 : 0.0);
            out.correlation[i][j] = out.correlation[j][i] = (i == j) ? 1.0 : r;
        }
    }
    double z_max = 0;
    for (double z : out.component_z) z_max = std::max(z_max, std::abs(z));
    out.statistic = z_max;

    std::optional<MvnProbability> inside;
    if (!degenerate) {
        const std::vector<double> lo(k, -z_max), hi(k, z_max);
        inside = mvn_rectangle(out.correlation, lo, hi);
    }
    if (inside) {
        out.p_value = std::clamp(1.0 - inside->value, 0.0, 1.0);
        out.p_error = inside->error;
    } else {
        double p_min = 1.0;
        for (double z : out.component_z) p_min = std::min(p_min, two_sided_p(z));
        out.p_value = std::min(1.0, 4.0 * p_min);
        out.bonferroni_fallback = true;
    }
    return out;
}

RmstTestOutcome fixed_rmst_test(const TrialDataset& ds, std::optional<double> L, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const double at = L.value_or(max_estimable_time(ds));
    RmstTestOutcome out;
    out.estimate = kappa_hat(ds, at);
    const double se = std::sqrt(out.estimate.sigma2 / static_cast<double>(ds.n()));
    out.test.name = L ? "rmst" : "rmst_auto";
    if (se > 0) {
        out.test.statistic = out.estimate.kappa / se;
        out.test.p_value = two_sided_p(out.test.statistic);
    } else {
        out.test.statistic = 0;
        out.test.p_value = out.estimate.kappa == 0.0 ? 1.0 : 0.0;
    }
    const boost::math::normal std_normal;
    const double z = boost::math::quantile(std_normal, 1.0 - alpha / 2.0);
    out.ci = {out.estimate.kappa - z * se, out.estimate.kappa + z * se, 1.0 - alpha, IntervalMethod::Wald};
    return out;
}

RmstTestOutcome oracle_rmst_test(const TrialDataset& ds, double true_L, double alpha) {
    auto out = fixed_rmst_test(ds, true_L, alpha);
    out.test.name = "oracle";
    return out;
}

nlohmann::json to_json(const TestOutcome& t) {
    nlohmann::json j{{"name", t.name}, {"statistic", t.statistic}, {"p_value", t.p_value}};
    if (!t.component_z.empty()) {
        j["component_z"] = t.component_z;
        j["correlation"] = t.correlation;
        j["bonferroni_fallback"] = t.bonferroni_fallback;
        j["p_error"] = t.p_error;
    }
    return j;
}

nlohmann::json to_json(const RmstTestOutcome& t) {
    auto j = to_json(t.test);
    j["L"] = t.estimate.L;
    j["theta1"] = t.estimate.theta1;
    j["theta0"] = t.estimate.theta0;
    j["kappa"] = t.estimate.kappa;
    j["sigma2"] = t.estimate.sigma2;
    j["ci_kappa"] = to_json(t.ci);
    return j;
}

}  // namespace armst
