#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "armst/data.hpp"
#include "armst/inference.hpp"
#include "armst/mvn.hpp"
#include "armst/rmst.hpp"

namespace armst {

struct TestOutcome {
    std::string name;
    double statistic = 0;
    double p_value = 1;
    // MaxCombo only: component z-scores in FH order (0,0), (0,1), (1,0), (1,1).
    std::vector<double> component_z;
    Matrix correlation;
    bool bonferroni_fallback = false;
    double p_error = 0;  // quadrature error estimate of p (MaxCombo)
};

// Fleming-Harrington G(rho, gamma) log-rank test with weights S(t-)^rho (1 - S(t-))^gamma
// from the pooled KM. The statistic is sum w (O - E) for the treatment arm over
// sqrt(sum w^2 V); negative values favour treatment. Throws NoEvents.
TestOutcome weighted_logrank(const TrialDataset& ds, double rho, double gamma);

// Max |z| over FH(0,0), FH(0,1), FH(1,0), FH(1,1) with a joint-normal p-value.
TestOutcome maxcombo(const TrialDataset& ds);

struct RmstTestOutcome {
    TestOutcome test;
    RmstEstimate estimate;
    ConfidenceInterval ci;
};

// Wald test of kappa(L) = 0. With no L, uses max_estimable_time(ds).
RmstTestOutcome fixed_rmst_test(const TrialDataset& ds, std::optional<double> L = std::nullopt, double alpha = 0.05);
RmstTestOutcome oracle_rmst_test(const TrialDataset& ds, double true_L, double alpha = 0.05);

nlohmann::json to_json(const TestOutcome& t);
nlohmann::json to_json(const RmstTestOutcome& t);

}  // namespace armst
