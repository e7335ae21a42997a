#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "armst/data.hpp"
#include "armst/rng.hpp"
#include "armst/truth.hpp"

namespace armst {

// n / 2 treatment subjects (arm 1), the rest control. Event times come from
// each arm's distribution, censoring is min(Exp(censor_rate), admin_time).
TrialDataset generate_trial(const ScenarioSpec& s, std::size_t n, Rng& rng);
TrialDataset generate_trial(const ScenarioSpec& s, std::size_t n, std::uint64_t seed);

enum class SimMethod { Ct, Dt, Hulc, Rmst, Logrank, Maxcombo, Oracle };

std::string_view to_string(SimMethod m);
std::optional<SimMethod> parse_sim_method(std::string_view text);
const std::vector<SimMethod>& all_sim_methods();

struct StudyConfig {
    std::vector<std::string> scenarios{"null"};
    std::vector<std::size_t> ns{600};
    std::size_t reps = 500;
    std::vector<SimMethod> methods{SimMethod::Ct};
    double alpha = 0.05;
    std::size_t bootstrap = 200;
    std::size_t grid_points = 10;
    double L_min = 0.2;
    double L_max = 4.2;
    // Unset penalties default to the usual unit-aware values on [L_min, L_max].
    std::optional<double> c_ct;
    std::optional<double> c_dt;
    // Continuous target; defaults to the midpoint. The grid always uses its center point.
    std::optional<double> l_tilde;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    bool timing = false;
    double max_failure_fraction = 0.02;
};

// Full-scale settings: 2000 replicates, 1000 bootstrap resamples.
void apply_paper_scale(StudyConfig& cfg);

// Target estimands for one scenario. Unset optima mean the maximizer is not unique.
struct ScenarioTruth {
    std::string scenario;
    std::optional<double> L_star;
    double kappa_star = 0;
    double L_ct = 0;
    double kappa_ct = 0;
    double L_dt = 0;
    double kappa_dt = 0;
    double c_ct = 0;
    double c_dt = 0;
    double l_tilde_ct = 0;
    double l_tilde_dt = 0;
    // Restriction time used by the oracle RMST test: L* or, when that is
    // undefined, the continuous penalty target.
    double oracle_L = 0;
};

ScenarioTruth compute_truth(const ScenarioSpec& s, const StudyConfig& cfg);

struct ReplicateRecord {
    std::string scenario;
    std::size_t n = 0;
    SimMethod method = SimMethod::Ct;
    std::size_t rep = 0;
    bool ok = true;
    std::string error;  // error code name when !ok
    bool reject = false;
    std::optional<bool> covered;
    std::optional<double> L_hat;
    std::optional<double> L_error;  // L_hat minus the method's true L
    std::optional<double> kappa_hat;
    std::optional<double> kappa_target;
    double seconds = 0;
};

struct Metric {
    double value = 0;
    std::optional<double> mc_se;
};

struct CellSummary {
    std::string scenario;
    std::size_t n = 0;
    SimMethod method = SimMethod::Ct;
    std::size_t reps = 0;
    std::size_t failures = 0;
    // Ordered by name.
    std::vector<std::pair<std::string, Metric>> metrics;

    const Metric* find(std::string_view name) const;
};

struct SimulationReport {
    StudyConfig config;
    std::vector<ScenarioTruth> truths;
    std::vector<CellSummary> cells;
    std::vector<ReplicateRecord> records;

    const CellSummary* find(std::string_view scenario, std::size_t n, SimMethod method) const;
};

// Groups by (scenario, n, method) and aggregates. The result does not depend
// on the order of `records`. Throws EmptyInput.
std::vector<CellSummary> summarize_metrics(std::vector<ReplicateRecord> records, bool timing = false);

using ProgressFn = std::function<void(const std::string&)>;

// Throws TooManyReplicateFailures when a cell's failure fraction exceeds
// cfg.max_failure_fraction.
SimulationReport run_study(const StudyConfig& cfg, const ProgressFn& progress = {});

nlohmann::json to_json(const SimulationReport& report);
// Tidy `scenario,n,method,metric,value,mc_se`.
void write_report_csv(std::ostream& out, const SimulationReport& report);

}  // namespace armst
