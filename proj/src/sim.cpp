#include "armst/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

#include "armst/comparators.hpp"
#include "armst/error.hpp"
#include "armst/inference.hpp"
#include "armst/parallel.hpp"

namespace armst {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;  // "data"
constexpr std::uint64_t kMethodStream = 0x6d657468;

struct MethodName {
    SimMethod method;
    const char* name;
};

constexpr MethodName kMethodNames[] = {
    {SimMethod::Ct, "ct"},           {SimMethod::Dt, "dt"},           {SimMethod::Hulc, "hulc"},
    {SimMethod::Rmst, "rmst"},       {SimMethod::Logrank, "logrank"}, {SimMethod::Maxcombo, "maxcombo"},
    {SimMethod::Oracle, "oracle"},
};

PenaltyConfig ct_penalty(const ScenarioTruth& t) { return {t.c_ct, t.l_tilde_ct}; }
PenaltyConfig dt_penalty(const ScenarioTruth& t) { return {t.c_dt, t.l_tilde_dt}; }

std::vector<double> study_grid(const StudyConfig& cfg) { return uniform_grid(cfg.L_min, cfg.L_max, cfg.grid_points); }

void validate(const StudyConfig& cfg) {
    if (cfg.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
    if (cfg.methods.empty()) throw Error(ErrorCode::InvalidArgument, "methods must be nonempty");
    if (cfg.scenarios.empty() || cfg.ns.empty())
        throw Error(ErrorCode::InvalidArgument, "need at least one scenario and one sample size");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (!(cfg.L_min > 0.0 && cfg.L_max > cfg.L_min)) throw Error(ErrorCode::InvalidArgument, "need 0 < L_min < L_max");
    if (cfg.grid_points < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
    for (const auto& name : cfg.scenarios) {
        const auto& s = find_scenario(name);
        if (!(cfg.L_max < s.admin_time))
            throw Error(ErrorCode::InvalidArgument, "L_max must be below the administrative censoring time");
    }
    for (auto n : cfg.ns)
        if (n < 4) throw Error(ErrorCode::InvalidArgument, "each trial needs at least 4 subjects");
}

ReplicateRecord run_method(SimMethod method, const TrialDataset& ds, const ScenarioSpec& s, const ScenarioTruth& truth,
                           const StudyConfig& cfg, std::uint64_t method_seed) {
    ReplicateRecord r;
    r.method = method;
    const SearchRange range{cfg.L_min, cfg.L_max};
    switch (method) {
        case SimMethod::Ct: {
            BootstrapOptions opts;
            const auto res = bootstrap_interval(ds, cfg.alpha, cfg.bootstrap, range, ct_penalty(truth), method_seed, opts);
            r.reject = res.reject;
            r.covered = res.ci_kappa.contains(truth.kappa_ct);
            r.L_hat = res.L_hat;
            r.L_error = res.L_hat - truth.L_ct;
            r.kappa_hat = res.kappa_hat;
            r.kappa_target = truth.kappa_ct;
            break;
        }
        case SimMethod::Dt: {
            const auto res = wald_interval_discrete(ds, study_grid(cfg), cfg.alpha, dt_penalty(truth));
            r.reject = res.reject;
            r.covered = res.ci_kappa.contains(truth.kappa_dt);
            r.L_hat = res.L_hat;
            r.L_error = res.L_hat - truth.L_dt;
            r.kappa_hat = res.kappa_hat;
            r.kappa_target = truth.kappa_dt;
            break;
        }
        case SimMethod::Hulc: {
            const auto res = hulc_interval(ds, cfg.alpha, true, range, method_seed);
            r.reject = res.reject;
            r.covered = res.ci_kappa.contains(truth.kappa_star);
            r.L_hat = res.L_hat;
            r.L_error = res.L_hat - truth.L_star.value_or(truth.l_tilde_ct);
            r.kappa_hat = res.kappa_hat;
            r.kappa_target = truth.kappa_star;
            break;
        }
        case SimMethod::Rmst:
        case SimMethod::Oracle: {
            const auto res = method == SimMethod::Rmst ? fixed_rmst_test(ds, std::nullopt, cfg.alpha)
                                                       : oracle_rmst_test(ds, truth.oracle_L, cfg.alpha);
            const double target = true_kappa(s, res.estimate.L);
            r.reject = res.test.p_value < cfg.alpha;
            r.covered = res.ci.contains(target);
            r.L_hat = res.estimate.L;
            r.kappa_hat = res.estimate.kappa;
            r.kappa_target = target;
            break;
        }
        case SimMethod::Logrank:
            r.reject = weighted_logrank(ds, 0, 0).p_value < cfg.alpha;
            break;
        case SimMethod::Maxcombo:
            r.reject = maxcombo(ds).p_value < cfg.alpha;
            break;
    }
    return r;
}

struct Moments {
    std::size_t count = 0;
    double mean = 0;
    double sd = 0;  // sample SD; 0 for a single value
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.count = xs.size();
    if (xs.empty()) return m;
    double sum = 0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

Metric proportion(std::size_t hits, std::size_t total) {
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(total))};
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size();
    return m % 2 ? xs[m / 2] : 0.5 * (xs[m / 2 - 1] + xs[m / 2]);
}

// Bias, SD and RMSE of a set of errors, with RMSE^2 = bias^2 + SD^2.
void add_error_metrics(std::vector<std::pair<std::string, Metric>>& out, const std::string& prefix,
                       const std::vector<double>& errors) {
    if (errors.empty()) return;
    const auto m = moments(errors);
    const double k = static_cast<double>(m.count);
    const double se_bias = m.sd / std::sqrt(k);
    const std::optional<double> se_sd =
        m.count > 1 ? std::optional<double>(m.sd / std::sqrt(2.0 * (k - 1.0))) : std::nullopt;
    const double rmse = std::sqrt(m.mean * m.mean + m.sd * m.sd);
    std::optional<double> se_rmse;
    if (se_sd && rmse > 0)
        se_rmse = std::sqrt(m.mean * m.mean * se_bias * se_bias + m.sd * m.sd * *se_sd * *se_sd) / rmse;
    out.emplace_back(prefix + "_bias", Metric{m.mean, se_bias});
    out.emplace_back(prefix + "_sd", Metric{m.sd, se_sd});
    out.emplace_back(prefix + "_rmse", Metric{rmse, se_rmse});
}

CellSummary summarize_cell(const std::vector<const ReplicateRecord*>& cell, bool timing) {
    CellSummary c;
    c.scenario = cell.front()->scenario;
    c.n = cell.front()->n;
    c.method = cell.front()->method;
    c.reps = cell.size();

    std::size_t rejects = 0, covered = 0, coverage_total = 0;
    std::vector<double> l_errors, l_abs_errors, l_hats, kappas, kappa_errors;
    double seconds = 0;
    for (const auto* r : cell) {
        seconds += r->seconds;
        if (!r->ok) {
            ++c.failures;
            continue;
        }
        rejects += r->reject;
        if (r->covered) {
            ++coverage_total;
            covered += *r->covered;
        }
        if (r->L_hat) l_hats.push_back(*r->L_hat);
        if (r->L_error) {
            l_errors.push_back(*r->L_error);
            l_abs_errors.push_back(std::abs(*r->L_error));
        }
        if (r->kappa_hat) kappas.push_back(*r->kappa_hat);
        if (r->kappa_hat && r->kappa_target) kappa_errors.push_back(*r->kappa_hat - *r->kappa_target);
    }
    const std::size_t used = c.reps - c.failures;
    auto& m = c.metrics;
    m.emplace_back("failure_rate", proportion(c.failures, c.reps));
    if (used > 0) {
        m.emplace_back("rejection_rate", proportion(rejects, used));
        if (coverage_total > 0) m.emplace_back("coverage", proportion(covered, coverage_total));
        if (!l_hats.empty()) {
            const auto lm = moments(l_hats);
            m.emplace_back("L_mean", Metric{lm.mean, lm.sd / std::sqrt(static_cast<double>(lm.count))});
        }
        add_error_metrics(m, "L", l_errors);
        if (!l_abs_errors.empty()) m.emplace_back("L_median_abs_error", Metric{median(l_abs_errors), std::nullopt});
        if (!kappas.empty()) {
            const auto km = moments(kappas);
            m.emplace_back("kappa_mean", Metric{km.mean, km.sd / std::sqrt(static_cast<double>(km.count))});
        }
        add_error_metrics(m, "kappa", kappa_errors);
    }
    if (timing) m.emplace_back("mean_runtime_s", Metric{seconds / static_cast<double>(c.reps), std::nullopt});
    std::sort(m.begin(), m.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return c;
}

std::uint64_t method_seed(const StudyConfig& cfg, std::size_t scenario, std::size_t n, std::size_t rep, SimMethod m) {
    return Rng(cfg.seed, {kMethodStream, scenario, n, rep, static_cast<std::uint64_t>(m)}).next();
}

std::string format_number(double x) {
    if (std::isnan(x)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

}  // namespace

TrialDataset generate_trial(const ScenarioSpec& s, std::size_t n, Rng& rng) {
    const std::size_t n1 = n / 2;
    std::vector<SubjectRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int arm = i < n1 ? 1 : 0;
        const double t = (arm ? s.treatment : s.control).sample(rng);
        const double c = std::min(rng.exponential(s.censor_rate), s.admin_time);
        records.push_back({arm, std::min(t, c), t <= c ? 1 : 0});
    }
    return TrialDataset(std::move(records), TimeUnit::Years);
}

TrialDataset generate_trial(const ScenarioSpec& s, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return generate_trial(s, n, rng);
}

std::string_view to_string(SimMethod m) {
    for (const auto& e : kMethodNames)
        if (e.method == m) return e.name;
    return "unknown";
}

std::optional<SimMethod> parse_sim_method(std::string_view text) {
    for (const auto& e : kMethodNames)
        if (text == e.name) return e.method;
    return std::nullopt;
}

const std::vector<SimMethod>& all_sim_methods() {
    static const std::vector<SimMethod> all = [] {
        std::vector<SimMethod> v;
        for (const auto& e : kMethodNames) v.push_back(e.method);
        return v;
    }();
    return all;
}

void apply_paper_scale(StudyConfig& cfg) {
    cfg.reps = 2000;
    cfg.bootstrap = 1000;
}

ScenarioTruth compute_truth(const ScenarioSpec& s, const StudyConfig& cfg) {
    ScenarioTruth t;
    t.scenario = s.name;
    t.c_ct = cfg.c_ct.value_or(default_penalty(cfg.L_min, cfg.L_max, TimeUnit::Years, PenaltyKind::Continuous));
    t.c_dt = cfg.c_dt.value_or(default_penalty(cfg.L_min, cfg.L_max, TimeUnit::Years, PenaltyKind::Discrete));
    t.l_tilde_ct = cfg.l_tilde.value_or(0.5 * (cfg.L_min + cfg.L_max));
    const auto grid = study_grid(cfg);
    t.l_tilde_dt = grid[default_grid_center(grid.size())];

    try {
        const auto star = true_optimum(s, cfg.L_min, cfg.L_max, PenaltyConfig{});
        t.L_star = star.L;
        t.kappa_star = star.kappa;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonUniqueMaximizer) throw;
        // Every L is optimal; the effect is the same at all of them.
        t.kappa_star = true_kappa(s, t.l_tilde_ct);
    }
    const auto ct = true_optimum(s, cfg.L_min, cfg.L_max, ct_penalty(t));
    t.L_ct = ct.L;
    t.kappa_ct = ct.kappa;
    const auto dt = true_optimum_discrete(s, grid, dt_penalty(t));
    t.L_dt = dt.L;
    t.kappa_dt = dt.kappa;
    t.oracle_L = t.L_star.value_or(t.l_tilde_ct);
    return t;
}

const Metric* CellSummary::find(std::string_view name) const {
    for (const auto& [key, metric] : metrics)
        if (key == name) return &metric;
    return nullptr;
}

const CellSummary* SimulationReport::find(std::string_view scenario, std::size_t n, SimMethod method) const {
    for (const auto& c : cells)
        if (c.scenario == scenario && c.n == n && c.method == method) return &c;
    return nullptr;
}

std::vector<CellSummary> summarize_metrics(std::vector<ReplicateRecord> records, bool timing) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no replicate records to summarize");
    auto key = [](const ReplicateRecord& r) {
        // Known scenarios sort in canonical order, anything else after them by name.
        std::size_t idx = scenarios().size();
        for (std::size_t i = 0; i < scenarios().size(); ++i)
            if (scenarios()[i].name == r.scenario) idx = i;
        return std::make_tuple(idx, r.scenario, r.n, static_cast<int>(r.method), r.rep);
    };
    std::stable_sort(records.begin(), records.end(),
                     [&](const ReplicateRecord& a, const ReplicateRecord& b) { return key(a) < key(b); });

    std::vector<CellSummary> cells;
    std::vector<const ReplicateRecord*> cell;
    for (std::size_t i = 0; i <= records.size(); ++i) {
        const bool boundary = i == records.size() || (!cell.empty() && (records[i].scenario != cell.front()->scenario ||
                                                                         records[i].n != cell.front()->n ||
                                                                         records[i].method != cell.front()->method));
        if (boundary && !cell.empty()) {
            cells.push_back(summarize_cell(cell, timing));
            cell.clear();
        }
        if (i < records.size()) cell.push_back(&records[i]);
    }
    return cells;
}

SimulationReport run_study(const StudyConfig& cfg, const ProgressFn& progress) {
    validate(cfg);
    SimulationReport report;
    report.config = cfg;

    for (const auto& name : cfg.scenarios) {
        const auto& s = find_scenario(name);
        report.truths.push_back(compute_truth(s, cfg));
        if (progress) {
            const auto& t = report.truths.back();
            char buf[256];
            std::snprintf(buf, sizeof buf, "truth %s: L*=%s L_ct=%.6g L_dt=%.6g", name.c_str(),
                          t.L_star ? format_number(*t.L_star).c_str() : "undefined", t.L_ct, t.L_dt);
            progress(buf);
        }
    }

    for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
        const auto& s = find_scenario(cfg.scenarios[si]);
        const std::size_t s_index = scenario_index(s.name);
        const auto& truth = report.truths[si];
        for (std::size_t n : cfg.ns) {
            std::vector<std::vector<ReplicateRecord>> slots(cfg.reps);
            parallel_for(cfg.reps, cfg.workers, [&](std::size_t k) {
                Rng data_rng(cfg.seed, {kDataStream, s_index, n, k});
                const auto ds = generate_trial(s, n, data_rng);
                auto& out = slots[k];
                for (SimMethod m : cfg.methods) {
                    const auto start = std::chrono::steady_clock::now();
                    ReplicateRecord r;
                    try {
                        r = run_method(m, ds, s, truth, cfg, method_seed(cfg, s_index, n, k, m));
                    } catch (const Error& e) {
                        r = ReplicateRecord{};
                        r.method = m;
                        r.ok = false;
                        r.error = std::string(to_string(e.code()));
                    }
                    r.scenario = s.name;
                    r.n = n;
                    r.rep = k;
                    if (cfg.timing)
                        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    out.push_back(std::move(r));
                }
            });
            for (auto& slot : slots)
                for (auto& r : slot) report.records.push_back(std::move(r));
            if (progress) progress("done " + s.name + " n=" + std::to_string(n));
        }
    }

    report.cells = summarize_metrics(report.records, cfg.timing);
    for (const auto& c : report.cells) {
        if (static_cast<double>(c.failures) > cfg.max_failure_fraction * static_cast<double>(c.reps)) {
            std::string first_error;
            for (const auto& r : report.records)
                if (!r.ok && r.scenario == c.scenario && r.n == c.n && r.method == c.method) {
                    first_error = r.error;
                    break;
                }
            throw Error(ErrorCode::TooManyReplicateFailures,
                        std::to_string(c.failures) + " of " + std::to_string(c.reps) + " replicates failed for " +
                            c.scenario + " n=" + std::to_string(c.n) + " method " + std::string(to_string(c.method)) +
                            " (first error: " + first_error + ")");
        }
    }
    return report;
}

nlohmann::json to_json(const SimulationReport& report) {
    using nlohmann::json;
    const auto& cfg = report.config;
    json methods = json::array();
    for (auto m : cfg.methods) methods.push_back(std::string(to_string(m)));
    json config{{"scenarios", cfg.scenarios},
                {"n", cfg.ns},
                {"reps", cfg.reps},
                {"methods", methods},
                {"alpha", cfg.alpha},
                {"bootstrap", cfg.bootstrap},
                {"grid_points", cfg.grid_points},
                {"L_min", cfg.L_min},
                {"L_max", cfg.L_max},
                {"seed", cfg.seed}};

    json truths = json::array();
    for (const auto& t : report.truths) {
        truths.push_back({{"scenario", t.scenario},
                          {"L_star", t.L_star ? json(*t.L_star) : json(nullptr)},
                          {"kappa_star", t.kappa_star},
                          {"L_ct", t.L_ct},
                          {"kappa_ct", t.kappa_ct},
                          {"c_ct", t.c_ct},
                          {"l_tilde_ct", t.l_tilde_ct},
                          {"L_dt", t.L_dt},
                          {"kappa_dt", t.kappa_dt},
                          {"c_dt", t.c_dt},
                          {"l_tilde_dt", t.l_tilde_dt},
                          {"oracle_L", t.oracle_L}});
    }

    json cells = json::array();
    for (const auto& c : report.cells) {
        json metrics = json::object();
        for (const auto& [name, m] : c.metrics)
            metrics[name] = {{"value", m.value}, {"mc_se", m.mc_se ? json(*m.mc_se) : json(nullptr)}};
        cells.push_back({{"scenario", c.scenario},
                         {"n", c.n},
                         {"method", std::string(to_string(c.method))},
                         {"reps", c.reps},
                         {"failures", c.failures},
                         {"metrics", metrics}});
    }
    return {{"config", config}, {"truth", truths}, {"cells", cells}};
}

void write_report_csv(std::ostream& out, const SimulationReport& report) {
    out << "scenario,n,method,metric,value,mc_se\n";
    for (const auto& c : report.cells) {
        for (const auto& [name, m] : c.metrics) {
            out << c.scenario << ',' << c.n << ',' << to_string(c.method) << ',' << name << ','
                << format_number(m.value) << ',' << (m.mc_se ? format_number(*m.mc_se) : "NA") << '\n';
        }
    }
}

}  // namespace armst
