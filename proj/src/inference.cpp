#include "armst/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "armst/error.hpp"
#include "armst/km.hpp"
#include "armst/parallel.hpp"
#include "armst/rng.hpp"

namespace armst {

namespace {

constexpr std::uint64_t kHulcStream = 0x68756c63;  // "hulc"
constexpr std::uint64_t kBootStream = 0x626f6f74;  // "boot"
constexpr double kPValueStep = 1e-4;

bool excludes_zero(const ConfidenceInterval& ci) { return ci.lower > 0.0 || ci.upper < 0.0; }

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
}

}  // namespace

std::string_view to_string(IntervalMethod m) {
    switch (m) {
        case IntervalMethod::Hulc: return "hulc";
        case IntervalMethod::HulcAnti: return "hulc_anti";
        case IntervalMethod::Bootstrap: return "bootstrap";
        case IntervalMethod::Wald: return "wald";
    }
    return "wald";
}

std::string_view to_string(AnalysisMethod m) {
    switch (m) {
        case AnalysisMethod::Ct: return "ct";
        case AnalysisMethod::Dt: return "dt";
        case AnalysisMethod::Hulc: return "hulc";
    }
    return "ct";
}

std::optional<AnalysisMethod> parse_analysis_method(std::string_view text) {
    if (text == "ct") return AnalysisMethod::Ct;
    if (text == "dt") return AnalysisMethod::Dt;
    if (text == "hulc") return AnalysisMethod::Hulc;
    return std::nullopt;
}

std::size_t hulc_fold_count(double alpha, bool anti_conservative) {
    check_alpha(alpha);
    double x = 1.0 - std::log(alpha) / std::log(2.0);
    // Powers of two land on integers up to rounding in the logs.
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-9) x = r;
    return static_cast<std::size_t>(anti_conservative ? std::floor(x) : std::ceil(x));
}

double quantile_type7(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty sample");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(h));
    if (k + 1 >= sorted.size()) return sorted.back();
    return sorted[k] + (h - static_cast<double>(k)) * (sorted[k + 1] - sorted[k]);
}

AnalysisResult hulc_interval(const TrialDataset& ds, double alpha, bool anti_conservative, const SearchRange& range,
                             std::uint64_t seed, unsigned workers) {
    const std::size_t folds = hulc_fold_count(alpha, anti_conservative);
    if (folds < 2) throw Error(ErrorCode::InvalidArgument, "alpha too large: fewer than two folds");

    // Stratified assignment: shuffle each arm, then deal positions round-robin,
    // continuing the count across arms so fold sizes stay within one of each other.
    Rng rng(seed, {kHulcStream});
    std::vector<std::vector<std::size_t>> members(folds);
    std::size_t dealt = 0;
    for (int a = 0; a < 2; ++a) {
        std::vector<std::size_t> idx = ds.arm(a).index;
        rng.shuffle(idx);
        for (std::size_t pos : idx) members[dealt++ % folds].push_back(pos);
    }
    for (std::size_t j = 0; j < folds; ++j) {
        std::size_t arm1 = 0;
        for (std::size_t pos : members[j]) arm1 += static_cast<std::size_t>(ds.records()[pos].arm);
        const std::size_t arm0 = members[j].size() - arm1;
        if (arm0 < 2 || arm1 < 2)
            throw Error(ErrorCode::FoldTooSmall, "fold " + std::to_string(j) + " has " + std::to_string(arm0) +
                                                     " control and " + std::to_string(arm1) + " treatment subjects");
        std::sort(members[j].begin(), members[j].end());
    }

    const PenaltyConfig none{};
    std::vector<double> estimates(folds);
    parallel_for(folds, workers, [&](std::size_t j) {
        const TrialDataset fold = ds.subset(members[j]);
        estimates[j] = maximize_continuous(KappaEvaluator(fold), range.L_min, range.L_max, none).estimate.kappa;
    });

    const auto full = maximize_continuous(KappaEvaluator(ds), range.L_min, range.L_max, none);

    AnalysisResult res;
    res.method = AnalysisMethod::Hulc;
    res.L_hat = full.L_hat;
    res.kappa_hat = full.estimate.kappa;
    const auto [lo, hi] = std::minmax_element(estimates.begin(), estimates.end());
    res.ci_kappa = {*lo, *hi, 1.0 - alpha, anti_conservative ? IntervalMethod::HulcAnti : IntervalMethod::Hulc};
    res.reject = excludes_zero(res.ci_kappa);
    res.seed = seed;
    res.diagnostics = {folds, folds, 0};
    res.fold_estimates = std::move(estimates);
    return res;
}

AnalysisResult bootstrap_interval(const TrialDataset& ds, double alpha, std::size_t resamples, const SearchRange& range,
                                  const PenaltyConfig& pen, std::uint64_t seed, const BootstrapOptions& opts) {
    check_alpha(alpha);
    if (resamples < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 bootstrap resamples");

    const std::size_t n = ds.n();
    std::vector<double> kappas(resamples), ls(resamples);
    std::vector<char> ok(resamples, 0);

    parallel_for(resamples, opts.workers, [&](std::size_t b) {
        Rng rng(seed, {kBootStream, b});
        std::vector<std::uint32_t> counts(n, 0);
        if (opts.stratified) {
            for (int a = 0; a < 2; ++a) {
                const auto& idx = ds.arm(a).index;
                for (std::size_t k = 0; k < idx.size(); ++k) ++counts[idx[rng.index(idx.size())]];
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) ++counts[rng.index(n)];
        }
        SurvivalCurve curves[2];
        for (int a = 0; a < 2; ++a) {
            const auto& arm = ds.arm(a);
            std::vector<std::uint32_t> arm_counts(arm.size());
            std::uint64_t total = 0;
            for (std::size_t k = 0; k < arm.size(); ++k) total += arm_counts[k] = counts[arm.index[k]];
            if (total < 2) return;
            curves[a] = fit_km_sorted(arm.times, arm.events, arm_counts);
        }
        const KappaEvaluator eval(curves[0], curves[1]);
        if (eval.max_estimable() < range.L_min) return;
        try {
            const auto fit = maximize_continuous(eval, range.L_min, range.L_max, pen);
            kappas[b] = fit.estimate.kappa;
            ls[b] = fit.L_hat;
            ok[b] = 1;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoEstimablePoint) throw;
        }
    });

    std::vector<double> k_used, l_used;
    for (std::size_t b = 0; b < resamples; ++b) {
        if (!ok[b]) continue;
        k_used.push_back(kappas[b]);
        l_used.push_back(ls[b]);
    }
    const std::size_t skipped = resamples - k_used.size();
    if (static_cast<double>(skipped) > opts.max_skipped_fraction * static_cast<double>(resamples) || k_used.size() < 2)
        throw Error(ErrorCode::TooManyDegenerateResamples,
                    std::to_string(skipped) + " of " + std::to_string(resamples) + " resamples had no estimable point");
    std::sort(k_used.begin(), k_used.end());
    std::sort(l_used.begin(), l_used.end());

    const auto full = maximize_continuous(KappaEvaluator(ds), range.L_min, range.L_max, pen);

    AnalysisResult res;
    res.method = AnalysisMethod::Ct;
    res.L_hat = full.L_hat;
    res.kappa_hat = full.estimate.kappa;
    res.ci_kappa = {quantile_type7(k_used, alpha / 2), quantile_type7(k_used, 1 - alpha / 2), 1 - alpha,
                    IntervalMethod::Bootstrap};
    res.ci_L = ConfidenceInterval{quantile_type7(l_used, alpha / 2), quantile_type7(l_used, 1 - alpha / 2), 1 - alpha,
                                  IntervalMethod::Bootstrap};
    res.reject = excludes_zero(res.ci_kappa);

    // Smallest level on a 1e-4 grid at which the percentile interval excludes zero.
    double p = 1.0;
    for (int k = 1; k <= 10000; ++k) {
        const double a = k * kPValueStep;
        const ConfidenceInterval ci{quantile_type7(k_used, a / 2), quantile_type7(k_used, 1 - a / 2), 1 - a,
                                    IntervalMethod::Bootstrap};
        if (excludes_zero(ci)) {
            p = a;
            break;
        }
    }
    res.p_value = p;
    res.seed = seed;
    res.diagnostics = {resamples, k_used.size(), skipped};
    return res;
}

AnalysisResult wald_interval_discrete(const TrialDataset& ds, const std::vector<double>& grid, double alpha,
                                      const PenaltyConfig& pen) {
    check_alpha(alpha);
    const auto fit = maximize_discrete(KappaEvaluator(ds), grid, pen);
    const boost::math::normal std_normal;
    const double z = boost::math::quantile(std_normal, 1.0 - alpha / 2.0);
    const double se = std::sqrt(fit.sigma2 / static_cast<double>(ds.n()));

    AnalysisResult res;
    res.method = AnalysisMethod::Dt;
    res.L_hat = fit.L_hat;
    res.kappa_hat = fit.kappa_hat;
    res.sigma2 = fit.sigma2;
    res.ci_kappa = {fit.kappa_hat - z * se, fit.kappa_hat + z * se, 1.0 - alpha, IntervalMethod::Wald};
    res.ci_L = ConfidenceInterval{fit.L_hat, fit.L_hat, 1.0 - alpha, IntervalMethod::Wald};
    if (se > 0.0)
        res.p_value = 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(fit.kappa_hat) / se));
    else
        res.p_value = fit.kappa_hat == 0.0 ? 1.0 : 0.0;
    res.reject = excludes_zero(res.ci_kappa);
    res.diagnostics = {grid.size(), grid.size(), 0};
    return res;
}

ResolvedConfig resolve_config(const TrialDataset& ds, const AnalysisConfig& cfg) {
    check_alpha(cfg.alpha);
    ResolvedConfig r;
    r.method = cfg.method;
    r.alpha = cfg.alpha;
    r.unit = cfg.unit.value_or(ds.time_unit());
    r.seed = cfg.seed;
    r.stratified_bootstrap = cfg.stratified_bootstrap;

    const auto [auto_min, auto_max] = default_range(ds);
    if (cfg.method == AnalysisMethod::Dt && cfg.grid) {
        if (cfg.grid->empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
        r.range = {cfg.grid->front(), cfg.grid->back()};
    } else {
        r.range = {cfg.L_min.value_or(auto_min), cfg.L_max.value_or(auto_max)};
    }
    if (!(r.range.L_min > 0.0)) throw Error(ErrorCode::InvalidArgument, "L_min must be positive");

    switch (cfg.method) {
        case AnalysisMethod::Ct:
            if (!(r.range.L_max > r.range.L_min)) throw Error(ErrorCode::InvalidArgument, "need L_max > L_min");
            r.penalty.c = cfg.c.value_or(default_penalty(r.range.L_min, r.range.L_max, r.unit, PenaltyKind::Continuous));
            r.penalty.l_tilde = cfg.l_tilde.value_or(0.5 * (r.range.L_min + r.range.L_max));
            r.bootstrap = cfg.bootstrap;
            break;
        case AnalysisMethod::Dt:
            r.grid = cfg.grid ? *cfg.grid : uniform_grid(r.range.L_min, r.range.L_max, cfg.grid_points);
            if (r.grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
            r.penalty.c = r.grid.size() > 1 && r.range.L_max > r.range.L_min
                              ? cfg.c.value_or(default_penalty(r.range.L_min, r.range.L_max, r.unit, PenaltyKind::Discrete))
                              : cfg.c.value_or(0.0);
            r.penalty.l_tilde = cfg.l_tilde.value_or(r.grid[default_grid_center(r.grid.size())]);
            break;
        case AnalysisMethod::Hulc:
            if (!(r.range.L_max > r.range.L_min)) throw Error(ErrorCode::InvalidArgument, "need L_max > L_min");
            r.anti_conservative = cfg.anti_conservative;
            r.folds = hulc_fold_count(cfg.alpha, cfg.anti_conservative);
            break;
    }
    if (r.penalty.c < 0.0) throw Error(ErrorCode::InvalidArgument, "penalty c must be non-negative");
    return r;
}

AnalysisResult analyze(const TrialDataset& ds, const AnalysisConfig& cfg) {
    const ResolvedConfig r = resolve_config(ds, cfg);
    AnalysisResult res;
    switch (r.method) {
        case AnalysisMethod::Ct:
            res = bootstrap_interval(ds, r.alpha, r.bootstrap, r.range, r.penalty, r.seed,
                                     BootstrapOptions{r.stratified_bootstrap, cfg.workers});
            break;
        case AnalysisMethod::Dt:
            res = wald_interval_discrete(ds, r.grid, r.alpha, r.penalty);
            break;
        case AnalysisMethod::Hulc:
            res = hulc_interval(ds, r.alpha, r.anti_conservative, r.range, r.seed, cfg.workers);
            break;
    }
    res.seed = r.seed;
    res.config = r;
    return res;
}

nlohmann::json to_json(const ConfidenceInterval& ci) {
    return {{"lower", ci.lower}, {"upper", ci.upper}, {"level", ci.level}, {"method", std::string(to_string(ci.method))}};
}

nlohmann::json to_json(const ResolvedConfig& cfg) {
    nlohmann::json j;
    j["method"] = std::string(to_string(cfg.method));
    j["L_min"] = cfg.range.L_min;
    j["L_max"] = cfg.range.L_max;
    j["grid"] = cfg.grid;
    j["alpha"] = cfg.alpha;
    j["c"] = cfg.penalty.c;
    j["l_tilde"] = cfg.penalty.l_tilde;
    j["unit"] = std::string(to_string(cfg.unit));
    j["seed"] = cfg.seed;
    j["bootstrap"] = cfg.bootstrap;
    j["folds"] = cfg.folds;
    j["anti_conservative"] = cfg.anti_conservative;
    j["stratified_bootstrap"] = cfg.stratified_bootstrap;
    return j;
}

nlohmann::json to_json(const AnalysisResult& r) {
    nlohmann::json j;
    j["method"] = std::string(to_string(r.method));
    j["L_hat"] = r.L_hat;
    j["kappa_hat"] = r.kappa_hat;
    j["sigma2"] = r.sigma2 ? nlohmann::json(*r.sigma2) : nlohmann::json(nullptr);
    j["ci_kappa"] = to_json(r.ci_kappa);
    j["ci_L"] = r.ci_L ? to_json(*r.ci_L) : nlohmann::json(nullptr);
    j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr);
    j["p_value_kind"] = !r.p_value ? nlohmann::json(nullptr)
                        : r.method == AnalysisMethod::Ct ? nlohmann::json("percentile_inversion")
                                                         : nlohmann::json("wald");
    j["reject"] = r.reject;
    j["seed"] = r.seed;
    j["diagnostics"] = {{"requested", r.diagnostics.requested},
                        {"used", r.diagnostics.used},
                        {"skipped", r.diagnostics.skipped}};
    j["fold_estimates"] = r.fold_estimates;
    j["config"] = to_json(r.config);
    return j;
}

}  // namespace armst
