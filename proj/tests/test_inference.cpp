#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "armst/error.hpp"
#include "armst/inference.hpp"
#include "armst/sim.hpp"
#include "support.hpp"

using namespace armst;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("HulC fold counts") {
    CHECK(hulc_fold_count(0.05, true) == 5);
    CHECK(hulc_fold_count(0.05, false) == 6);
    CHECK(hulc_fold_count(0.1, false) == 5);
    CHECK(hulc_fold_count(0.1, true) == 4);
    // 1 - ln(0.125)/ln 2 = 4 exactly; both variants agree.
    CHECK(hulc_fold_count(0.125, true) == 4);
    CHECK(hulc_fold_count(0.125, false) == 4);
}

TEST_CASE("type-7 quantiles") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(quantile_type7(x, 0.0) == 1);
    CHECK(quantile_type7(x, 1.0) == 5);
    CHECK(quantile_type7(x, 0.5) == 3);
    CHECK(quantile_type7(x, 0.1) == doctest::Approx(1.4));
    std::vector<double> big(1000);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<double>(i + 1);
    CHECK(quantile_type7(big, 0.025) == doctest::Approx(25.975));
    CHECK(quantile_type7(big, 0.975) == doctest::Approx(975.025));
}

TEST_CASE("Wald interval on the toy dataset") {
    const auto ds = testing::toy_dataset();
    const auto res = wald_interval_discrete(ds, {2.0}, 0.05, {});
    const double half = 1.959963984540054 * std::sqrt(0.625 / 4.0);
    CHECK(res.ci_kappa.lower == doctest::Approx(0.25 - half).epsilon(1e-12));
    CHECK(res.ci_kappa.upper == doctest::Approx(0.25 + half).epsilon(1e-12));
    CHECK(res.ci_kappa.lower == doctest::Approx(-0.524).epsilon(1e-3));
    CHECK(res.ci_kappa.upper == doctest::Approx(1.024).epsilon(1e-3));
    REQUIRE(res.ci_L);
    CHECK(res.ci_L->lower == 2.0);
    CHECK(res.ci_L->upper == 2.0);
    CHECK(!res.reject);
    REQUIRE(res.p_value);
    CHECK(*res.p_value == doctest::Approx(0.527).epsilon(1e-3));
}

TEST_CASE("identical arms: Wald interval symmetric about zero") {
    const auto ds = testing::identical_arms(300, 5);
    const auto grid = uniform_grid(0.2, 2.0, 10);
    const auto res = wald_interval_discrete(ds, grid, 0.05, {0.005, grid[4]});
    CHECK(res.kappa_hat == 0.0);
    CHECK(res.ci_kappa.lower == -res.ci_kappa.upper);
    CHECK(!res.reject);
    CHECK(res.L_hat == grid[4]);
}

TEST_CASE("bootstrap under identical arms covers zero and concentrates L near the target") {
    const auto ds = testing::identical_arms(500, 6);
    const auto res = bootstrap_interval(ds, 0.05, 200, {0.2, 4.2}, {0.002, 2.2}, 3);
    CHECK(res.ci_kappa.contains(0.0));
    CHECK(!res.reject);
    REQUIRE(res.ci_L);
    CHECK(res.L_hat == doctest::Approx(2.2).epsilon(1e-6));
    CHECK(res.ci_L->lower > 1.5);
    CHECK(res.ci_L->upper < 2.9);
}

TEST_CASE("bootstrap p-value is coherent with the interval") {
    Rng rng(50);
    for (int rep = 0; rep < 6; ++rep) {
        const auto ds = testing::random_exponential_dataset(rng, 300, 1.0, rep % 2 ? 0.6 : 1.0);
        const auto res = bootstrap_interval(ds, 0.05, 200, {0.2, 3.0}, {0.002, 1.6}, 10 + rep);
        REQUIRE(res.p_value);
        CHECK(res.reject == (*res.p_value <= 0.05));
        CHECK(res.reject == !res.ci_kappa.contains(0.0));
        CHECK(res.diagnostics.used + res.diagnostics.skipped == 200);
    }
}

TEST_CASE("bootstrap results do not depend on the worker count") {
    Rng rng(51);
    const auto ds = testing::random_exponential_dataset(rng, 200);
    BootstrapOptions one, four;
    four.workers = 4;
    const auto a = bootstrap_interval(ds, 0.05, 100, {0.2, 3.0}, {0.002, 1.6}, 9, one);
    const auto b = bootstrap_interval(ds, 0.05, 100, {0.2, 3.0}, {0.002, 1.6}, 9, four);
    CHECK(to_json(a).dump() == to_json(b).dump());
    const auto h1 = hulc_interval(ds, 0.05, true, {0.2, 3.0}, 9, 1);
    const auto h4 = hulc_interval(ds, 0.05, true, {0.2, 3.0}, 9, 4);
    CHECK(to_json(h1).dump() == to_json(h4).dump());
}

TEST_CASE("too many unusable resamples is an error") {
    // With L_min above most follow-up, many resamples lose the estimable range.
    const TrialDataset ds({{0, 0.1, 1}, {0, 0.2, 1}, {0, 3.0, 0}, {1, 0.1, 1}, {1, 0.3, 0}, {1, 3.0, 0}});
    CHECK(code_of([&] { bootstrap_interval(ds, 0.05, 200, {2.0, 3.0}, {}, 1); }) ==
          ErrorCode::TooManyDegenerateResamples);
}

TEST_CASE("HulC interval is the hull of the fold estimates") {
    Rng rng(52);
    const auto ds = testing::random_exponential_dataset(rng, 400);
    const auto res = hulc_interval(ds, 0.05, true, {0.2, 3.0}, 4);
    REQUIRE(res.fold_estimates.size() == 5);
    CHECK(res.ci_kappa.lower == *std::min_element(res.fold_estimates.begin(), res.fold_estimates.end()));
    CHECK(res.ci_kappa.upper == *std::max_element(res.fold_estimates.begin(), res.fold_estimates.end()));
    CHECK(!res.p_value);
    CHECK(res.reject == !res.ci_kappa.contains(0.0));
    CHECK(hulc_interval(ds, 0.05, false, {0.2, 3.0}, 4).fold_estimates.size() == 6);
}

TEST_CASE("HulC needs two subjects per arm in every fold") {
    const TrialDataset ds({{0, 1, 1}, {0, 2, 1}, {0, 3, 0}, {1, 1, 1}, {1, 2, 0}, {1, 3, 1}});
    CHECK(code_of([&] { hulc_interval(ds, 0.05, true, {0.5, 2.0}, 1); }) == ErrorCode::FoldTooSmall);
}

TEST_CASE("analyze fills defaults") {
    const auto ds = generate_trial(find_scenario("ph"), 400, 12);
    AnalysisConfig cfg;
    cfg.L_min = 0.2;
    cfg.L_max = 4.2;
    cfg.bootstrap = 50;
    auto r = resolve_config(ds, cfg);
    CHECK(r.penalty.c == doctest::Approx(0.002));
    CHECK(r.penalty.l_tilde == doctest::Approx(2.2));
    CHECK(resolve_config(ds, AnalysisConfig{}).bootstrap == 1000);

    cfg.method = AnalysisMethod::Dt;
    r = resolve_config(ds, cfg);
    CHECK(r.grid.size() == 10);
    CHECK(r.penalty.c == doctest::Approx(0.005));
    CHECK(r.penalty.l_tilde == doctest::Approx(1.98).epsilon(1e-3));

    cfg.method = AnalysisMethod::Hulc;
    r = resolve_config(ds, cfg);
    CHECK(r.folds == 5);
    CHECK(r.penalty.c == 0.0);

    cfg.method = AnalysisMethod::Ct;
    cfg.L_min = 3;
    cfg.L_max = 53;
    cfg.unit = TimeUnit::Months;
    r = resolve_config(ds, cfg);
    CHECK(r.penalty.c == doctest::Approx(8.89e-8).epsilon(5e-4));
    CHECK(r.penalty.l_tilde == 28.0);
}

TEST_CASE("result JSON carries the resolved configuration") {
    const auto ds = testing::toy_dataset();
    AnalysisConfig cfg;
    cfg.method = AnalysisMethod::Dt;
    cfg.grid = std::vector<double>{2.0};
    const auto j = to_json(analyze(ds, cfg));
    CHECK(j["method"] == "dt");
    CHECK(j["config"]["grid"].size() == 1);
    CHECK(j["p_value_kind"] == "wald");
    CHECK(j["ci_L"]["lower"] == 2.0);
}
