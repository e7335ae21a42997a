#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "armst/criterion.hpp"
#include "armst/error.hpp"
#include "armst/sim.hpp"
#include "armst/truth.hpp"
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

TEST_CASE("criterion on the toy dataset") {
    const auto ds = testing::toy_dataset();
    CHECK(criterion_value(ds, 2.0, {}) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(criterion_value(ds, 2.5, {}) == -std::numeric_limits<double>::infinity());
    CHECK(criterion_value(ds, 0.5, {}) == -std::numeric_limits<double>::infinity());  // sigma2 = 0
    CHECK(criterion_value(ds, 2.0, {0.1, 1.0}) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("identical arms: zero criterion, penalty picks the target") {
    const auto ds = testing::identical_arms(2000, 4);
    CHECK(criterion_value(ds, 1.0, {}) == 0.0);
    const auto fit = maximize_continuous(ds, 0.2, 4.2, {0.002, 2.2});
    CHECK(fit.L_hat == doctest::Approx(2.2).epsilon(1e-6));
    const auto grid = uniform_grid(0.2, 4.2, 10);
    const auto d = maximize_discrete(ds, grid, {0.005, grid[default_grid_center(10)]});
    CHECK(d.index == 4);
}

TEST_CASE("a large penalty pins the continuous maximizer to the target") {
    Rng rng(31);
    const auto ds = testing::random_exponential_dataset(rng, 400);
    const auto fit = maximize_continuous(ds, 0.2, 3.0, {1e6, 1.3});
    CHECK(fit.L_hat == doctest::Approx(1.3).epsilon(1e-4));
}

TEST_CASE("continuous maximizer recovers the true penalized optimum for tran at n=5000") {
    const auto& s = find_scenario("tran");
    const PenaltyConfig pen{0.002, 2.2};
    const auto truth = true_optimum(s, 0.2, 4.2, pen);
    const auto ds = generate_trial(s, 5000, 77);
    const auto fit = maximize_continuous(ds, 0.2, 4.2, pen);
    CHECK(std::abs(fit.L_hat - truth.L) < 0.15);
}

TEST_CASE("continuous value dominates the grid value and every profile sample") {
    Rng rng(41);
    for (int rep = 0; rep < 40; ++rep) {
        const auto ds = testing::random_exponential_dataset(rng, 60 + rng.index(300));
        const double hi = std::min(4.0, max_estimable_time(ds));
        if (hi <= 0.3) continue;
        const PenaltyConfig pen{0.002, 0.5 * (0.2 + hi)};
        const auto fit = maximize_continuous(ds, 0.2, hi, pen, true);
        const auto grid = uniform_grid(0.2, hi, 10);
        const auto d = maximize_discrete(ds, grid, {pen.c, grid[4]});
        CHECK(fit.value >= criterion_value(ds, d.L_hat, pen) - 1e-12);
        for (double v : fit.profile.m_pen_values) CHECK(fit.value >= v);
        CHECK(fit.value == doctest::Approx(criterion_value(ds, fit.L_hat, pen)).epsilon(1e-12));
        CHECK(fit.L_hat >= 0.2);
        CHECK(fit.L_hat <= hi);
    }
}

TEST_CASE("discrete fit details") {
    const auto ds = testing::toy_dataset();
    const auto d = maximize_discrete(ds, {2.0}, {});
    CHECK(d.L_hat == 2.0);
    CHECK(d.kappa_hat == doctest::Approx(0.25));
    CHECK(d.sigma2 == doctest::Approx(0.625));
    CHECK(code_of([&] { maximize_discrete(ds, {}, {}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { maximize_discrete(ds, {2.0, 1.0}, {}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { maximize_discrete(ds, {2.5, 3.0}, {}); }) == ErrorCode::NoEstimablePoint);
    CHECK(code_of([&] { maximize_continuous(ds, 2.5, 3.0, {}); }) == ErrorCode::NoEstimablePoint);
}

TEST_CASE("ties resolve to the smallest restriction time") {
    // Identical arms make every estimable grid value exactly zero.
    const auto ds = testing::identical_arms(100, 1);
    const auto d = maximize_discrete(ds, {0.5, 1.0, 1.5}, {});
    CHECK(d.index == 0);
}

TEST_CASE("grid helpers") {
    const auto g = uniform_grid(0.2, 4.2, 10);
    CHECK(g.size() == 10);
    CHECK(g[1] - g[0] == doctest::Approx(4.0 / 9));
    CHECK(g.back() == 4.2);
    CHECK(g[default_grid_center(10)] == doctest::Approx(1.977777778));
    CHECK(default_grid_center(1) == 0);
}

TEST_CASE("default penalty values") {
    CHECK(default_penalty(0.2, 4.2, TimeUnit::Years) == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(default_penalty(3, 53, TimeUnit::Months) == doctest::Approx(8.89e-8).epsilon(5e-4));
    CHECK(default_penalty(3, 53, TimeUnit::Months, PenaltyKind::Discrete) == doctest::Approx(2.22e-7).epsilon(5e-4));
    CHECK(default_penalty(0.2, 4.2, TimeUnit::Years, PenaltyKind::Discrete) == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("suggested grid sizes") {
    CHECK(suggest_grid_size(300) == std::pair<std::size_t, std::size_t>{5, 8});
    CHECK(suggest_grid_size(10000) == std::pair<std::size_t, std::size_t>{10, 20});
    CHECK(suggest_grid_size(16) == std::pair<std::size_t, std::size_t>{2, 4});
    CHECK(suggest_grid_size(81) == std::pair<std::size_t, std::size_t>{3, 6});
    CHECK(code_of([] { suggest_grid_size(15); }) == ErrorCode::TooFewSubjects);
}

TEST_CASE("profile CSV marks non-estimable points") {
    CriterionProfile p{{1.0, 2.0}, {0.5, -std::numeric_limits<double>::infinity()},
                       {0.4, -std::numeric_limits<double>::infinity()}, 0};
    std::ostringstream out;
    write_profile_csv(out, p);
    CHECK(out.str() == "L,M,M_penalized\n1,0.5,0.4\n2,-inf,-inf\n");
}
