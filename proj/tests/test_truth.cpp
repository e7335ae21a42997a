#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "armst/error.hpp"
#include "armst/rmst.hpp"
#include "armst/sim.hpp"
#include "armst/truth.hpp"

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

// Composite Simpson on each hazard piece.
double simpson_rmst(const PiecewiseExponential& d, double L) {
    std::vector<double> knots{0.0};
    for (double cp : d.change_points())
        if (cp > 0 && cp < L) knots.push_back(cp);
    knots.push_back(L);
    double total = 0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const int m = 2000;
        const double a = knots[k], h = (knots[k + 1] - a) / m;
        double s = d.survival(a) + d.survival(knots[k + 1]);
        for (int i = 1; i < m; ++i) s += (i % 2 ? 4 : 2) * d.survival(a + i * h);
        total += s * h / 3;
    }
    return total;
}

struct Frozen {
    const char* name;
    double L_star, kappa_star, L_ct, kappa_ct, L_dt, kappa_dt;
};

// Computed by an independent SciPy implementation (tests/oracles/truth_oracle.py).
constexpr Frozen kFrozen[] = {
    {"ph", 2.758537047, 0.228285348, 2.353116472, 0.200119567, 1.977778, 0.169202853},
    {"early", 0.673545885, 0.051892413, 0.853058328, 0.067916470, 1.533333, 0.108134530},
    {"tran", 0.680091394, 0.080841898, 0.696213616, 0.083204895, 0.644444, 0.075169395},
    {"cs", 0.578039985, 0.060970413, 0.594302523, 0.063147115, 0.644444, 0.069201114},
    {"msep", 0.630941526, 0.069462464, 0.664258121, 0.074086760, 0.644444, 0.071364112},
    {"delay_1", 3.594423949, 0.269689192, 2.595263931, 0.206801044, 2.422222, 0.192735685},
    {"delay_2", 4.2, 0.235293175, 2.633830651, 0.158596031, 2.422222, 0.143507870},
    {"delaycon", 1.266080287, 0.071250823, 1.585301541, 0.084324058, 1.533333, 0.082829349},
};

}  // namespace

TEST_CASE("scenario table") {
    CHECK(scenarios().size() == 9);
    const auto& tran = find_scenario("tran");
    CHECK(tran.treatment.rates() == std::vector<double>{0.5, 1.5, 1.0});
    CHECK(tran.treatment.change_points() == std::vector<double>{0.0, 0.6, 1.2});
    CHECK(tran.control.rates() == std::vector<double>{1.0});
    CHECK(tran.censor_rate == 0.5);
    CHECK(tran.admin_time == 5.0);
    CHECK(find_scenario("delaycon").treatment.rates() == std::vector<double>{1.0, 0.7, 1.2});
    CHECK(code_of([] { find_scenario("foo"); }) == ErrorCode::UnknownScenario);
}

TEST_CASE("closed-form survival and hazard") {
    const auto& tran = find_scenario("tran");
    CHECK(pwexp_survival(tran.treatment, 1.2) == doctest::Approx(std::exp(-1.2)).epsilon(1e-14));
    CHECK(pwexp_survival(tran.treatment, 1.2) == doctest::Approx(0.30119).epsilon(1e-5));
    CHECK(pwexp_survival(tran.control, 1.0) == doctest::Approx(0.36788).epsilon(1e-5));
    CHECK(pwexp_survival(tran.treatment, 0.0) == 1.0);
    CHECK(pwexp_hazard(tran.treatment, 0.6) == 1.5);
    CHECK(pwexp_hazard(tran.treatment, 0.59) == 0.5);
    CHECK(pwexp_hazard(tran.treatment, 10.0) == 1.0);
}

TEST_CASE("closed-form restricted means") {
    CHECK(true_rmst(find_scenario("null").control, 1.0) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-14));
    const double ph = (1 - std::exp(-3.15)) / 0.75 - (1 - std::exp(-4.2));
    CHECK(true_kappa(find_scenario("ph"), 4.2) == doctest::Approx(ph).epsilon(1e-14));
    CHECK(true_kappa(find_scenario("ph"), 4.2) == doctest::Approx(0.29120).epsilon(1e-4));
    for (double L : {0.3, 1.0, 3.0}) CHECK(true_kappa(find_scenario("null"), L) == 0.0);
    for (const auto& s : scenarios())
        for (double L : {0.1, 0.6, 1.25, 2.0, 4.2})
            CHECK(std::abs(true_rmst(s.treatment, L) - simpson_rmst(s.treatment, L)) < 1e-10);
}

TEST_CASE("sampling matches the survival function") {
    for (const auto& s : scenarios()) {
        Rng rng(100 + scenario_index(s.name));
        const int draws = 100000;
        int above[3] = {0, 0, 0};
        const double ts[3] = {0.5, 1.0, 2.0};
        for (int i = 0; i < draws; ++i) {
            const double x = pwexp_sample(s.treatment, rng);
            for (int k = 0; k < 3; ++k) above[k] += x > ts[k];
        }
        for (int k = 0; k < 3; ++k) {
            const double p = pwexp_survival(s.treatment, ts[k]);
            const double se = std::sqrt(p * (1 - p) / draws);
            CHECK(std::abs(above[k] / double(draws) - p) < 3 * se);
        }
    }
}

TEST_CASE("true variance: frozen values, limits, monotonicity") {
    CHECK(true_variance(find_scenario("null"), 1.0) == doctest::Approx(0.5858562295759306).epsilon(1e-9));
    CHECK(true_variance(find_scenario("ph"), 4.2) == doctest::Approx(7.21449667688969).epsilon(1e-9));
    CHECK(true_variance(find_scenario("tran"), 2.0) == doctest::Approx(2.105248090303931).epsilon(1e-9));
    CHECK(true_variance(find_scenario("null"), 1e-6) < 1e-15);
    CHECK(true_variance(find_scenario("null"), 0.0) == 0.0);
    for (const auto& s : scenarios()) {
        double prev = 0;
        for (double L = 0.05; L <= 4.2 + 1e-12; L += 0.05) {
            const double v = true_variance(s, L);
            CHECK(v > prev);
            prev = v;
        }
    }
    CHECK(code_of([] { true_variance(find_scenario("null"), 5.0); }) == ErrorCode::InvalidArgument);
    CHECK(true_criterion(find_scenario("tran"), 1.0, {}) == doctest::Approx(0.02332692565903163).epsilon(1e-9));
}

TEST_CASE("true variance matches the Monte Carlo variance of the estimator") {
    const auto& s = find_scenario("null");
    const std::size_t n = 2000, reps = 4000;
    double sum = 0, sum_sq = 0;
    for (std::size_t k = 0; k < reps; ++k) {
        const auto ds = generate_trial(s, n, 9000 + k);
        const double kap = kappa_hat(ds, 1.0).kappa;
        sum += kap;
        sum_sq += kap * kap;
    }
    const double mean = sum / reps;
    const double var = (sum_sq - reps * mean * mean) / (reps - 1);
    CHECK(n * var == doctest::Approx(true_variance(s, 1.0)).epsilon(0.05));
}

TEST_CASE("true optima match the independent oracle") {
    const PenaltyConfig ct{0.002, 2.2};
    const auto grid = uniform_grid(0.2, 4.2, 10);
    const PenaltyConfig dt{0.005, grid[4]};
    for (const auto& f : kFrozen) {
        CAPTURE(f.name);
        const auto& s = find_scenario(f.name);
        const auto star = true_optimum(s, 0.2, 4.2, {});
        CHECK(star.L == doctest::Approx(f.L_star).epsilon(1e-6));
        CHECK(star.kappa == doctest::Approx(f.kappa_star).epsilon(1e-7));
        const auto dag = true_optimum(s, 0.2, 4.2, ct);
        CHECK(dag.L == doctest::Approx(f.L_ct).epsilon(1e-6));
        CHECK(dag.kappa == doctest::Approx(f.kappa_ct).epsilon(1e-7));
        const auto disc = true_optimum_discrete(s, grid, dt);
        CHECK(disc.L == doctest::Approx(f.L_dt).epsilon(1e-6));
        CHECK(disc.kappa == doctest::Approx(f.kappa_dt).epsilon(1e-7));
    }
}

TEST_CASE("null scenario: penalty makes the target the unique optimum") {
    const auto& s = find_scenario("null");
    const auto dag = true_optimum(s, 0.2, 4.2, {0.002, 2.2});
    CHECK(dag.L == doctest::Approx(2.2).epsilon(1e-9));
    CHECK(dag.kappa == 0.0);
    CHECK(code_of([&] { true_optimum(s, 0.2, 4.2, {}); }) == ErrorCode::NonUniqueMaximizer);
    CHECK(code_of([&] { true_optimum_discrete(s, uniform_grid(0.2, 4.2, 10), {}); }) ==
          ErrorCode::NonUniqueMaximizer);
}

TEST_CASE("truth curves CSV") {
    std::ostringstream out;
    write_truth_curves(out, find_scenario("tran"), 420, {});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,S0,S1,h0,h1,kappa,M,M_pen");
    double best_gap = 1e9, s1_near = 0;
    while (std::getline(in, line)) {
        double t, s0, s1;
        std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &s0, &s1);
        if (std::abs(t - 1.2) < best_gap) {
            best_gap = std::abs(t - 1.2);
            s1_near = s1;
        }
    }
    CHECK(best_gap < 1e-9);
    CHECK(s1_near == doctest::Approx(0.30119).epsilon(1e-5));
}

TEST_CASE("criterion column peaks at the unpenalized optimum") {
    std::ostringstream out;
    const auto& ph = find_scenario("ph");
    write_truth_curves(out, ph, 420, {});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    double best_t = 0, best_m = -1;
    while (std::getline(in, line)) {
        double v[8];
        std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7]);
        if (v[6] > best_m) {
            best_m = v[6];
            best_t = v[0];
        }
    }
    CHECK(std::abs(best_t - true_optimum(ph, 0.2, 4.2, {}).L) < 0.01);
}

TEST_CASE("null scenario events: about one third censored") {
    const auto ds = generate_trial(find_scenario("null"), 100000, 3);
    double events = 0;
    for (const auto& r : ds.records()) events += r.event;
    CHECK(std::abs(events / 100000.0 - (1 - std::exp(-7.5)) / 1.5) < 0.01);
}
