#include "armst/truth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "armst/error.hpp"

namespace armst {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-10;
constexpr std::size_t kTruthGrid = 2048;
constexpr int kTruthRefine = 100;

double piece_end(const std::vector<double>& cps, std::size_t i) { return i + 1 < cps.size() ? cps[i + 1] : kInf; }

// Variance integral for one arm, split at the distribution's change points.
double arm_variance(const PiecewiseExponential& d, double censor_rate, double L) {
    if (L <= 0.0) return 0.0;
    const double theta_L = d.rmst(L);
    auto f = [&](double v) {
        const double diff = theta_L - d.rmst(v);
        return diff * diff * d.hazard(v) / (d.survival(v) * std::exp(-censor_rate * v));
    };
    std::vector<double> knots{0.0};
    for (double cp : d.change_points())
        if (cp > 0.0 && cp < L) knots.push_back(cp);
    knots.push_back(L);

    double total = 0, total_err = 0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        double err = 0;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, knots[k], knots[k + 1], 15, kQuadTol, &err);
        total_err += err;
    }
    if (!std::isfinite(total) || total_err > 1e-8 * total + 1e-14)
        throw Error(ErrorCode::QuadratureFailure,
                    "variance integral did not converge on [0, " + std::to_string(L) + "]");
    return total;
}

double refine_max(const std::function<double(double)>& f, double a, double b, int iterations) {
    for (int it = 0; it < iterations; ++it) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (f(m1) < f(m2))
            a = m1;
        else
            b = m2;
    }
    return 0.5 * (a + b);
}

}  // namespace

PiecewiseExponential::PiecewiseExponential(std::vector<double> change_points, std::vector<double> rates)
    : change_points_(std::move(change_points)), rates_(std::move(rates)) {
    if (change_points_.empty() || change_points_.size() != rates_.size())
        throw Error(ErrorCode::InvalidArgument, "change points and rates must be nonempty and of equal length");
    if (change_points_.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "first change point must be 0");
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        if (!(rates_[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "rates must be positive");
        if (i > 0 && !(change_points_[i] > change_points_[i - 1]))
            throw Error(ErrorCode::InvalidArgument, "change points must be increasing");
    }
}

double PiecewiseExponential::cumulative_hazard(double t) const {
    double h = 0;
    for (std::size_t i = 0; i < rates_.size() && t > change_points_[i]; ++i)
        h += rates_[i] * (std::min(t, piece_end(change_points_, i)) - change_points_[i]);
    return h;
}

double PiecewiseExponential::survival(double t) const { return t <= 0.0 ? 1.0 : std::exp(-cumulative_hazard(t)); }

double PiecewiseExponential::hazard(double t) const {
    auto it = std::upper_bound(change_points_.begin(), change_points_.end(), t);
    const auto i = it == change_points_.begin() ? 0 : static_cast<std::size_t>(it - change_points_.begin()) - 1;
    return rates_[i];
}

double PiecewiseExponential::rmst(double L) const {
    double area = 0, h = 0;
    for (std::size_t i = 0; i < rates_.size() && L > change_points_[i]; ++i) {
        const double start = change_points_[i];
        const double width = std::min(L, piece_end(change_points_, i)) - start;
        area += std::exp(-h) * -std::expm1(-rates_[i] * width) / rates_[i];
        h += rates_[i] * width;
    }
    return area;
}

double PiecewiseExponential::sample(Rng& rng) const {
    const double e = -std::log(rng.uniform());
    double h = 0;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        const double end = piece_end(change_points_, i);
        const double piece = rates_[i] * (end - change_points_[i]);
        if (e <= h + piece) return change_points_[i] + (e - h) / rates_[i];
        h += piece;
    }
    return kInf;  // unreachable: the last piece is unbounded
}

const std::vector<ScenarioSpec>& scenarios() {
    static const std::vector<ScenarioSpec> table = [] {
        const PiecewiseExponential control({0.0}, {1.0});
        auto make = [&](const char* name, std::vector<double> rates, std::vector<double> cps) {
            return ScenarioSpec{name, PiecewiseExponential(std::move(cps), std::move(rates)), control};
        };
        return std::vector<ScenarioSpec>{
            make("null", {1.0}, {0.0}),
            make("ph", {0.75}, {0.0}),
            make("early", {0.65, 1.0}, {0.0, 0.5}),
            make("tran", {0.5, 1.5, 1.0}, {0.0, 0.6, 1.2}),
            make("cs", {0.5, 1.4}, {0.0, 0.5}),
            make("msep", {0.5, 1.1}, {0.0, 0.5}),
            make("delay_1", {1.0, 0.7}, {0.0, 0.2}),
            make("delay_2", {1.0, 0.7}, {0.0, 0.4}),
            make("delaycon", {1.0, 0.7, 1.2}, {0.0, 0.2, 1.0}),
        };
    }();
    return table;
}

std::size_t scenario_index(std::string_view name) {
    const auto& all = scenarios();
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].name == name) return i;
    throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + std::string(name) + "'");
}

const ScenarioSpec& find_scenario(std::string_view name) { return scenarios()[scenario_index(name)]; }

double pwexp_survival(const PiecewiseExponential& d, double t) { return d.survival(t); }
double pwexp_hazard(const PiecewiseExponential& d, double t) { return d.hazard(t); }
double pwexp_sample(const PiecewiseExponential& d, Rng& rng) { return d.sample(rng); }

double true_rmst(const PiecewiseExponential& d, double L) { return d.rmst(L); }

double true_kappa(const ScenarioSpec& s, double L) { return s.treatment.rmst(L) - s.control.rmst(L); }

double true_variance(const ScenarioSpec& s, double L) {
    if (L < 0.0 || !(L < s.admin_time))
        throw Error(ErrorCode::InvalidArgument, "true variance needs 0 <= L < administrative censoring time");
    return arm_variance(s.treatment, s.censor_rate, L) / s.beta +
           arm_variance(s.control, s.censor_rate, L) / (1.0 - s.beta);
}

double true_criterion(const ScenarioSpec& s, double L, const PenaltyConfig& pen) {
    const double v = true_variance(s, L);
    if (!(v > 0.0)) return -kInf;
    const double k = true_kappa(s, L);
    return k * k / v - pen(L);
}

TrueOptimum true_optimum(const ScenarioSpec& s, double L_min, double L_max, const PenaltyConfig& pen) {
    if (!(L_min > 0.0) || !(L_max > L_min)) throw Error(ErrorCode::InvalidArgument, "need 0 < L_min < L_max");
    const auto grid = uniform_grid(L_min, L_max, kTruthGrid);
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = true_criterion(s, grid[i], pen);
    const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());

    // A single peak has at most a couple of grid points within tolerance of
    // the maximum, and they are adjacent.
    const double tol = 1e-9 * std::max(1.0, std::abs(vals[best]));
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] >= vals[best] - tol) near.push_back(i);
    if (near.size() > 3 || near.back() - near.front() + 1 != near.size())
        throw Error(ErrorCode::NonUniqueMaximizer,
                    "criterion for scenario '" + s.name + "' has " + std::to_string(near.size()) + " near-maximal grid points");

    auto f = [&](double L) { return true_criterion(s, L, pen); };
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[std::min(best + 1, grid.size() - 1)];
    TrueOptimum out{grid[best], 0.0, vals[best]};
    const double x = refine_max(f, a, b, kTruthRefine);
    const double fx = f(x);
    if (fx > out.value) {
        out.L = x;
        out.value = fx;
    }
    out.kappa = true_kappa(s, out.L);
    return out;
}

TrueOptimum true_optimum_discrete(const ScenarioSpec& s, const std::vector<double>& grid, const PenaltyConfig& pen) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = true_criterion(s, grid[i], pen);
    const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    const double tol = 1e-9 * std::max(1.0, std::abs(vals[best]));
    const auto ties = std::count_if(vals.begin(), vals.end(), [&](double v) { return v >= vals[best] - tol; });
    if (ties > 1)
        throw Error(ErrorCode::NonUniqueMaximizer, "grid criterion for scenario '" + s.name + "' has tied maxima");
    return {grid[best], true_kappa(s, grid[best]), vals[best]};
}

void write_truth_curves(std::ostream& out, const ScenarioSpec& s, std::size_t points, const PenaltyConfig& pen,
                        double t_lo, double t_hi) {
    if (points < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 grid points");
    out << "t,S0,S1,h0,h1,kappa,M,M_pen\n";
    char buf[256];
    for (double t : uniform_grid(t_lo, t_hi, points)) {
        const double m = true_criterion(s, t, PenaltyConfig{});
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", t, s.control.survival(t),
                      s.treatment.survival(t), s.control.hazard(t), s.treatment.hazard(t), true_kappa(s, t), m, m - pen(t));
        out << buf;
    }
}

}  // namespace armst
