#include "armst/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "armst/error.hpp"

namespace armst {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kRefineIterations = 60;
constexpr std::size_t kMinGridPoints = 1000;
constexpr std::size_t kGridPerEvent = 10;

double penalized(const KappaEvaluator& eval, double L, const PenaltyConfig& pen, double* unpenalized = nullptr) {
    const double m = criterion_of(eval.estimate(L));
    if (unpenalized) *unpenalized = m;
    return m == kNegInf ? kNegInf : m - pen(L);
}

void format_value(std::ostream& out, double v) {
    if (std::isinf(v)) {
        out << (v < 0 ? "-inf" : "inf");
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << buf;
}

}  // namespace

void write_profile_csv(std::ostream& out, const CriterionProfile& profile) {
    out << "L,M,M_penalized\n";
    for (std::size_t i = 0; i < profile.ls.size(); ++i) {
        format_value(out, profile.ls[i]);
        out << ',';
        format_value(out, profile.m_values[i]);
        out << ',';
        format_value(out, profile.m_pen_values[i]);
        out << '\n';
    }
}

double criterion_of(const RmstEstimate& est) {
    if (!est.estimable || !(est.sigma2 > 0.0)) return kNegInf;
    return est.kappa * est.kappa / est.sigma2;
}

double criterion_value(const KappaEvaluator& eval, double L, const PenaltyConfig& pen) {
    return penalized(eval, L, pen);
}

double criterion_value(const TrialDataset& ds, double L, const PenaltyConfig& pen) {
    if (L < 0.0 || L > max_estimable_time(ds)) return kNegInf;
    return criterion_value(KappaEvaluator(ds), L, pen);
}

ContinuousFit maximize_continuous(const KappaEvaluator& eval, double L_min, double L_max, const PenaltyConfig& pen,
                                  bool keep_profile) {
    if (!(L_min > 0.0) || !(L_max > L_min))
        throw Error(ErrorCode::InvalidArgument, "need 0 < L_min < L_max");
    const double hi = std::min(L_max, eval.max_estimable());
    if (hi < L_min)
        throw Error(ErrorCode::NoEstimablePoint,
                    "max estimable time " + std::to_string(eval.max_estimable()) + " is below L_min");

    const auto& events = eval.pooled_event_times();
    auto first = std::upper_bound(events.begin(), events.end(), L_min);
    auto last = std::lower_bound(first, events.end(), hi);
    const auto n_events = static_cast<std::size_t>(last - first);

    std::vector<double> candidates;
    if (hi == L_min) {
        candidates.push_back(L_min);
    } else {
        const std::size_t g = std::max(kMinGridPoints, kGridPerEvent * n_events);
        std::vector<double> grid = uniform_grid(L_min, hi, g);
        candidates.reserve(g + n_events);
        std::merge(grid.begin(), grid.end(), first, last, std::back_inserter(candidates));
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }

    std::vector<double> m_vals, pen_vals;
    if (keep_profile) {
        m_vals.reserve(candidates.size());
        pen_vals.reserve(candidates.size());
    }
    std::size_t best = 0;
    double best_value = kNegInf;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double raw = 0;
        const double v = penalized(eval, candidates[i], pen, &raw);
        if (keep_profile) {
            m_vals.push_back(raw);
            pen_vals.push_back(v);
        }
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    if (best_value == kNegInf)
        throw Error(ErrorCode::NoEstimablePoint, "criterion is -inf on the whole search range");

    ContinuousFit fit;
    fit.L_hat = candidates[best];
    fit.value = best_value;

    if (candidates.size() > 1) {
        double a = candidates[best == 0 ? 0 : best - 1];
        double b = candidates[std::min(best + 1, candidates.size() - 1)];
        for (int it = 0; it < kRefineIterations; ++it) {
            const double m1 = a + (b - a) / 3.0;
            const double m2 = b - (b - a) / 3.0;
            if (penalized(eval, m1, pen) < penalized(eval, m2, pen))
                a = m1;
            else
                b = m2;
        }
        const double x = 0.5 * (a + b);
        double raw = 0;
        const double v = penalized(eval, x, pen, &raw);
        if (v > best_value) {
            fit.L_hat = x;
            fit.value = v;
            if (keep_profile) {
                auto pos = std::lower_bound(candidates.begin(), candidates.end(), x) - candidates.begin();
                candidates.insert(candidates.begin() + pos, x);
                m_vals.insert(m_vals.begin() + pos, raw);
                pen_vals.insert(pen_vals.begin() + pos, v);
                best = static_cast<std::size_t>(pos);
            }
        }
    }
    fit.estimate = eval.estimate(fit.L_hat);
    if (keep_profile) {
        fit.profile.ls = std::move(candidates);
        fit.profile.m_values = std::move(m_vals);
        fit.profile.m_pen_values = std::move(pen_vals);
        fit.profile.argmax_index = best;
    }
    return fit;
}

ContinuousFit maximize_continuous(const TrialDataset& ds, double L_min, double L_max, const PenaltyConfig& pen,
                                  bool keep_profile) {
    return maximize_continuous(KappaEvaluator(ds), L_min, L_max, pen, keep_profile);
}

DiscreteFit maximize_discrete(const KappaEvaluator& eval, const std::vector<double>& grid, const PenaltyConfig& pen) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing");
    if (pen.c > 0.0) {
        const double tol = 1e-9 * std::max(1.0, std::abs(pen.l_tilde));
        bool on_grid = std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - pen.l_tilde) <= tol; });
        if (!on_grid) throw Error(ErrorCode::InvalidArgument, "l_tilde must be a grid point");
    }

    DiscreteFit fit;
    fit.profile.ls = grid;
    double best_value = kNegInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double raw = 0;
        const double v = penalized(eval, grid[i], pen, &raw);
        fit.profile.m_values.push_back(raw);
        fit.profile.m_pen_values.push_back(v);
        if (v > best_value) {
            best_value = v;
            fit.index = i;
        }
    }
    if (best_value == kNegInf) throw Error(ErrorCode::NoEstimablePoint, "criterion is -inf at every grid point");
    fit.profile.argmax_index = fit.index;
    fit.L_hat = grid[fit.index];
    fit.value = best_value;
    const auto est = eval.estimate(fit.L_hat);
    fit.kappa_hat = est.kappa;
    fit.sigma2 = est.sigma2;
    return fit;
}

DiscreteFit maximize_discrete(const TrialDataset& ds, const std::vector<double>& grid, const PenaltyConfig& pen) {
    return maximize_discrete(KappaEvaluator(ds), grid, pen);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t m) {
    if (m == 0) return {};
    if (m == 1) return {lo};
    std::vector<double> out(m);
    const double step = (hi - lo) / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

std::size_t default_grid_center(std::size_t m) { return m == 0 ? 0 : (m + 1) / 2 - 1; }

double default_penalty(double L_min, double L_max, TimeUnit unit, PenaltyKind kind) {
    if (!(L_max > L_min)) throw Error(ErrorCode::InvalidArgument, "need L_max > L_min");
    const double coef = kind == PenaltyKind::Continuous ? 0.002 : 0.005;
    const double width = L_max - L_min;
    const double u = unit_in_years(unit);
    return coef * 16.0 / (width * width) * u * u;
}

std::pair<std::size_t, std::size_t> suggest_grid_size(std::size_t n) {
    if (n < 16) throw Error(ErrorCode::TooFewSubjects, "grid-size rule needs n >= 16, got " + std::to_string(n));
    // Exact integer search: lo = min k with k^4 >= n, hi = max k with k^4 <= 16 n.
    auto pow4 = [](unsigned long long k) { return k * k * k * k; };
    unsigned long long lo = 1;
    while (pow4(lo) < n) ++lo;
    unsigned long long hi = lo;
    while (pow4(hi + 1) <= 16ULL * n) ++hi;
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

std::pair<double, double> default_range(const TrialDataset& ds) {
    std::vector<double> times;
    times.reserve(ds.n());
    for (const auto& r : ds.records()) times.push_back(r.time);
    std::sort(times.begin(), times.end());
    const double h = 0.05 * static_cast<double>(times.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(h));
    const double q = k + 1 < times.size() ? times[k] + (h - static_cast<double>(k)) * (times[k + 1] - times[k]) : times[k];
    return {q, max_estimable_time(ds)};
}

}  // namespace armst
