#include "armst/mvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "armst/rng.hpp"

namespace armst {

namespace {

constexpr std::size_t kShifts = 8;
constexpr std::uint64_t kLatticeSeed = 0x6d766e;
constexpr double kMinLoading = 1e-12;

double phi_cdf(double x) {
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return 0.5 * boost::math::erfc(-x / std::sqrt(2.0));
}

double phi_inv(double p) {
    constexpr double eps = 1e-300;
    p = std::min(std::max(p, eps), 1.0 - 1e-16);
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

// Cholesky factor of a positive semidefinite matrix. A pivot at or below `tol`
// marks a column as dependent and it is left zero.
std::optional<Matrix> semidefinite_factor(const Matrix& a, double tol = 1e-9) {
    const std::size_t d = a.size();
    Matrix l(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (s < -tol) return std::nullopt;
                l[i][i] = s > tol ? std::sqrt(s) : 0.0;
            } else {
                l[i][j] = l[j][j] > 0.0 ? s / l[j][j] : 0.0;
            }
        }
    }
    return l;
}

}  // namespace

std::optional<Matrix> cholesky(const Matrix& a, double min_pivot) {
    const std::size_t d = a.size();
    Matrix l(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (!(s > min_pivot)) return std::nullopt;
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    return l;
}

std::optional<MvnProbability> mvn_rectangle(const Matrix& corr, std::span<const double> lower,
                                            std::span<const double> upper, std::size_t points) {
    const std::size_t d = corr.size();
    const auto factor = semidefinite_factor(corr);
    if (!factor) return std::nullopt;
    const Matrix& c = *factor;

    // Each row constrains the last independent variable it loads on. Rows of a
    // rank-deficient matrix have no pivot of their own, so their limits are
    // intersected with those of an earlier variable.
    std::vector<std::size_t> active;
    std::vector<std::vector<std::size_t>> owned(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (c[i][i] > 0.0) {
            active.push_back(i);
            owned[i].push_back(i);
            continue;
        }
        std::size_t owner = d;
        for (std::size_t j = i; j-- > 0;)
            if (c[j][j] > 0.0 && std::abs(c[i][j]) > kMinLoading) {
                owner = j;
                break;
            }
        if (owner == d) {
            // Zero-variance component: the constraint holds everywhere or nowhere.
            if (lower[i] > 0.0 || upper[i] < 0.0) return MvnProbability{0.0, 0.0};
            continue;
        }
        owned[owner].push_back(i);
    }
    const std::size_t dim = active.size();

    static constexpr double kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::vector<double> gen(dim > 1 ? dim - 1 : 0);
    for (std::size_t i = 0; i < gen.size(); ++i) gen[i] = std::sqrt(kPrimes[i % 12]);

    auto integrand = [&](const std::vector<double>& w) {
        std::vector<double> y(d, 0.0);
        double prob = 1.0;
        for (std::size_t a = 0; a < dim; ++a) {
            const std::size_t j = active[a];
            double lo_z = -std::numeric_limits<double>::infinity();
            double hi_z = std::numeric_limits<double>::infinity();
            for (std::size_t i : owned[j]) {
                double s = 0;
                for (std::size_t k = 0; k < j; ++k) s += c[i][k] * y[k];
                double l = (lower[i] - s) / c[i][j], u = (upper[i] - s) / c[i][j];
                if (c[i][j] < 0) std::swap(l, u);
                lo_z = std::max(lo_z, l);
                hi_z = std::min(hi_z, u);
            }
            if (!(hi_z > lo_z)) return 0.0;
            const double lo = phi_cdf(lo_z);
            const double width = phi_cdf(hi_z) - lo;
            if (width <= 0.0) return 0.0;
            prob *= width;
            if (a + 1 < dim) y[j] = phi_inv(lo + w[a] * width);
        }
        return prob;
    };

    Rng rng(kLatticeSeed);
    const std::size_t per_shift = std::max<std::size_t>(1, points / (2 * kShifts));
    std::vector<double> means(kShifts, 0.0);
    std::vector<double> w(gen.size()), w_anti(gen.size());
    for (std::size_t s = 0; s < kShifts; ++s) {
        std::vector<double> shift(gen.size());
        for (auto& v : shift) v = rng.uniform();
        double acc = 0;
        for (std::size_t k = 1; k <= per_shift; ++k) {
            for (std::size_t i = 0; i < gen.size(); ++i) {
                double x = static_cast<double>(k) * gen[i] + shift[i];
                x -= std::floor(x);
                // baker's (tent) transform keeps the lattice rule accurate for non-periodic integrands
                w[i] = std::abs(2.0 * x - 1.0);
                w_anti[i] = 1.0 - w[i];
            }
            acc += 0.5 * (integrand(w) + integrand(w_anti));
        }
        means[s] = acc / static_cast<double>(per_shift);
    }
    double mean = 0;
    for (double m : means) mean += m;
    mean /= kShifts;
    double var = 0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(kShifts * (kShifts - 1));
    return MvnProbability{std::min(1.0, std::max(0.0, mean)), 3.0 * std::sqrt(var)};
}

}  // namespace armst
