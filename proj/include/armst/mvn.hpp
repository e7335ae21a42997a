#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace armst {

using Matrix = std::vector<std::vector<double>>;

// Lower Cholesky factor; nullopt when a pivot falls below `min_pivot`.
std::optional<Matrix> cholesky(const Matrix& a, double min_pivot = 1e-10);

struct MvnProbability {
    double value = 0;
    double error = 0;  // three standard errors across the randomized lattice shifts
};

// P(lower <= Z <= upper) for Z ~ N(0, corr), by Genz's separation of variables
// on a Richtmyer lattice with fixed shifts and antithetic pairs, so the result
// is deterministic. `points` is the total number of integrand evaluations.
// A singular (positive semidefinite) corr is handled by folding each dependent
// component's limits into the variable it is a combination of. Returns nullopt
// when corr is not positive semidefinite.
std::optional<MvnProbability> mvn_rectangle(const Matrix& corr, std::span<const double> lower,
                                            std::span<const double> upper, std::size_t points = 1u << 16);

}  // namespace armst
