#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "armst/data.hpp"
#include "armst/rng.hpp"

namespace armst::testing {

// Two subjects per arm: control (1, event), (2, censored); treatment (1.5, event), (2, censored).
inline TrialDataset toy_dataset() {
    return TrialDataset({{0, 1.0, 1}, {0, 2.0, 0}, {1, 1.5, 1}, {1, 2.0, 0}});
}

// Same records in both arms.
inline TrialDataset identical_arms(std::size_t per_arm, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SubjectRecord> recs;
    for (std::size_t i = 0; i < per_arm; ++i) {
        const double t = rng.exponential(1.0);
        const double c = rng.exponential(0.5);
        const double x = std::min(t, c);
        const int e = t <= c;
        recs.push_back({0, x, e});
        recs.push_back({1, x, e});
    }
    return TrialDataset(std::move(recs));
}

// Small random dataset with heavy ties: times drawn from a handful of values.
inline TrialDataset random_tied_dataset(Rng& rng, std::size_t n, int distinct_times = 6) {
    std::vector<SubjectRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
        const int arm = i < 2 ? 0 : (i < 4 ? 1 : static_cast<int>(rng.index(2)));
        const double t = 0.5 * static_cast<double>(1 + rng.index(static_cast<std::size_t>(distinct_times)));
        recs.push_back({arm, t, rng.uniform() < 0.7 ? 1 : 0});
    }
    return TrialDataset(std::move(recs));
}

// Exponential event and censoring times with rates depending on the arm.
inline TrialDataset random_exponential_dataset(Rng& rng, std::size_t n, double rate0 = 1.0, double rate1 = 0.75,
                                               double censor_rate = 0.5) {
    std::vector<SubjectRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
        const int arm = static_cast<int>(i % 2);
        const double t = rng.exponential(arm ? rate1 : rate0);
        const double c = rng.exponential(censor_rate);
        recs.push_back({arm, std::min(t, c), t <= c ? 1 : 0});
    }
    return TrialDataset(std::move(recs));
}

}  // namespace armst::testing
