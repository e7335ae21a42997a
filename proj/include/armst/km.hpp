#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "armst/data.hpp"

namespace armst {

struct Observation {
    double time = 0;
    int event = 0;
};

// Kaplan-Meier product-limit estimate for one arm, stored at event times only.
// The risk set at t counts subjects with X >= t, so a subject censored at an
// event time is still at risk for that event.
struct SurvivalCurve {
    std::vector<double> event_times;     // strictly increasing
    std::vector<std::int64_t> deaths;    // d_j >= 1
    std::vector<std::int64_t> at_risk;   // Y(T_j) >= d_j
    std::vector<double> survival;        // S(T_j)
    double max_follow_up = 0;
    std::int64_t n_arm = 0;

    std::size_t size() const { return event_times.size(); }
};

// Throws Error(EmptyArm) when there are no records.
SurvivalCurve fit_km(std::span<const Observation> records);
SurvivalCurve fit_km(const ArmView& arm);

// `times` must be ascending. `counts` holds per-row multiplicities (empty means
// all ones); rows with count 0 are ignored. Used for bootstrap resamples and folds.
SurvivalCurve fit_km_sorted(std::span<const double> times, std::span<const std::uint8_t> events,
                            std::span<const std::uint32_t> counts = {});

// Right-continuous step evaluation. Throws BeyondFollowUp for t > max_follow_up.
double survival_at(const SurvivalCurve& curve, double t);

}  // namespace armst
