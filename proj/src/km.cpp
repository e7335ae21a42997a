#include "armst/km.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "armst/error.hpp"

namespace armst {

SurvivalCurve fit_km_sorted(std::span<const double> times, std::span<const std::uint8_t> events,
                            std::span<const std::uint32_t> counts) {
    const std::size_t m = times.size();
    auto weight = [&](std::size_t i) -> std::int64_t { return counts.empty() ? 1 : counts[i]; };

    SurvivalCurve curve;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < m; ++i) {
        std::int64_t w = weight(i);
        total += w;
        if (w > 0) curve.max_follow_up = std::max(curve.max_follow_up, times[i]);
    }
    if (total == 0) throw Error(ErrorCode::EmptyArm, "no records in arm");
    curve.n_arm = total;

    std::int64_t at_risk = total;
    double surv = 1.0;
    std::size_t i = 0;
    while (i < m) {
        const double t = times[i];
        std::int64_t d = 0;
        std::int64_t leaving = 0;
        for (; i < m && times[i] == t; ++i) {
            std::int64_t w = weight(i);
            leaving += w;
            if (events[i]) d += w;
        }
        if (d > 0) {
            surv = (d == at_risk) ? 0.0 : surv * (1.0 - static_cast<double>(d) / static_cast<double>(at_risk));
            curve.event_times.push_back(t);
            curve.deaths.push_back(d);
            curve.at_risk.push_back(at_risk);
            curve.survival.push_back(surv);
        }
        at_risk -= leaving;
    }
    return curve;
}

SurvivalCurve fit_km(std::span<const Observation> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyArm, "no records in arm");
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return records[a].time < records[b].time; });
    std::vector<double> times;
    std::vector<std::uint8_t> events;
    times.reserve(order.size());
    events.reserve(order.size());
    for (std::size_t k : order) {
        if (!(records[k].time > 0.0)) throw Error(ErrorCode::NonPositiveTime, "time must be positive");
        times.push_back(records[k].time);
        events.push_back(records[k].event ? 1 : 0);
    }
    return fit_km_sorted(times, events);
}

SurvivalCurve fit_km(const ArmView& arm) { return fit_km_sorted(arm.times, arm.events); }

double survival_at(const SurvivalCurve& curve, double t) {
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "negative time");
    if (t > curve.max_follow_up)
        throw Error(ErrorCode::BeyondFollowUp, "t=" + std::to_string(t) + " exceeds max follow-up " +
                                                   std::to_string(curve.max_follow_up));
    auto it = std::upper_bound(curve.event_times.begin(), curve.event_times.end(), t);
    if (it == curve.event_times.begin()) return 1.0;
    return curve.survival[static_cast<std::size_t>(it - curve.event_times.begin()) - 1];
}

}  // namespace armst
