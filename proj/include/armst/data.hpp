#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace armst {

enum class TimeUnit { Years, Months, Days };

std::string_view to_string(TimeUnit unit);
std::optional<TimeUnit> parse_time_unit(std::string_view text);
// Length of one unit expressed in years (1/12 for months, 1/365.25 for days).
double unit_in_years(TimeUnit unit);

struct SubjectRecord {
    int arm = 0;       // 0 control, 1 treatment
    double time = 0;   // follow-up time, > 0
    int event = 0;     // 1 event observed, 0 censored

    friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

// Per-arm view of the data sorted by follow-up time. `index` maps back to the
// position in TrialDataset::records().
struct ArmView {
    std::vector<double> times;
    std::vector<std::uint8_t> events;
    std::vector<std::size_t> index;

    std::size_t size() const { return times.size(); }
    double max_time() const { return times.empty() ? 0.0 : times.back(); }
};

// Validated two-arm right-censored trial. Immutable after construction.
class TrialDataset {
public:
    // Throws Error on invalid records or when an arm has fewer than two subjects.
    explicit TrialDataset(std::vector<SubjectRecord> records, TimeUnit unit = TimeUnit::Years);

    const std::vector<SubjectRecord>& records() const { return records_; }
    std::size_t n() const { return records_.size(); }
    std::size_t n1() const { return arms_[1].size(); }
    std::size_t n0() const { return arms_[0].size(); }
    TimeUnit time_unit() const { return unit_; }
    const ArmView& arm(int a) const { return arms_[a]; }

    // Subset by record positions (used for folds). Validates like the constructor.
    TrialDataset subset(std::span<const std::size_t> positions) const;

    friend bool operator==(const TrialDataset& a, const TrialDataset& b) {
        return a.unit_ == b.unit_ && a.records_ == b.records_;
    }

private:
    std::vector<SubjectRecord> records_;
    TimeUnit unit_;
    ArmView arms_[2];
};

// Parses CSV with header `arm,time,event`. Row order is preserved.
TrialDataset parse_dataset(std::istream& in, TimeUnit unit = TimeUnit::Years);
TrialDataset parse_dataset(std::string_view text, TimeUnit unit = TimeUnit::Years);
TrialDataset load_dataset(const std::string& path, TimeUnit unit = TimeUnit::Years);

void write_dataset(std::ostream& out, const TrialDataset& ds);
std::string to_csv(const TrialDataset& ds);

// Largest L at which both arms' Kaplan-Meier curves are defined.
double max_estimable_time(const TrialDataset& ds);

}  // namespace armst
