#include "armst/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "armst/error.hpp"

namespace armst {

std::string_view to_string(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Years: return "years";
        case TimeUnit::Months: return "months";
        case TimeUnit::Days: return "days";
    }
    return "years";
}

std::optional<TimeUnit> parse_time_unit(std::string_view text) {
    if (text == "years") return TimeUnit::Years;
    if (text == "months") return TimeUnit::Months;
    if (text == "days") return TimeUnit::Days;
    return std::nullopt;
}

double unit_in_years(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Years: return 1.0;
        case TimeUnit::Months: return 1.0 / 12.0;
        case TimeUnit::Days: return 1.0 / 365.25;
    }
    return 1.0;
}

namespace {

ArmView build_arm(const std::vector<SubjectRecord>& records, int a) {
    ArmView view;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].arm == a) view.index.push_back(i);
    std::stable_sort(view.index.begin(), view.index.end(),
                     [&](std::size_t x, std::size_t y) { return records[x].time < records[y].time; });
    view.times.reserve(view.index.size());
    view.events.reserve(view.index.size());
    for (std::size_t i : view.index) {
        view.times.push_back(records[i].time);
        view.events.push_back(static_cast<std::uint8_t>(records[i].event));
    }
    return view;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

SubjectRecord parse_row(std::string_view line, std::size_t line_no) {
    std::string_view fields[3];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (count == 3) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected 3 fields", line_no);
        fields[count++] = field;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (count != 3) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected 3 fields", line_no);

    auto arm = parse_number(fields[0]);
    auto time = parse_number(fields[1]);
    auto event = parse_number(fields[2]);
    if (!arm || !time || !event || !std::isfinite(*time))
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": unparseable field", line_no);
    if (*arm != 0.0 && *arm != 1.0)
        throw Error(ErrorCode::InvalidArm, "line " + std::to_string(line_no) + ": arm must be 0 or 1", line_no);
    if (*event != 0.0 && *event != 1.0)
        throw Error(ErrorCode::InvalidEvent, "line " + std::to_string(line_no) + ": event must be 0 or 1", line_no);
    if (!(*time > 0.0))
        throw Error(ErrorCode::NonPositiveTime, "line " + std::to_string(line_no) + ": time must be positive", line_no);
    return SubjectRecord{static_cast<int>(*arm), *time, static_cast<int>(*event)};
}

}  // namespace

TrialDataset::TrialDataset(std::vector<SubjectRecord> records, TimeUnit unit)
    : records_(std::move(records)), unit_(unit) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.arm != 0 && r.arm != 1)
            throw Error(ErrorCode::InvalidArm, "record " + std::to_string(i) + ": arm must be 0 or 1");
        if (r.event != 0 && r.event != 1)
            throw Error(ErrorCode::InvalidEvent, "record " + std::to_string(i) + ": event must be 0 or 1");
        if (!(r.time > 0.0) || !std::isfinite(r.time))
            throw Error(ErrorCode::NonPositiveTime, "record " + std::to_string(i) + ": time must be positive and finite");
    }
    arms_[0] = build_arm(records_, 0);
    arms_[1] = build_arm(records_, 1);
    if (arms_[0].size() < 2 || arms_[1].size() < 2)
        throw Error(ErrorCode::ArmMissing, "each arm needs at least 2 subjects (n0=" + std::to_string(arms_[0].size()) +
                                               ", n1=" + std::to_string(arms_[1].size()) + ")");
}

TrialDataset TrialDataset::subset(std::span<const std::size_t> positions) const {
    std::vector<SubjectRecord> rows;
    rows.reserve(positions.size());
    for (std::size_t p : positions) rows.push_back(records_.at(p));
    return TrialDataset(std::move(rows), unit_);
}

TrialDataset parse_dataset(std::istream& in, TimeUnit unit) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<SubjectRecord> rows;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (!have_header) {
            if (line_no == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
            std::string header;
            for (char ch : view)
                if (ch != ' ' && ch != '\t') header.push_back(ch);
            if (header != "arm,time,event")
                throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected header `arm,time,event`", line_no);
            have_header = true;
            continue;
        }
        if (view.empty()) continue;
        rows.push_back(parse_row(view, line_no));
    }
    if (!have_header) throw Error(ErrorCode::MalformedRow, "missing header `arm,time,event`", 1);
    return TrialDataset(std::move(rows), unit);
}

TrialDataset parse_dataset(std::string_view text, TimeUnit unit) {
    std::istringstream in{std::string(text)};
    return parse_dataset(in, unit);
}

TrialDataset load_dataset(const std::string& path, TimeUnit unit) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open input file '" + path + "'");
    return parse_dataset(in, unit);
}

void write_dataset(std::ostream& out, const TrialDataset& ds) {
    out << "arm,time,event\n";
    char buf[64];
    for (const auto& r : ds.records()) {
        auto res = std::to_chars(buf, buf + sizeof buf, r.time);
        out << r.arm << ',' << std::string_view(buf, res.ptr - buf) << ',' << r.event << '\n';
    }
}

std::string to_csv(const TrialDataset& ds) {
    std::ostringstream out;
    write_dataset(out, ds);
    return out.str();
}

double max_estimable_time(const TrialDataset& ds) {
    return std::min(ds.arm(0).max_time(), ds.arm(1).max_time());
}

}  // namespace armst
