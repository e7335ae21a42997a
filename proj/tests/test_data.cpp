#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "armst/data.hpp"
#include "armst/error.hpp"
#include "support.hpp"

using namespace armst;

namespace {

ErrorCode code_of(std::string_view csv) {
    try {
        parse_dataset(csv);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::Io;
}

std::optional<std::size_t> line_of(std::string_view csv) {
    try {
        parse_dataset(csv);
    } catch (const Error& e) {
        return e.line();
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("four-row dataset parses with arm counts") {
    const auto ds = parse_dataset("arm,time,event\n0,1.0,1\n0,2.0,0\n1,1.5,1\n1,2.0,0");
    CHECK(ds.n() == 4);
    CHECK(ds.n1() == 2);
    CHECK(ds.n0() == 2);
    CHECK(ds.records()[2] == SubjectRecord{1, 1.5, 1});
    CHECK(max_estimable_time(ds) == 2.0);
}

TEST_CASE("invalid rows are rejected with their line number") {
    const std::string head = "arm,time,event\n0,1,1\n0,2,0\n1,1,1\n1,2,0\n";
    CHECK(code_of(head + "0,-1.0,1\n") == ErrorCode::NonPositiveTime);
    CHECK(code_of(head + "0,0,1\n") == ErrorCode::NonPositiveTime);
    CHECK(code_of(head + "2,1.0,1\n") == ErrorCode::InvalidArm);
    CHECK(code_of(head + "1,1.0,3\n") == ErrorCode::InvalidEvent);
    CHECK(code_of(head + "1,abc,1\n") == ErrorCode::MalformedRow);
    CHECK(code_of(head + "1,1.0\n") == ErrorCode::MalformedRow);
    CHECK(code_of(head + "1,1.0,1,7\n") == ErrorCode::MalformedRow);
    CHECK(code_of("time,arm,event\n0,1,1\n") == ErrorCode::MalformedRow);
    CHECK(line_of(head + "0,-1.0,1\n") == 6);
}

TEST_CASE("an arm with fewer than two subjects is missing") {
    CHECK(code_of("arm,time,event\n0,1,1\n0,2,0\n1,1,1\n") == ErrorCode::ArmMissing);
    CHECK(code_of("arm,time,event\n0,1,1\n0,2,0\n") == ErrorCode::ArmMissing);
}

TEST_CASE("blank lines, CRLF and a byte order mark are tolerated") {
    const auto ds = parse_dataset("\xEF\xBB\xBF" "arm,time,event\r\n0,1,1\r\n\r\n0,2,0\r\n1,1.5,1\r\n1,2,0\r\n");
    CHECK(ds == testing::toy_dataset());
}

TEST_CASE("max estimable time is the smaller arm maximum") {
    const TrialDataset a({{0, 4.8, 1}, {0, 1.0, 0}, {1, 3.9, 0}, {1, 2.0, 1}});
    CHECK(max_estimable_time(a) == 3.9);
    const TrialDataset b({{0, 5.0, 0}, {0, 1.0, 1}, {1, 5.0, 0}, {1, 1.0, 1}});
    CHECK(max_estimable_time(b) == 5.0);
}

TEST_CASE("CSV output round-trips exactly") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto ds = testing::random_exponential_dataset(rng, 30);
        CHECK(parse_dataset(to_csv(ds)) == ds);
    }
}

TEST_CASE("arm views are sorted and index back into the records") {
    Rng rng(3);
    const auto ds = testing::random_exponential_dataset(rng, 41);
    for (int a = 0; a < 2; ++a) {
        const auto& v = ds.arm(a);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& r = ds.records()[v.index[i]];
            CHECK(r.arm == a);
            CHECK(r.time == v.times[i]);
            CHECK(r.event == v.events[i]);
            if (i > 0) CHECK(v.times[i - 1] <= v.times[i]);
        }
    }
}

TEST_CASE("missing input file reports the path") {
    try {
        load_dataset("/nonexistent/dir/trial.csv");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
        CHECK(std::string(e.what()).find("/nonexistent/dir/trial.csv") != std::string::npos);
        CHECK(is_data_error(e.code()));
    }
}

TEST_CASE("time units") {
    CHECK(parse_time_unit("months") == TimeUnit::Months);
    CHECK(!parse_time_unit("weeks"));
    CHECK(unit_in_years(TimeUnit::Months) == doctest::Approx(1.0 / 12));
}
