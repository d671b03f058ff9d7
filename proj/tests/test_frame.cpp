#include <doctest.h>

#include "dynabe/errors.hpp"
#include "dynabe/frame.hpp"
#include "dynabe/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace dynabe;

namespace {

Date d(int y, int m, int day) { return Date{static_cast<std::int16_t>(y),
                                            static_cast<std::int8_t>(m),
                                            static_cast<std::int8_t>(day)}; }

FeatureFrame simple_frame() {
    FeatureFrame f;
    f.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3), d(2020, 1, 6), d(2020, 1, 7)};
    f.names = {"close", "a", "b"};
    f.cols = {{10.0, 11.0, 10.5, 10.5, 12.0},
              {1.0, 2.0, 4.0, 7.0, 11.0},
              {5.0, 5.0, 6.0, 8.0, 8.0}};
    f.set_close("close");
    return f;
}

}  // namespace

TEST_CASE("column lookup and passthrough bookkeeping") {
    auto f = simple_frame();
    f.validate();
    CHECK(f.column_index("a") == 1);
    CHECK_THROWS_AS(f.column_index("missing"), SchemaError);
    CHECK(f.feature_names() == std::vector<std::string>{"a", "b"});
    CHECK(f.close() == f.column("close"));
    CHECK_FALSE(f.is_feature("close"));
}

TEST_CASE("align intersects calendars and forward-fills gaps") {
    FeatureFrame left;
    left.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3), d(2020, 1, 6)};
    left.names = {"close"};
    left.cols = {{10.0, 11.0, 12.0, 13.0}};
    left.set_close("close");

    FeatureFrame right;  // closed on Jan 3, open on Jan 4 which left lacks
    right.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 4), d(2020, 1, 6)};
    right.names = {"x"};
    right.cols = {{100.0, 101.0, 103.0, 106.0}};

    const auto joined = align_calendars({left, right});
    joined.validate();
    REQUIRE(joined.rows() == 3);
    CHECK(joined.dates == std::vector<Date>{d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 6)});
    CHECK(joined.column("close") == std::vector<double>{10.0, 11.0, 13.0});
    CHECK(joined.column("x") == std::vector<double>{100.0, 101.0, 106.0});
    CHECK(joined.close_name == "close");
}

TEST_CASE("align carries the last observation over missing cells") {
    FeatureFrame base;
    base.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3)};
    base.names = {"close"};
    base.cols = {{1.0, 2.0, 3.0}};
    base.set_close("close");

    FeatureFrame sparse;
    sparse.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3)};
    sparse.names = {"y"};
    const double nan = std::nan("");
    sparse.cols = {{7.0, nan, nan}};

    const auto joined = align_calendars({base, sparse});
    CHECK(joined.column("y") == std::vector<double>{7.0, 7.0, 7.0});
}

TEST_CASE("align drops rows before a late-starting series begins") {
    FeatureFrame base;
    base.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3)};
    base.names = {"close"};
    base.cols = {{1.0, 2.0, 3.0}};
    base.set_close("close");

    FeatureFrame late;
    late.dates = {d(2020, 1, 1), d(2020, 1, 2), d(2020, 1, 3)};
    late.names = {"z"};
    const double nan = std::nan("");
    late.cols = {{nan, 20.0, 30.0}};

    const auto joined = align_calendars({base, late});
    REQUIRE(joined.rows() == 2);
    CHECK(joined.dates.front() == d(2020, 1, 2));
    CHECK(joined.column("z") == std::vector<double>{20.0, 30.0});
}

TEST_CASE("align rejects duplicate columns and empty overlap") {
    auto f = simple_frame();
    CHECK_THROWS_AS(align_calendars({f, f}), SchemaError);

    FeatureFrame other;
    other.dates = {d(2021, 5, 1)};
    other.names = {"w"};
    other.cols = {{1.0}};
    CHECK_THROWS_AS(align_calendars({f, other}), AlignmentError);
}

TEST_CASE("first difference replaces values and drops one row") {
    const auto f = simple_frame();
    const auto out = first_difference(f, {"a"});
    REQUIRE(out.rows() == 4);
    CHECK(out.dates.front() == d(2020, 1, 2));
    CHECK(out.column("a") == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(out.column("b") == std::vector<double>{5.0, 6.0, 8.0, 8.0});
    CHECK(out.column("close") == std::vector<double>{11.0, 10.5, 10.5, 12.0});

    const auto untouched = first_difference(f, {});
    CHECK(untouched.rows() == f.rows());
    CHECK(untouched.column("a") == f.column("a"));

    CHECK_THROWS_AS(first_difference(f, {"close"}), SchemaError);
    CHECK_THROWS_AS(first_difference(f, {"nope"}), SchemaError);
}

TEST_CASE("lags emit grouped shifted columns and drop the window") {
    const auto f = simple_frame();
    const auto out = make_lags(f, 2);
    REQUIRE(out.rows() == 3);
    CHECK(out.dates.front() == d(2020, 1, 3));
    CHECK(out.names == std::vector<std::string>{"close", "a", "a_1", "a_2", "b", "b_1", "b_2"});
    CHECK(out.column("a") == std::vector<double>{4.0, 7.0, 11.0});
    CHECK(out.column("a_1") == std::vector<double>{2.0, 4.0, 7.0});
    CHECK(out.column("a_2") == std::vector<double>{1.0, 2.0, 4.0});
    CHECK(out.column("close") == std::vector<double>{10.5, 10.5, 12.0});
    CHECK_FALSE(out.is_feature("close"));

    CHECK_THROWS_AS(make_lags(f, 0), ParamError);
    CHECK_THROWS_AS(make_lags(f, 5), InsufficientDataError);
}

TEST_CASE("labels follow next-day close, flat counts as down") {
    const auto f = simple_frame();  // closes 10, 11, 10.5, 10.5, 12
    const auto labels = make_labels(f);
    labels.validate();
    REQUIRE(labels.size() == 4);
    CHECK(labels.labels == std::vector<int>{1, 0, 0, 1});
    CHECK(labels.dates.back() == d(2020, 1, 6));

    auto bad = simple_frame();
    bad.cols[0][2] = 0.0;
    CHECK_THROWS_AS(make_labels(bad), DataError);
}

TEST_CASE("standardize uses train statistics only and spares passthrough") {
    const auto f = simple_frame();
    const auto [out, stats] = standardize(f, 0, 3);  // train rows 0..2
    const auto& a = out.column("a");  // raw 1,2,4 in train: mean 7/3
    const double mean_a = (1.0 + 2.0 + 4.0) / 3.0;
    const double sd_a = std::sqrt(((1 - mean_a) * (1 - mean_a) + (2 - mean_a) * (2 - mean_a) +
                                   (4 - mean_a) * (4 - mean_a)) /
                                  2.0);
    CHECK(a[0] == doctest::Approx((1.0 - mean_a) / sd_a).epsilon(1e-12));
    CHECK(a[4] == doctest::Approx((11.0 - mean_a) / sd_a).epsilon(1e-12));
    CHECK(out.column("close") == f.column("close"));

    double train_sum = 0.0;
    for (int i = 0; i < 3; ++i) train_sum += a[static_cast<std::size_t>(i)];
    CHECK(train_sum == doctest::Approx(0.0).epsilon(1e-12));

    REQUIRE(stats.names.size() == 2);
    CHECK_FALSE(stats.degenerate[0]);
}

TEST_CASE("degenerate columns are zeroed and flagged") {
    auto f = simple_frame();
    f.cols[2] = {3.0, 3.0, 3.0, 5.0, 9.0};  // constant within train rows 0..2
    const auto [out, stats] = standardize(f, 0, 3);
    CHECK(out.column("b") == std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0});
    const std::size_t bi = stats.names[0] == "b" ? 0 : 1;
    CHECK(stats.degenerate[bi]);
}

TEST_CASE("split selects labeled rows by date range") {
    const auto f = simple_frame();
    const auto labels = make_labels(f);
    SplitSpec spec;
    spec.train_range = {d(2020, 1, 1), d(2020, 1, 3)};
    spec.valid_range = {d(2020, 1, 4), d(2020, 1, 31)};
    const auto idx = split(f, labels, spec);
    CHECK(idx.train_rows == std::vector<std::size_t>{0, 1, 2});
    CHECK(idx.valid_rows == std::vector<std::size_t>{3});

    SplitSpec overlapping;
    overlapping.train_range = {d(2020, 1, 1), d(2020, 1, 4)};
    overlapping.valid_range = {d(2020, 1, 3), d(2020, 1, 31)};
    CHECK_THROWS_AS(split(f, labels, overlapping), ParamError);
}

TEST_CASE("csv round trip preserves values exactly") {
    const auto path = std::filesystem::temp_directory_path() / "dynabe_frame_rt.csv";
    const std::vector<std::string> header = {"date", "close", "a"};
    std::vector<std::vector<std::string>> rows = {
        {"2020-03-02", format_double(10.125), format_double(0.1)},
        {"2020-03-03", format_double(1.0 / 3.0), format_double(-2.5e-7)},
    };
    write_csv(path.string(), header, rows);
    const auto frame = read_feature_csv(path.string());
    REQUIRE(frame.rows() == 2);
    CHECK(frame.column("close")[1] == 1.0 / 3.0);
    CHECK(frame.column("a")[1] == -2.5e-7);
    CHECK(frame.dates[0] == d(2020, 3, 2));
    std::filesystem::remove(path);
}

TEST_CASE("csv reader flags malformed cells with location") {
    const auto path = std::filesystem::temp_directory_path() / "dynabe_frame_bad.csv";
    write_text_file(path.string(), "date,close\n2020-01-01,abc\n");
    CHECK_THROWS_AS(read_feature_csv(path.string()), DataError);
    try {
        read_feature_csv(path.string());
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":2:") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("take_rows keeps alignment across dates labels and columns") {
    const auto f = simple_frame();
    const auto sub = f.take_rows({1, 3, 4});
    REQUIRE(sub.rows() == 3);
    CHECK(sub.dates == std::vector<Date>{d(2020, 1, 2), d(2020, 1, 6), d(2020, 1, 7)});
    CHECK(sub.column("a") == std::vector<double>{2.0, 7.0, 11.0});
}
