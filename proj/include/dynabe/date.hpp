#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace dynabe {

/// Calendar date. Ordering is lexicographic on (year, month, day); no
/// timezone or intraday notion, trading days are whatever the data carries.
struct Date {
    std::int16_t year = 1970;
    std::int8_t month = 1;
    std::int8_t day = 1;

    auto operator<=>(const Date&) const = default;

    /// "YYYY-MM-DD"
    std::string to_string() const;

    /// Parses "YYYY-MM-DD"; throws DataError on malformed or impossible dates.
    static Date parse(const std::string& text);

    static bool is_valid(int year, int month, int day);
};

/// Inclusive date interval.
struct DateRange {
    Date first;
    Date last;

    bool contains(const Date& d) const { return first <= d && d <= last; }
    bool overlaps(const DateRange& other) const {
        return !(last < other.first || other.last < first);
    }
};

}  // namespace dynabe
