#include "dynabe/date.hpp"

#include <array>
#include <cstdio>

#include "dynabe/errors.hpp"

namespace dynabe {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30,
                                              31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[static_cast<std::size_t>(m - 1)];
}

}  // namespace

bool Date::is_valid(int year, int month, int day) {
    if (year < 1 || year > 9999) return false;
    if (month < 1 || month > 12) return false;
    return day >= 1 && day <= days_in_month(year, month);
}

std::string Date::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(year),
                  static_cast<int>(month), static_cast<int>(day));
    return buf;
}

Date Date::parse(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char trailing = '\0';
    const int got =
        std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &trailing);
    if (got != 3 || !is_valid(y, m, d)) {
        throw DataError("malformed ISO-8601 date: '" + text + "'");
    }
    return Date{static_cast<std::int16_t>(y), static_cast<std::int8_t>(m),
                static_cast<std::int8_t>(d)};
}

}  // namespace dynabe
