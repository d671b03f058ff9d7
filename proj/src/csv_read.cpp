#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "dynabe/errors.hpp"
#include "dynabe/frame.hpp"

namespace dynabe {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // strip surrounding whitespace and CR
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

FeatureFrame read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": empty file, header row required");
    }
    auto header = split_line(line);
    if (header.size() < 2) {
        throw DataError(path + ":1: header needs a date column and at least "
                               "one feature column");
    }
    FeatureFrame frame;
    frame.names.assign(header.begin() + 1, header.end());
    frame.cols.resize(frame.names.size());

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        }
        Date d;
        try {
            d = Date::parse(cells[0]);
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " +
                            e.what());
        }
        frame.dates.push_back(d);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            double v;
            if (cells[j].empty()) {
                v = std::numeric_limits<double>::quiet_NaN();
            } else {
                char* end = nullptr;
                v = std::strtod(cells[j].c_str(), &end);
                if (end == cells[j].c_str() || *end != '\0') {
                    throw DataError(path + ":" + std::to_string(lineno) +
                                    ": bad numeric cell '" + cells[j] + "'");
                }
            }
            frame.cols[j - 1].push_back(v);
        }
    }
    try {
        frame.validate(/*allow_missing=*/true);
    } catch (const Error& e) {
        throw DataError(path + ": " + e.what());
    }
    return frame;
}

}  // namespace dynabe
