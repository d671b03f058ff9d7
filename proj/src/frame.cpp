#include "dynabe/frame.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "dynabe/errors.hpp"

namespace dynabe {

bool FeatureFrame::has_column(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::size_t FeatureFrame::column_index(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw SchemaError("unknown column '" + name + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
}

const std::vector<double>& FeatureFrame::column(const std::string& name) const {
    return cols[column_index(name)];
}

const std::vector<double>& FeatureFrame::close() const {
    if (close_name.empty()) {
        throw SchemaError("no close column designated");
    }
    return column(close_name);
}

std::vector<std::string> FeatureFrame::feature_names() const {
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (is_feature(n)) out.push_back(n);
    }
    return out;
}

void FeatureFrame::set_close(const std::string& name) {
    column_index(name);  // existence check
    close_name = name;
    passthrough.insert(name);
}

void FeatureFrame::add_passthrough(const std::string& name) {
    column_index(name);
    passthrough.insert(name);
}

void FeatureFrame::validate(bool allow_missing) const {
    if (names.size() != cols.size()) {
        throw SchemaError("column name/data count mismatch");
    }
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (!(dates[t - 1] < dates[t])) {
            throw SchemaError("dates not strictly increasing at row " +
                              std::to_string(t));
        }
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw SchemaError("duplicate column name '" + n + "'");
        }
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != dates.size()) {
            throw SchemaError("column '" + names[j] + "' has " +
                              std::to_string(cols[j].size()) + " values for " +
                              std::to_string(dates.size()) + " dates");
        }
        if (!allow_missing) {
            for (double v : cols[j]) {
                if (std::isnan(v)) {
                    throw DataError("missing value in column '" + names[j] +
                                    "' after preprocessing");
                }
            }
        }
    }
    if (!close_name.empty() && !has_column(close_name)) {
        throw SchemaError("close column '" + close_name + "' absent");
    }
}

FeatureFrame FeatureFrame::take_rows(
    const std::vector<std::size_t>& rows_idx) const {
    FeatureFrame out;
    out.names = names;
    out.close_name = close_name;
    out.passthrough = passthrough;
    out.dates.reserve(rows_idx.size());
    for (std::size_t r : rows_idx) out.dates.push_back(dates.at(r));
    out.cols.resize(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.cols[j].reserve(rows_idx.size());
        for (std::size_t r : rows_idx) out.cols[j].push_back(cols[j][r]);
    }
    return out;
}

void TrendLabels::validate() const {
    if (dates.size() != labels.size()) {
        throw SchemaError("label/date count mismatch");
    }
    for (int v : labels) {
        if (v != 0 && v != 1) {
            throw DataError("label outside {0,1}");
        }
    }
}

FeatureFrame align_calendars(const std::vector<FeatureFrame>& frames) {
    if (frames.empty()) {
        throw ParamError("align_calendars needs at least one frame");
    }
    for (const auto& f : frames) f.validate(/*allow_missing=*/true);

    std::unordered_set<std::string> seen;
    for (const auto& f : frames) {
        for (const auto& n : f.names) {
            if (!seen.insert(n).second) {
                throw SchemaError("duplicate column name '" + n +
                                  "' across frames");
            }
        }
    }

    // Intersection of the date sets, in order.
    std::vector<Date> common = frames[0].dates;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(),
                              frames[i].dates.begin(), frames[i].dates.end(),
                              std::back_inserter(next));
        common.swap(next);
    }
    if (common.empty()) {
        throw AlignmentError("empty date intersection across sources");
    }

    FeatureFrame out;
    out.dates = common;
    for (const auto& f : frames) {
        // Forward-fill along the source frame's own calendar, then select
        // the retained dates.
        std::vector<std::size_t> pick;
        pick.reserve(common.size());
        {
            std::size_t k = 0;
            for (const auto& d : common) {
                while (f.dates[k] < d) ++k;
                pick.push_back(k);
            }
        }
        for (std::size_t j = 0; j < f.cols.size(); ++j) {
            std::vector<double> filled = f.cols[j];
            for (std::size_t t = 1; t < filled.size(); ++t) {
                if (std::isnan(filled[t])) filled[t] = filled[t - 1];
            }
            std::vector<double> sel;
            sel.reserve(common.size());
            for (std::size_t k : pick) sel.push_back(filled[k]);
            out.names.push_back(f.names[j]);
            out.cols.push_back(std::move(sel));
        }
        if (!f.close_name.empty()) {
            if (!out.close_name.empty() && out.close_name != f.close_name) {
                throw SchemaError("conflicting close columns '" +
                                  out.close_name + "' and '" + f.close_name +
                                  "'");
            }
            out.close_name = f.close_name;
        }
        out.passthrough.insert(f.passthrough.begin(), f.passthrough.end());
    }

    // Drop rows before every column's first observation.
    std::size_t first_complete = 0;
    for (const auto& col : out.cols) {
        std::size_t first_valid = 0;
        while (first_valid < col.size() && std::isnan(col[first_valid])) {
            ++first_valid;
        }
        first_complete = std::max(first_complete, first_valid);
    }
    if (first_complete >= out.rows()) {
        throw AlignmentError("no rows remain after dropping leading gaps");
    }
    if (first_complete > 0) {
        std::vector<std::size_t> keep;
        for (std::size_t t = first_complete; t < out.rows(); ++t) {
            keep.push_back(t);
        }
        out = out.take_rows(keep);
    }
    out.validate();
    return out;
}

FeatureFrame first_difference(const FeatureFrame& frame,
                              const std::set<std::string>& columns) {
    if (columns.empty()) return frame;
    for (const auto& n : columns) {
        std::size_t j = frame.column_index(n);
        if (!frame.is_feature(n)) {
            throw SchemaError("column '" + n +
                              "' is a passthrough column and cannot be "
                              "differenced");
        }
        if (frame.cols[j].size() < 2) {
            throw InsufficientDataError("column '" + n +
                                        "' has fewer than 2 values");
        }
    }
    FeatureFrame out;
    out.names = frame.names;
    out.close_name = frame.close_name;
    out.passthrough = frame.passthrough;
    out.dates.assign(frame.dates.begin() + 1, frame.dates.end());
    out.cols.resize(frame.cols.size());
    for (std::size_t j = 0; j < frame.cols.size(); ++j) {
        const auto& src = frame.cols[j];
        auto& dst = out.cols[j];
        dst.reserve(src.size() - 1);
        const bool diff = columns.count(frame.names[j]) > 0;
        for (std::size_t t = 1; t < src.size(); ++t) {
            dst.push_back(diff ? src[t] - src[t - 1] : src[t]);
        }
    }
    return out;
}

FeatureFrame make_lags(const FeatureFrame& frame, std::size_t max_lag) {
    if (max_lag < 1) {
        throw ParamError("max_lag must be >= 1");
    }
    if (frame.rows() <= max_lag) {
        throw InsufficientDataError(
            "make_lags needs more rows than max_lag (" +
            std::to_string(frame.rows()) + " <= " + std::to_string(max_lag) +
            ")");
    }
    FeatureFrame out;
    out.close_name = frame.close_name;
    out.passthrough = frame.passthrough;
    out.dates.assign(frame.dates.begin() + static_cast<std::ptrdiff_t>(max_lag),
                     frame.dates.end());
    const std::size_t n_out = frame.rows() - max_lag;
    for (std::size_t j = 0; j < frame.n_cols(); ++j) {
        const auto& src = frame.cols[j];
        if (!frame.is_feature(frame.names[j])) {
            out.names.push_back(frame.names[j]);
            out.cols.emplace_back(src.begin() + static_cast<std::ptrdiff_t>(max_lag),
                                  src.end());
            continue;
        }
        for (std::size_t k = 0; k <= max_lag; ++k) {
            std::string name = frame.names[j];
            if (k > 0) name += "_" + std::to_string(k);
            std::vector<double> vals(n_out);
            for (std::size_t t = 0; t < n_out; ++t) {
                vals[t] = src[t + max_lag - k];
            }
            out.names.push_back(std::move(name));
            out.cols.push_back(std::move(vals));
        }
    }
    out.validate();
    return out;
}

TrendLabels make_labels(const FeatureFrame& frame) {
    const auto& close = frame.close();
    if (close.size() < 2) {
        throw InsufficientDataError("close column needs at least 2 rows");
    }
    for (double v : close) {
        if (!(v > 0.0)) {
            throw DataError("non-positive close price");
        }
    }
    TrendLabels out;
    out.dates.assign(frame.dates.begin(), frame.dates.end() - 1);
    out.labels.resize(close.size() - 1);
    for (std::size_t t = 0; t + 1 < close.size(); ++t) {
        out.labels[t] = close[t + 1] > close[t] ? 1 : 0;
    }
    return out;
}

std::pair<FeatureFrame, StandardizeStats> standardize(const FeatureFrame& frame,
                                                      std::size_t train_begin,
                                                      std::size_t train_end) {
    if (train_begin >= train_end || train_end > frame.rows()) {
        throw ParamError("empty or out-of-range train rows for standardize");
    }
    FeatureFrame out = frame;
    StandardizeStats stats;
    const std::size_t n = train_end - train_begin;
    for (std::size_t j = 0; j < frame.n_cols(); ++j) {
        if (!frame.is_feature(frame.names[j])) continue;
        const auto& src = frame.cols[j];
        double mean = 0.0;
        for (std::size_t t = train_begin; t < train_end; ++t) mean += src[t];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t t = train_begin; t < train_end; ++t) {
            const double d = src[t] - mean;
            ss += d * d;
        }
        const double sd =
            n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        const bool degen = sd == 0.0;
        auto& dst = out.cols[j];
        for (std::size_t t = 0; t < dst.size(); ++t) {
            dst[t] = degen ? 0.0 : (src[t] - mean) / sd;
        }
        stats.names.push_back(frame.names[j]);
        stats.mean.push_back(mean);
        stats.stdev.push_back(sd);
        stats.degenerate.push_back(degen);
    }
    return {std::move(out), std::move(stats)};
}

SplitIndices split(const FeatureFrame& frame, const TrendLabels& labels,
                   const SplitSpec& spec) {
    labels.validate();
    if (labels.size() > frame.rows()) {
        throw SchemaError("more labels than frame rows");
    }
    if (spec.train_range.overlaps(spec.valid_range)) {
        throw ParamError("train and validation ranges overlap");
    }
    if (!(spec.train_range.last < spec.valid_range.first)) {
        throw ParamError("train range must end before validation begins");
    }
    SplitIndices out;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (spec.train_range.contains(labels.dates[t])) {
            out.train_rows.push_back(t);
        } else if (spec.valid_range.contains(labels.dates[t])) {
            out.valid_rows.push_back(t);
        }
    }
    if (out.train_rows.empty() || out.valid_rows.empty()) {
        throw ParamError("a split range selects no labeled rows");
    }
    return out;
}

}  // namespace dynabe
