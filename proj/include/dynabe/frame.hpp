#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "dynabe/date.hpp"

namespace dynabe {

/// Date-aligned matrix of named real-valued columns. One designated column
/// holds the target stock's closing price; passthrough columns (the close and
/// an optional benchmark index) are carried through preprocessing untouched
/// apart from row drops, every other column is a model feature.
///
/// Invariants (checked by validate()): dates strictly increasing, unique
/// column names, every column has exactly dates.size() values. Missing values
/// (NaN) are only legal before calendar alignment.
struct FeatureFrame {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;  // column-major, cols[j][t]
    std::string close_name;
    std::set<std::string> passthrough;  // close + benchmark columns

    std::size_t rows() const { return dates.size(); }
    std::size_t n_cols() const { return names.size(); }

    bool has_column(const std::string& name) const;
    /// Index of a named column; throws SchemaError when absent.
    std::size_t column_index(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    const std::vector<double>& close() const;

    bool is_feature(const std::string& name) const {
        return passthrough.find(name) == passthrough.end();
    }
    /// Names of model-feature columns, in frame order.
    std::vector<std::string> feature_names() const;

    /// Marks `name` as the close column (and passthrough). Throws SchemaError
    /// if the column does not exist.
    void set_close(const std::string& name);
    void add_passthrough(const std::string& name);

    /// Throws on any invariant violation. NaNs are rejected unless
    /// allow_missing is set.
    void validate(bool allow_missing = false) const;

    /// Copy restricted to the given row indices (must be strictly increasing).
    FeatureFrame take_rows(const std::vector<std::size_t>& rows_idx) const;
};

/// Per-date binary up/down labels; label[t] refers to the move from
/// dates[t] to the following trading day.
struct TrendLabels {
    std::vector<Date> dates;
    std::vector<int> labels;  // each 0 or 1

    std::size_t size() const { return labels.size(); }
    void validate() const;
};

/// Train / validation date intervals. Train must end before validation
/// begins; the split is row-disjoint by construction.
struct SplitSpec {
    DateRange train_range;
    DateRange valid_range;
};

struct SplitIndices {
    std::vector<std::size_t> train_rows;  // indices into the labeled rows
    std::vector<std::size_t> valid_rows;
};

// --- preprocessing operations ---

/// Joins frames on the intersection of their calendars. A feature whose
/// source market was closed on a retained date carries its last observed
/// value forward; rows before a feature's first observation are dropped.
FeatureFrame align_calendars(const std::vector<FeatureFrame>& frames);

/// Replaces each named column by x[t] - x[t-1] and drops the first row.
/// Passthrough columns (close, benchmark) cannot be differenced. An empty
/// selection returns the frame unchanged, with no row drop.
FeatureFrame first_difference(const FeatureFrame& frame,
                              const std::set<std::string>& columns);

/// Emits, for every feature column f, the columns f, f_1, ..., f_max_lag
/// with f_k[t] = f[t-k], dropping the first max_lag rows.
FeatureFrame make_lags(const FeatureFrame& frame, std::size_t max_lag = 5);

/// label[t] = 1 iff close[t+1] > close[t]; the last date has no label.
/// A flat close counts as down.
TrendLabels make_labels(const FeatureFrame& frame);

struct StandardizeStats {
    std::vector<std::string> names;  // feature columns only
    std::vector<double> mean;
    std::vector<double> stdev;  // sample stdev over the train rows
    std::vector<bool> degenerate;  // stdev 0: column zeroed and flagged
};

/// Transforms every feature column to (x - mean_train) / stdev_train where
/// the statistics come from rows [train_begin, train_end) only. Degenerate
/// (zero-variance) columns become all-zero and are flagged, not fatal.
std::pair<FeatureFrame, StandardizeStats> standardize(
    const FeatureFrame& frame, std::size_t train_begin, std::size_t train_end);

/// Partitions the labeled rows by the split's date ranges.
SplitIndices split(const FeatureFrame& frame, const TrendLabels& labels,
                   const SplitSpec& spec);

// --- CSV ingestion ---

/// Reads one market CSV: header row, first column ISO-8601 dates, remaining
/// columns numeric; empty cells denote missing. Throws DataError with
/// file/line on parse failures.
FeatureFrame read_feature_csv(const std::string& path);

}  // namespace dynabe
