#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mimictree/schema.hpp"

namespace mimictree {

/// One encoded numeric column of a Dataset. Categorical features expand to
/// one one-hot column per level, all sharing a group id; lag expansion
/// stamps copies with lag > 0.
struct ColumnInfo {
    std::string base;        // source feature name
    std::string level;       // one-hot level, empty otherwise
    feature_kind kind = feature_kind::continuous;
    int lag = 0;
    int group = -1;          // one-hot group id, -1 for plain columns
    bool tagged = false;     // set by lag_expand: names carry (t0)/(t-k)

    bool is_one_hot() const { return group >= 0; }

    /// Display name: "base", "base=level", with " (t0)" / " (t-k)" once
    /// lag expansion has run.
    std::string name() const;
};

/// Per-column standardization parameters captured by normalize().
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;          // population convention
    std::vector<std::uint8_t> zero_variance; // flagged, column maps to zeros
    std::vector<std::uint8_t> affected;      // continuous columns only

    std::size_t size() const { return mean.size(); }
};

/// Columnar table of encoded features plus one target column. Immutable by
/// convention after construction; all transforms return new datasets.
struct Dataset {
    std::vector<ColumnInfo> schema;
    std::vector<std::vector<double>> columns; // column-major, equal lengths
    std::vector<double> target;               // soft labels y
    std::vector<std::int64_t> episode_ids;    // empty = one episode
    std::optional<NormStats> norm;            // set once normalized

    std::size_t rows() const { return target.size(); }
    std::size_t n_features() const { return columns.size(); }

    std::span<const double> col(std::size_t i) const { return columns[i]; }

    /// Index of the column with the given display name, -1 if absent.
    int find_column(const std::string& name) const;

    /// FNV-1a hash over column names, kinds and lags. Trees trained on a
    /// dataset only accept datasets with the same fingerprint.
    std::uint64_t schema_fingerprint() const;

    /// Appends rows of another dataset with an identical schema.
    void append_rows(const Dataset& other);

    /// Throws data_error if any column length disagrees with the target.
    void check_consistent() const;
};

/// Reads a comma-delimited CSV (UTF-8, header row, decimal-point numerics)
/// and encodes it per the schema: continuous/binary features become one
/// column, categorical features one-hot expand. Row order is preserved.
///
/// Errors: schema_error for missing columns, parse_error / data_error with
/// the offending row index for bad cells.
Dataset load_csv(const std::string& path, const Schema& schema);

/// Expands every feature into `window` lagged copies f(t0), f(t-1), ...
/// Lags never cross episode boundaries; out-of-episode slots receive `pad`
/// (0 is the neutral value once columns are normalized). window == 1 returns
/// the input unchanged.
Dataset lag_expand(const Dataset& data, int window, double pad = 0.0);

/// Standardizes continuous columns to zero mean / unit population variance.
/// One-hot and binary columns pass through; zero-variance columns map to
/// all-zeros and are flagged in the stats.
std::pair<Dataset, NormStats> normalize(const Dataset& data);

/// Applies previously captured stats; on the fitting set this reproduces
/// normalize() bit-for-bit.
Dataset apply_norm(const Dataset& data, const NormStats& stats);

/// Deterministic disjoint partition into (train, test) of sizes
/// ceil(N*(1-f)) and floor(N*f). Row order is preserved inside each part.
std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

} // namespace mimictree
