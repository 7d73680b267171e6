#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adabag {

using Index = std::size_t;
using FeatureIndex = std::uint32_t;
using GroupId = std::uint32_t;

/// Row-major sparse 0/1 matrix (compressed rows, values implicitly one).
class SparseBinaryMatrix
{
public:
    SparseBinaryMatrix() : row_offsets_{0} {}

    /// Validates the compressed layout: offsets non-decreasing with
    /// n_rows + 1 entries, column indices strictly increasing within a row
    /// and below n_cols.
    SparseBinaryMatrix(std::size_t n_rows,
                       std::size_t n_cols,
                       std::vector<std::size_t> row_offsets,
                       std::vector<FeatureIndex> col_indices);

    /// Builds from per-row column lists; lists are sorted and deduplicated
    /// (repeated presence collapses to a single one).
    static SparseBinaryMatrix from_rows(std::size_t n_cols,
                                        const std::vector<std::vector<FeatureIndex>>& rows);

    std::size_t n_rows() const { return row_offsets_.size() - 1; }
    std::size_t n_cols() const { return n_cols_; }
    std::size_t nnz() const { return col_indices_.size(); }

    std::span<const FeatureIndex> row(Index i) const
    {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    bool contains(Index i, FeatureIndex j) const;

    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<FeatureIndex>& col_indices() const { return col_indices_; }

    /// Rows may repeat (bootstrap multisets).
    SparseBinaryMatrix select_rows(std::span<const Index> rows) const;

    /// Keeps the listed columns (strictly increasing), renumbered 0..k-1.
    SparseBinaryMatrix select_cols(std::span<const FeatureIndex> cols) const;

    /// Number of ones per column.
    std::vector<std::size_t> column_counts() const;

    friend bool operator==(const SparseBinaryMatrix&, const SparseBinaryMatrix&) = default;

private:
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<FeatureIndex> col_indices_;
};

/// Class thresholds: class 0 iff y <= lower, class 1 iff y >= upper.
struct ClassThresholds
{
    double lower = 0.0;
    double upper = 0.0;

    double midpoint() const { return lower + (upper - lower) / 2.0; }
};

/// 1 iff y >= upper, 0 iff y <= lower; throws for y strictly in between.
int label_class(double y, double lower, double upper);
inline int label_class(double y, const ClassThresholds& t) { return label_class(y, t.lower, t.upper); }

class GroupedDataset
{
public:
    GroupedDataset() = default;

    /// Group ids are 0-based indices into `group_names`. Throws a data error
    /// on any length mismatch or on a response inside the middle band.
    GroupedDataset(SparseBinaryMatrix x,
                   std::vector<double> y,
                   std::vector<GroupId> groups,
                   std::vector<std::string> group_names,
                   ClassThresholds thresholds,
                   std::vector<std::string> feature_names,
                   std::vector<double> polarity);

    /// Same inputs, but rows whose response falls strictly inside the band
    /// are removed instead of rejected. `dropped` receives the count.
    static GroupedDataset drop_middle_band(SparseBinaryMatrix x,
                                           std::vector<double> y,
                                           std::vector<GroupId> groups,
                                           std::vector<std::string> group_names,
                                           ClassThresholds thresholds,
                                           std::vector<std::string> feature_names,
                                           std::vector<double> polarity,
                                           std::size_t* dropped = nullptr);

    const SparseBinaryMatrix& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<GroupId>& groups() const { return groups_; }
    const std::vector<std::string>& group_names() const { return group_names_; }
    const ClassThresholds& thresholds() const { return thresholds_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<double>& polarity() const { return polarity_; }
    const std::vector<int>& classes() const { return classes_; }

    std::size_t n_rows() const { return y_.size(); }
    std::size_t n_features() const { return x_.n_cols(); }
    std::size_t n_groups() const { return group_names_.size(); }
    int class_of(Index row) const { return classes_[row]; }

private:
    SparseBinaryMatrix x_;
    std::vector<double> y_;
    std::vector<GroupId> groups_;
    std::vector<std::string> group_names_;
    ClassThresholds thresholds_;
    std::vector<std::string> feature_names_;
    std::vector<double> polarity_;
    std::vector<int> classes_;
};

/// Disjoint core / validation / test row sets, each sorted ascending.
struct SplitIndex
{
    std::vector<Index> core;
    std::vector<Index> validation;
    std::vector<Index> test;

    friend bool operator==(const SplitIndex&, const SplitIndex&) = default;
};

struct SplitRatios
{
    unsigned core = 2;
    unsigned validation = 1;
    unsigned test = 1;
};

/// Splits every (group, class) cell in the given ratio. Cell counts are
/// apportioned by largest remainder; remainder ties go to core first, then
/// alternate between validation and test across cells.
SplitIndex stratified_split(const GroupedDataset& ds, std::uint64_t seed, SplitRatios ratios = {});

/// Sampling with replacement within each class, so every class keeps its
/// original count. Output is grouped by class (class 0 first).
std::vector<Index> bootstrap_resample(std::span<const Index> core,
                                      const std::function<int(Index)>& class_of,
                                      std::uint64_t seed);

} // namespace adabag
