#include "adabag/core_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "adabag/error.hpp"
#include "adabag/rng.hpp"

namespace adabag {

SparseBinaryMatrix::SparseBinaryMatrix(std::size_t n_rows,
                                       std::size_t n_cols,
                                       std::vector<std::size_t> row_offsets,
                                       std::vector<FeatureIndex> col_indices)
    : n_cols_(n_cols), row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices))
{
    if (row_offsets_.size() != n_rows + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != col_indices_.size()) {
        fail(ErrorKind::data, "sparse matrix: row offsets inconsistent with row count or nnz");
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (row_offsets_[i + 1] < row_offsets_[i]) {
            fail(ErrorKind::data, "sparse matrix: row offsets decrease at row " + std::to_string(i));
        }
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k] >= n_cols_) {
                fail(ErrorKind::data, "sparse matrix: column index out of range in row " + std::to_string(i));
            }
            if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
                fail(ErrorKind::data,
                     "sparse matrix: column indices not strictly increasing in row " + std::to_string(i));
            }
        }
    }
}

SparseBinaryMatrix SparseBinaryMatrix::from_rows(std::size_t n_cols,
                                                 const std::vector<std::vector<FeatureIndex>>& rows)
{
    std::vector<std::size_t> offsets{0};
    offsets.reserve(rows.size() + 1);
    std::vector<FeatureIndex> cols;
    for (const auto& r : rows) {
        std::vector<FeatureIndex> sorted(r);
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        cols.insert(cols.end(), sorted.begin(), sorted.end());
        offsets.push_back(cols.size());
    }
    return SparseBinaryMatrix(rows.size(), n_cols, std::move(offsets), std::move(cols));
}

bool SparseBinaryMatrix::contains(Index i, FeatureIndex j) const
{
    const auto r = row(i);
    return std::binary_search(r.begin(), r.end(), j);
}

SparseBinaryMatrix SparseBinaryMatrix::select_rows(std::span<const Index> rows) const
{
    SparseBinaryMatrix out;
    out.n_cols_ = n_cols_;
    out.row_offsets_.reserve(rows.size() + 1);
    for (Index i : rows) {
        const auto r = row(i);
        out.col_indices_.insert(out.col_indices_.end(), r.begin(), r.end());
        out.row_offsets_.push_back(out.col_indices_.size());
    }
    return out;
}

SparseBinaryMatrix SparseBinaryMatrix::select_cols(std::span<const FeatureIndex> cols) const
{
    constexpr auto absent = static_cast<FeatureIndex>(-1);
    std::vector<FeatureIndex> remap(n_cols_, absent);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] >= n_cols_ || (k > 0 && cols[k] <= cols[k - 1])) {
            fail(ErrorKind::invalid_argument, "select_cols: columns must be strictly increasing and in range");
        }
        remap[cols[k]] = static_cast<FeatureIndex>(k);
    }
    SparseBinaryMatrix out;
    out.n_cols_ = cols.size();
    out.row_offsets_.reserve(n_rows() + 1);
    for (Index i = 0; i < n_rows(); ++i) {
        for (FeatureIndex j : row(i)) {
            if (remap[j] != absent) out.col_indices_.push_back(remap[j]);
        }
        out.row_offsets_.push_back(out.col_indices_.size());
    }
    return out;
}

std::vector<std::size_t> SparseBinaryMatrix::column_counts() const
{
    std::vector<std::size_t> counts(n_cols_, 0);
    for (FeatureIndex j : col_indices_) ++counts[j];
    return counts;
}

int label_class(double y, double lower, double upper)
{
    if (!(lower < upper)) {
        fail(ErrorKind::config, "class thresholds require lower < upper");
    }
    if (y >= upper) return 1;
    if (y <= lower) return 0;
    std::ostringstream os;
    os << "response " << y << " lies inside the excluded band (" << lower << ", " << upper << ")";
    fail(ErrorKind::data, os.str());
}

GroupedDataset::GroupedDataset(SparseBinaryMatrix x,
                               std::vector<double> y,
                               std::vector<GroupId> groups,
                               std::vector<std::string> group_names,
                               ClassThresholds thresholds,
                               std::vector<std::string> feature_names,
                               std::vector<double> polarity)
    : x_(std::move(x)),
      y_(std::move(y)),
      groups_(std::move(groups)),
      group_names_(std::move(group_names)),
      thresholds_(thresholds),
      feature_names_(std::move(feature_names)),
      polarity_(std::move(polarity))
{
    if (y_.size() != x_.n_rows() || groups_.size() != x_.n_rows()) {
        fail(ErrorKind::data, "dataset: response and group vectors must have one entry per row");
    }
    if (polarity_.size() != x_.n_cols() || feature_names_.size() != x_.n_cols()) {
        fail(ErrorKind::data, "dataset: polarity and feature names must have one entry per column");
    }
    if (!(thresholds_.lower < thresholds_.upper)) {
        fail(ErrorKind::config, "dataset: class thresholds require a < b");
    }
    classes_.reserve(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (groups_[i] >= group_names_.size()) {
            fail(ErrorKind::data, "dataset: group id out of range at row " + std::to_string(i));
        }
        classes_.push_back(label_class(y_[i], thresholds_));
    }
}

GroupedDataset GroupedDataset::drop_middle_band(SparseBinaryMatrix x,
                                                std::vector<double> y,
                                                std::vector<GroupId> groups,
                                                std::vector<std::string> group_names,
                                                ClassThresholds thresholds,
                                                std::vector<std::string> feature_names,
                                                std::vector<double> polarity,
                                                std::size_t* dropped)
{
    if (y.size() != x.n_rows() || groups.size() != x.n_rows()) {
        fail(ErrorKind::data, "dataset: response and group vectors must have one entry per row");
    }
    std::vector<Index> keep;
    keep.reserve(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        if (y[i] <= thresholds.lower || y[i] >= thresholds.upper) keep.push_back(i);
    }
    if (dropped) *dropped = y.size() - keep.size();
    if (keep.size() == y.size()) {
        return GroupedDataset(std::move(x), std::move(y), std::move(groups), std::move(group_names),
                              thresholds, std::move(feature_names), std::move(polarity));
    }
    std::vector<double> ky;
    std::vector<GroupId> kg;
    ky.reserve(keep.size());
    kg.reserve(keep.size());
    for (Index i : keep) {
        ky.push_back(y[i]);
        kg.push_back(groups[i]);
    }
    return GroupedDataset(x.select_rows(keep), std::move(ky), std::move(kg), std::move(group_names),
                          thresholds, std::move(feature_names), std::move(polarity));
}

namespace {

// Largest-remainder apportionment of n items over the ratio parts.
// `flip` swaps the tie priority of validation and test.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& ratios, bool flip)
{
    const std::array<unsigned, 3> parts{ratios.core, ratios.validation, ratios.test};
    const unsigned total = parts[0] + parts[1] + parts[2];
    std::array<std::size_t, 3> counts{};
    std::array<std::size_t, 3> remainder{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        counts[k] = n * parts[k] / total;
        remainder[k] = n * parts[k] % total;
        assigned += counts[k];
    }
    std::array<int, 3> order = flip ? std::array<int, 3>{0, 2, 1} : std::array<int, 3>{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k]];
    return counts;
}

} // namespace

SplitIndex stratified_split(const GroupedDataset& ds, std::uint64_t seed, SplitRatios ratios)
{
    if (ratios.core + ratios.validation + ratios.test == 0) {
        fail(ErrorKind::config, "split ratios must not all be zero");
    }
    // cells keyed by (group, class) in a fixed order
    std::map<std::pair<GroupId, int>, std::vector<Index>> cells;
    for (GroupId g = 0; g < ds.n_groups(); ++g) {
        cells[{g, 0}];
        cells[{g, 1}];
    }
    for (Index i = 0; i < ds.n_rows(); ++i) cells[{ds.groups()[i], ds.class_of(i)}].push_back(i);

    SplitIndex split;
    Rng rng = make_rng(seed, SeedStage::split);
    std::size_t cell_number = 0;
    for (auto& [key, rows] : cells) {
        if (rows.empty()) {
            fail(ErrorKind::config, "stratified split: group '" + ds.group_names()[key.first] +
                                        "' has no rows of class " + std::to_string(key.second));
        }
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto counts = apportion(rows.size(), ratios, (cell_number++ % 2) == 1);
        auto it = rows.begin();
        split.core.insert(split.core.end(), it, it + counts[0]);
        it += counts[0];
        split.validation.insert(split.validation.end(), it, it + counts[1]);
        it += counts[1];
        split.test.insert(split.test.end(), it, it + counts[2]);
    }
    std::sort(split.core.begin(), split.core.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<Index> bootstrap_resample(std::span<const Index> core,
                                      const std::function<int(Index)>& class_of,
                                      std::uint64_t seed)
{
    if (core.empty()) fail(ErrorKind::invalid_argument, "bootstrap: core set is empty");
    std::array<std::vector<Index>, 2> by_class;
    for (Index i : core) {
        const int c = class_of(i);
        if (c != 0 && c != 1) fail(ErrorKind::data, "bootstrap: class must be 0 or 1");
        by_class[c].push_back(i);
    }
    Rng rng(seed);
    std::vector<Index> out;
    out.reserve(core.size());
    for (const auto& rows : by_class) {
        if (rows.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
        for (std::size_t k = 0; k < rows.size(); ++k) out.push_back(rows[pick(rng)]);
    }
    return out;
}

} // namespace adabag
