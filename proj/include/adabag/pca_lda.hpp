#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adabag/core_data.hpp"

namespace adabag {

enum class PcOrdering { variance, entropy, entropy_descending };

std::optional<PcOrdering> parse_ordering(std::string_view name);
std::string_view ordering_name(PcOrdering ordering);

/// Correlation-matrix PCA. Components are columns of `components`, sorted by
/// eigenvalue (descending); `order` lists them in the requested ordering.
struct PcBasis
{
    std::vector<FeatureIndex> columns;  // columns with nonzero training variance
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;              // sample sd
    Eigen::MatrixXd components;         // |columns| x k
    Eigen::VectorXd eigenvalues;        // k, descending
    std::vector<double> entropy;        // per component
    std::vector<std::size_t> order;
    PcOrdering ordering = PcOrdering::variance;
    std::size_t dropped_columns = 0;
    bool truncated = false;

    /// Sum of all eigenvalues, including those not computed (= |columns|).
    double total_variance() const { return static_cast<double>(columns.size()); }
    /// Scores on the first t components of `order`.
    Eigen::VectorXd project(std::span<const FeatureIndex> row, std::size_t t) const;
    Eigen::MatrixXd project_rows(const SparseBinaryMatrix& x, std::span<const Index> rows, std::size_t t) const;
};

struct PcaOptions
{
    PcOrdering ordering = PcOrdering::variance;
    /// Exact dense SVD up to this many columns, randomized above it.
    std::size_t dense_limit = 500;
    /// Minimum number of components computed by the randomized method.
    std::size_t min_components = 300;
    /// The randomized method keeps computing until this much variance is
    /// covered by its components (in the requested ordering) or rank is hit.
    double target_variance = 0.30;
    std::size_t oversample = 10;
    std::size_t power_iterations = 4;
    std::uint64_t seed = 1;
};

/// Centers and scales each column, drops zero-variance ones, and takes the
/// SVD of the result. Requires at least two rows.
PcBasis fit_pca(const SparseBinaryMatrix& x, std::span<const Index> rows, const PcaOptions& options = {});

/// -sum u^2 log u^2 over the loadings (0 log 0 = 0).
double loading_entropy(const Eigen::Ref<const Eigen::VectorXd>& u);

/// Smallest t whose prefix of `basis.order` explains at least `target` of the
/// total variance. Returns 0 if the computed components never get there.
std::size_t threshold_pcs(const PcBasis& basis, double target);

/// Cumulative explained fraction of the first t components in order.
double explained_variance(const PcBasis& basis, std::size_t t);

struct LdModel
{
    Eigen::VectorXd direction;
    double cutpoint = 0.0;

    int classify(const Eigen::Ref<const Eigen::VectorXd>& scores) const
    {
        return direction.dot(scores) >= cutpoint ? 1 : 0;
    }
};

/// Fisher discriminant with pooled within-class covariance (n - 2
/// denominator) plus a 1e-8 * trace / t ridge.
LdModel fit_lda(const Eigen::Ref<const Eigen::MatrixXd>& scores, std::span<const int> classes);

struct PcaLdaOutcome
{
    PcOrdering ordering = PcOrdering::variance;
    std::size_t t = 0;
    double explained = 0.0;
    double test_me = 0.0;
    std::size_t test_rows = 0;
};

/// PCA on `train`, LDA on the first t ordered components, scored on `test`.
PcaLdaOutcome pca_lda(const GroupedDataset& ds,
                      std::span<const Index> train,
                      std::span<const Index> test,
                      double target_variance,
                      PcaOptions options);

struct PcaLdaReport
{
    double target_variance = 0.30;
    std::vector<PcaLdaOutcome> pooled;  // one per ordering
    /// Per-group fits, present when the dataset has more than one group.
    std::vector<std::string> group_names;
    std::vector<std::vector<PcaLdaOutcome>> by_group;
};

/// Trains on core + validation and tests on the test rows, for the variance
/// and entropy orderings, pooled and (if G > 1) within each group.
PcaLdaReport run_pca_lda(const GroupedDataset& ds,
                         const SplitIndex& split,
                         double target_variance,
                         const PcaOptions& options,
                         const std::vector<PcOrdering>& orderings = {PcOrdering::variance, PcOrdering::entropy});

} // namespace adabag
