#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "adabag/core_data.hpp"

namespace adabag {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Strictly decreasing, positive penalty levels; values[0] is lambda_max.
struct LambdaGrid
{
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

struct SolverOptions
{
    /// Absolute convergence threshold on the largest coordinate move,
    /// measured as |delta_j| * ||z_j - mean|| / sqrt(n).
    double tol = 1e-7;
    /// Upper bound on coordinate sweeps per penalty level.
    std::size_t max_iter = 10000;
};

/// Nonzero coefficients of one solution, sorted by column.
struct Coefficients
{
    std::vector<std::pair<std::size_t, double>> nonzeros;

    std::vector<double> dense(std::size_t n_cols) const;
    static Coefficients from_dense(std::span<const double> values);
};

struct PathPoint
{
    double lambda = 0.0;
    Coefficients coefficients;
    bool converged = true;
    std::size_t sweeps = 0;
    double objective = 0.0;
};

/// Weighted lasso with group-wise unpenalized intercepts:
///
///   min_b  1/(2n) sum_g || y_g - mu_g - Z_g b ||^2 + lambda * sum_j penalty_j |b_j|
///
/// The intercepts are profiled out, which is the same as centering y and
/// every column of Z within each row group. Centering is implicit, so Z
/// stays sparse. The response handed to the solver must already be
/// centered within groups.
class WeightedLasso
{
public:
    WeightedLasso(SparseMatrix design,
                  std::vector<double> penalty,
                  std::vector<GroupId> row_group,
                  std::size_t n_groups);

    std::size_t n_rows() const { return static_cast<std::size_t>(design_.rows()); }
    std::size_t n_cols() const { return static_cast<std::size_t>(design_.cols()); }
    const SparseMatrix& design() const { return design_; }
    const std::vector<double>& penalty() const { return penalty_; }

    /// Smallest penalty at which every coefficient is zero. Columns that are
    /// constant within every group carry no signal and are skipped.
    double lambda_max(std::span<const double> y) const;

    /// Cyclic coordinate descent with an active-set inner loop, warm started
    /// along the grid.
    std::vector<PathPoint> fit_path(std::span<const double> y,
                                    const LambdaGrid& grid,
                                    const SolverOptions& options) const;

    PathPoint fit(std::span<const double> y,
                  double lambda,
                  const SolverOptions& options,
                  const Coefficients& warm_start = {}) const;

    double objective(std::span<const double> y, const Coefficients& b, double lambda) const;

    /// Largest violation of the optimality conditions, in gradient units:
    /// |g_j| - lambda*w_j at zero coordinates, |g_j - lambda*w_j*sign(b_j)|
    /// at nonzero ones, where g_j is the centered correlation with the
    /// residual divided by n.
    double kkt_residual(std::span<const double> y, const Coefficients& b, double lambda) const;

private:
    struct State;

    double gradient(std::size_t j, const State& state) const;
    double update(std::size_t j, double lambda, State& state) const;
    State initial_state(std::span<const double> y, const Coefficients& b) const;

    SparseMatrix design_;
    std::vector<double> penalty_;
    std::vector<GroupId> row_group_;
    std::size_t n_groups_;
    std::vector<double> group_size_;
    // per column: (group, column sum within group) for groups it touches
    std::vector<std::vector<std::pair<GroupId, double>>> group_sums_;
    // per column: centered sum of squares / n
    std::vector<double> centered_ss_;
};

/// Log-spaced grid from lambda_max down to eps * lambda_max.
LambdaGrid make_lambda_grid(const WeightedLasso& problem,
                            std::span<const double> y_centered,
                            std::size_t k,
                            double eps);

/// Subtracts each group's mean. `means` receives the per-group means.
std::vector<double> center_by_group(std::span<const double> y,
                                    std::span<const GroupId> groups,
                                    std::size_t n_groups,
                                    std::vector<double>* means = nullptr);

/// Augmented design for the data-shared lasso. Columns are laid out as
/// [X | X(1) | ... | X(G)], where block g holds x_i / r_g on rows of group g
/// and zeros elsewhere. Every block reuses the feature weights w, so the
/// penalty on the implied group offsets is lambda * r_g * w_j.
struct DslDesign
{
    SparseMatrix z;
    std::vector<double> penalty;
    /// Column divisors applied when standardizing (all ones otherwise).
    std::vector<double> column_scale;
    std::vector<GroupId> row_group;
    std::vector<double> group_weight;
    std::size_t n_features = 0;
    std::size_t n_groups = 0;

    WeightedLasso problem() const;
};

DslDesign build_dsl_design(const SparseBinaryMatrix& x,
                           std::span<const GroupId> row_group,
                           std::size_t n_groups,
                           std::span<const double> group_weight,
                           std::span<const double> feature_weight,
                           bool standardize = false);

/// Solution of the data-shared model in the original parameterization.
struct LassoFit
{
    double lambda = 0.0;
    std::vector<double> intercepts;                  // mu_g
    std::vector<double> beta_shared;                 // beta
    std::vector<std::vector<double>> deltas;         // Delta_g
    std::vector<std::vector<FeatureIndex>> active_sets;  // {j : beta_j + Delta_gj != 0}
    bool converged = true;

    /// Union of the per-group active sets.
    std::vector<FeatureIndex> pooled_support() const;

    double predict(std::span<const FeatureIndex> row, GroupId group) const;
};

/// Maps a solution of the augmented problem back to (mu, beta, Delta).
/// `x` and `y` are the rows the design was built from (y uncentered).
LassoFit to_lasso_fit(const DslDesign& design,
                      const SparseBinaryMatrix& x,
                      std::span<const double> y,
                      const PathPoint& point);

/// Per-group active sets straight from the augmented coefficients, without
/// materializing dense vectors.
std::vector<std::vector<FeatureIndex>> active_sets(const DslDesign& design, const Coefficients& b);

/// Least-squares refit with intercept on a column subset.
struct OlsFit
{
    double intercept = 0.0;
    std::vector<FeatureIndex> columns;  // sorted
    std::vector<double> coefficients;
    double sigma = 1.0;
    bool rank_deficient = false;

    double predict(std::span<const FeatureIndex> row) const;
};

/// Fits y ~ 1 + X[:, columns] over `rows` (duplicates allowed). If the
/// centered normal matrix is singular (or |columns| >= rows) a relative
/// ridge jitter of 1e-8 gives the near minimum-norm solution and the fit
/// is flagged. sigma uses the denominator max(1, n - |columns| - 1) and is
/// floored at `sigma_floor`.
OlsFit ols_fit(const SparseBinaryMatrix& x,
               std::span<const Index> rows,
               std::span<const FeatureIndex> columns,
               std::span<const double> y,
               double sigma_floor);

/// One OLS fit per group, each on that group's rows and its own columns.
std::vector<OlsFit> ols_refit(const SparseBinaryMatrix& x,
                              std::span<const Index> rows,
                              std::span<const GroupId> groups,
                              std::size_t n_groups,
                              const std::vector<std::vector<FeatureIndex>>& columns,
                              std::span<const double> y,
                              double sigma_floor);

} // namespace adabag
