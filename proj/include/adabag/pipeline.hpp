#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adabag/classifier.hpp"
#include "adabag/core_data.hpp"
#include "adabag/lasso_solver.hpp"
#include "adabag/weights.hpp"

namespace adabag {

struct RunConfig
{
    WeightScheme scheme = WeightScheme::ws3;
    std::vector<double> custom_group_weights;
    std::size_t bootstrap_replicates = 100;
    std::size_t grid_size = 100;
    double grid_eps = 1e-3;
    /// Solver tolerance relative to the standard deviation of the response.
    double relative_tol = 1e-7;
    std::size_t max_iter = 10000;
    double polarity_tol = default_polarity_tolerance;
    bool standardize = false;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    /// Every problem found, not just the first.
    std::vector<std::string> validate() const;
};

/// Validation error along the lambda grid for one core sample.
struct LambdaSweep
{
    std::vector<double> lambdas;
    std::vector<std::size_t> errors;         // misclassified validation rows
    std::vector<std::size_t> support_sizes;  // pooled active-set size
    std::vector<double> objectives;
    std::vector<char> converged;
    std::size_t n_validation = 0;
    std::size_t best = 0;
    std::vector<FeatureIndex> support;                    // pooled, at best
    std::vector<std::vector<FeatureIndex>> group_support; // per group, at best

    double error_rate(std::size_t i) const;
    double best_lambda() const { return lambdas.at(best); }
    bool best_converged() const { return converged.at(best) != 0; }
};

/// Fits the data-shared lasso path on `core_rows` (duplicates allowed),
/// refits OLS on each per-group active set, classifies `validation` and
/// returns the sweep. The argmin breaks ties toward the larger lambda.
LambdaSweep optimize_lambda(const GroupedDataset& ds,
                            std::span<const Index> core_rows,
                            std::span<const Index> validation,
                            const PenaltyWeights& weights,
                            const RunConfig& config);

/// Bagging frequency distribution: per feature, the number of bootstrap
/// replicates whose lambda-optimal pooled support contains it.
struct BfdTable
{
    std::vector<std::uint32_t> frequency;
    std::size_t replicates = 0;
    std::size_t retried = 0;
    std::size_t flagged = 0;
    std::vector<double> replicate_lambda;
    std::vector<std::size_t> replicate_support_size;
};

BfdTable run_bagging(const GroupedDataset& ds,
                     const SplitIndex& split,
                     const PenaltyWeights& weights,
                     const RunConfig& config);

/// A_c = {w : frequency(w) >= c}; nested, shrinking as c grows.
std::vector<FeatureIndex> cutoff_support(const BfdTable& bfd, std::size_t cutoff);

struct CutoffModel
{
    std::size_t cutoff = 0;
    std::vector<FeatureIndex> support;
    std::size_t validation_errors = 0;
    double validation_me = 0.0;
    double test_me = 0.0;
};

struct CutoffSweep
{
    std::vector<CutoffModel> models;  // cutoff = 1..B
    std::vector<double> smoothed_validation_me;
    std::size_t best_cutoff = 0;

    const CutoffModel& at(std::size_t cutoff) const { return models.at(cutoff - 1); }
};

/// For every cutoff: group-aware OLS on the core, validation error, and the
/// test error of the pooled rule. c* minimizes validation error with ties
/// going to the larger cutoff.
CutoffSweep cutoff_sweep(const GroupedDataset& ds, const SplitIndex& split, const BfdTable& bfd, const RunConfig& config);

struct ModelReport
{
    std::size_t cutoff = 0;
    std::vector<FeatureIndex> support;
    double validation_me = 0.0;
    double test_me = 0.0;
    std::vector<double> group_test_me;
    std::vector<std::size_t> group_test_rows;
    OlsFit pooled_fit;
    ProbitModel model;  // pooled model used on the test set
};

/// Pooled (shrinkage) OLS on the support, fit on core and validation,
/// scored on the test rows overall and per group.
ModelReport evaluate_test(const GroupedDataset& ds,
                          const SplitIndex& split,
                          std::span<const FeatureIndex> support,
                          const RunConfig& config);

struct RunResult
{
    PenaltyWeights weights;
    std::vector<std::size_t> core_group_sizes;
    LambdaSweep base;  // single run on the unresampled core
    BfdTable bfd;
    CutoffSweep cutoffs;
    ModelReport report;
};

RunResult run_adabag(const GroupedDataset& ds, const SplitIndex& split, const RunConfig& config);

/// Local quadratic regression with tricube weights (span as a fraction of
/// points), evaluated at each x.
std::vector<double> loess_smooth(std::span<const double> x, std::span<const double> y, double span = 0.75);

} // namespace adabag
