#pragma once

#include <span>
#include <vector>

#include "adabag/core_data.hpp"
#include "adabag/lasso_solver.hpp"

namespace adabag {

/// Standard normal CDF.
double normal_cdf(double z);

/// Gaussian two-class rule: per-group OLS means with residual scale sigma_g.
/// A pooled (shrinkage) model is the single-group case.
struct ProbitModel
{
    std::vector<OlsFit> groups;
    ClassThresholds thresholds;
};

struct ProbitDecision
{
    double mean = 0.0;
    double p_high = 0.0;  // P(y >= b) = 1 - Phi((b - mean) / sigma)
    double p_low = 0.0;   // P(y <= a) = Phi((a - mean) / sigma)
    int label = 0;
};

/// Class 1 iff P(y >= b) >= P(y <= a). Because Phi is strictly increasing
/// this holds exactly when (b - m) <= (m - a), i.e. m >= (a + b) / 2, for
/// every sigma > 0; the decision is taken on that form so it never depends
/// on CDF rounding in the tails.
int probit_label(double mean, const ClassThresholds& thresholds);

ProbitDecision evaluate(const ProbitModel& model, std::span<const FeatureIndex> row, GroupId group);

/// Throws for a group the model was not fitted on.
int classify(const ProbitModel& model, std::span<const FeatureIndex> row, GroupId group);

/// Group-free prediction from a pooled model.
int shrinkage_predict(const ProbitModel& pooled, std::span<const FeatureIndex> row);

/// Mean of |truth - prediction|.
double misclassification_error(std::span<const int> predictions, std::span<const int> truth);

} // namespace adabag
