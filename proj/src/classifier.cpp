#include "adabag/classifier.hpp"

#include <cmath>

#include "adabag/error.hpp"

namespace adabag {

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

int probit_label(double mean, const ClassThresholds& thresholds)
{
    return mean >= thresholds.midpoint() ? 1 : 0;
}

ProbitDecision evaluate(const ProbitModel& model, std::span<const FeatureIndex> row, GroupId group)
{
    if (group >= model.groups.size()) {
        fail(ErrorKind::data, "classifier: no model fitted for group " + std::to_string(group));
    }
    const OlsFit& fit = model.groups[group];
    if (!(fit.sigma > 0.0)) fail(ErrorKind::numeric, "classifier: sigma must be positive");
    ProbitDecision d;
    d.mean = fit.predict(row);
    d.p_high = 1.0 - normal_cdf((model.thresholds.upper - d.mean) / fit.sigma);
    d.p_low = normal_cdf((model.thresholds.lower - d.mean) / fit.sigma);
    d.label = probit_label(d.mean, model.thresholds);
    return d;
}

int classify(const ProbitModel& model, std::span<const FeatureIndex> row, GroupId group)
{
    return evaluate(model, row, group).label;
}

int shrinkage_predict(const ProbitModel& pooled, std::span<const FeatureIndex> row)
{
    if (pooled.groups.size() != 1) fail(ErrorKind::invalid_argument, "shrinkage predictor needs a single pooled fit");
    return evaluate(pooled, row, 0).label;
}

double misclassification_error(std::span<const int> predictions, std::span<const int> truth)
{
    if (predictions.size() != truth.size()) fail(ErrorKind::invalid_argument, "misclassification: length mismatch");
    if (predictions.empty()) fail(ErrorKind::invalid_argument, "misclassification: empty input");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predictions[i] != truth[i] ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

} // namespace adabag
