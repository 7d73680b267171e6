#include "adabag/weights.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "adabag/error.hpp"

namespace adabag {

namespace {
constexpr std::array<std::pair<WeightScheme, std::string_view>, 7> scheme_names{{
    {WeightScheme::ws1, "ws1"},
    {WeightScheme::ws2, "ws2"},
    {WeightScheme::ws3, "ws3"},
    {WeightScheme::ws4, "ws4"},
    {WeightScheme::ws5, "ws5"},
    {WeightScheme::ws6, "ws6"},
    {WeightScheme::custom, "custom"},
}};
} // namespace

std::optional<WeightScheme> parse_scheme(std::string_view name)
{
    for (const auto& [scheme, text] : scheme_names) {
        if (text == name) return scheme;
    }
    return std::nullopt;
}

std::string_view scheme_name(WeightScheme scheme)
{
    for (const auto& [s, text] : scheme_names) {
        if (s == scheme) return text;
    }
    return "unknown";
}

std::vector<double> inverse_polarity_weights(std::span<const double> polarity, double tol)
{
    if (!(tol > 0.0)) fail(ErrorKind::config, "polarity tolerance must be positive");
    std::vector<double> w;
    w.reserve(polarity.size());
    for (std::size_t j = 0; j < polarity.size(); ++j) {
        if (!std::isfinite(polarity[j])) {
            fail(ErrorKind::data, "non-finite polarity for feature " + std::to_string(j));
        }
        w.push_back(1.0 / (std::abs(polarity[j]) + tol));
    }
    return w;
}

std::vector<double> group_weights(WeightScheme scheme, std::span<const std::size_t> group_sizes)
{
    if (scheme == WeightScheme::custom) {
        fail(ErrorKind::config, "custom group weights must be supplied explicitly");
    }
    if (group_sizes.empty()) fail(ErrorKind::config, "group weights need at least one group");
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        if (group_sizes[g] < 2) {
            fail(ErrorKind::config, "group " + std::to_string(g) +
                                        " has fewer than 2 core rows; log-based weights are undefined");
        }
    }
    const double total = static_cast<double>(
        std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0}));
    const double log_total = std::log(total);

    std::vector<double> r;
    r.reserve(group_sizes.size());
    for (std::size_t n_g : group_sizes) {
        const double n = static_cast<double>(n_g);
        const double log_ratio = std::log(n) / log_total;
        switch (scheme) {
        case WeightScheme::ws1: r.push_back(std::sqrt(1.0 / 3.0)); break;
        case WeightScheme::ws2: r.push_back(std::sqrt(n / total)); break;
        case WeightScheme::ws3: r.push_back(std::sqrt(log_ratio)); break;
        case WeightScheme::ws4: r.push_back(log_ratio); break;
        case WeightScheme::ws5: r.push_back(std::sqrt(1.0 / log_ratio)); break;
        case WeightScheme::ws6: r.push_back(std::sqrt(log_ratio * total / n)); break;
        case WeightScheme::custom: break;
        }
    }
    return r;
}

bool sharing_condition_holds(std::span<const double> group_weight)
{
    return std::accumulate(group_weight.begin(), group_weight.end(), 0.0) > 1.0;
}

PenaltyWeights make_penalty_weights(std::span<const double> polarity,
                                    double polarity_tol,
                                    WeightScheme scheme,
                                    std::span<const std::size_t> group_sizes,
                                    std::span<const double> custom_group_weights)
{
    PenaltyWeights out;
    out.scheme = scheme;
    out.feature = inverse_polarity_weights(polarity, polarity_tol);
    if (scheme == WeightScheme::custom) {
        if (custom_group_weights.size() != group_sizes.size()) {
            fail(ErrorKind::config, "custom scheme needs one weight per group (got " +
                                        std::to_string(custom_group_weights.size()) + ", expected " +
                                        std::to_string(group_sizes.size()) + ")");
        }
        for (double r : custom_group_weights) {
            if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorKind::config, "custom group weights must be positive");
        }
        out.group.assign(custom_group_weights.begin(), custom_group_weights.end());
    } else {
        out.group = group_weights(scheme, group_sizes);
    }
    // a single group has nothing to share with, so the condition is moot there
    if (out.group.size() > 1 && !sharing_condition_holds(out.group)) {
        spdlog::warn("group weights for scheme {} sum to <= 1; sharing condition not met",
                     scheme_name(scheme));
    }
    return out;
}

} // namespace adabag
