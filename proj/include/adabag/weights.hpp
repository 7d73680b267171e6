#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adabag {

/// Per-group sharing weight schemes, all functions of the group sizes n_g
/// and their total N (natural logarithms):
///   ws1  sqrt(1/3)
///   ws2  sqrt(n_g / N)
///   ws3  sqrt(log n_g / log N)
///   ws4  log n_g / log N
///   ws5  sqrt(log N / log n_g)
///   ws6  sqrt(log n_g * N / (log N * n_g))
enum class WeightScheme { ws1, ws2, ws3, ws4, ws5, ws6, custom };

std::optional<WeightScheme> parse_scheme(std::string_view name);
std::string_view scheme_name(WeightScheme scheme);

constexpr double default_polarity_tolerance = 1e-5;

/// w_j = 1 / (|polarity_j| + tol).
std::vector<double> inverse_polarity_weights(std::span<const double> polarity,
                                             double tol = default_polarity_tolerance);

/// Requires every n_g >= 2. For `custom` use the weights directly.
std::vector<double> group_weights(WeightScheme scheme, std::span<const std::size_t> group_sizes);

/// The sharing condition sum_g r_g > 1.
bool sharing_condition_holds(std::span<const double> group_weight);

struct PenaltyWeights
{
    std::vector<double> feature;  // w, one per feature
    std::vector<double> group;    // r, one per group
    WeightScheme scheme = WeightScheme::ws3;
};

/// Builds both weight vectors; group sizes are the core sizes the lasso is
/// fit on. Logs a warning (not an error) when the sharing condition fails.
PenaltyWeights make_penalty_weights(std::span<const double> polarity,
                                    double polarity_tol,
                                    WeightScheme scheme,
                                    std::span<const std::size_t> group_sizes,
                                    std::span<const double> custom_group_weights = {});

} // namespace adabag
