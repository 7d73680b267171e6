#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "adabag/core_data.hpp"

namespace adabag {

enum class PolarityVariant { equal, structured };

std::optional<PolarityVariant> parse_variant(std::string_view name);
std::string_view variant_name(PolarityVariant variant);

struct ColumnBlock
{
    std::size_t first = 0;  // 0-based, inclusive
    std::size_t last = 0;   // 0-based, inclusive
    double probability = 0.0;
};

struct SimConfig
{
    std::size_t n = 1000;
    std::size_t p = 77;
    std::vector<ColumnBlock> blocks{{0, 1, 0.1}, {2, 64, 0.2}, {65, 74, 0.03}, {75, 76, 0.029}};
    /// Sparse true coefficients as (0-based feature, value).
    std::vector<std::pair<FeatureIndex, double>> beta{
        {0, -1.0}, {1, 1.0}, {2, -1.0}, {3, 1.0}, {4, 0.5}, {5, -0.5}, {6, -0.25}, {7, -0.125},
        {75, 1.25}, {76, -1.25}};
    double mu = 0.0;
    double noise_var = 0.3;
    /// Rows kept per class after the band is removed, split 2:1:1.
    std::size_t per_class = 200;
    PolarityVariant variant = PolarityVariant::structured;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimData
{
    GroupedDataset dataset;
    SplitIndex split;
    std::vector<FeatureIndex> true_support;  // 0-based
    std::size_t generated = 0;
    std::size_t survived = 0;  // rows outside the band
};

/// Polarity scores for the 77-feature design.
std::vector<double> polarity_variant(PolarityVariant variant, std::size_t p = 77);

SimData generate(const SimConfig& config);

} // namespace adabag
