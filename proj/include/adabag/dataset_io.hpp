#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adabag/core_data.hpp"

namespace adabag {

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

struct DatasetFiles
{
    GroupedDataset dataset;
    std::optional<SplitIndex> split;
    std::vector<FeatureIndex> true_support;  // empty unless recorded
};

/// Reads matrix.smx, labels.tsv and features.tsv, plus dataset.json
/// (thresholds, group order, true support) and split.tsv when present.
/// `thresholds` overrides dataset.json; one of the two must supply them.
DatasetFiles load_dataset(const std::filesystem::path& dir, std::optional<ClassThresholds> thresholds = std::nullopt);

void save_dataset(const std::filesystem::path& dir,
                  const GroupedDataset& ds,
                  const SplitIndex* split = nullptr,
                  std::span<const FeatureIndex> true_support = {});

SplitIndex read_split(const std::filesystem::path& file, std::size_t n_rows);
void write_split(const std::filesystem::path& file, const SplitIndex& split);

} // namespace adabag
