#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "adabag/core_data.hpp"
#include "adabag/pca_lda.hpp"
#include "adabag/pipeline.hpp"

namespace adabag {

nlohmann::json config_to_json(const RunConfig& config);

/// Unknown keys and ill-typed values are collected and reported together.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Deterministic summary of a run (no timings).
nlohmann::json report_json(const GroupedDataset& ds, const SplitIndex& split, const RunResult& result,
                           const RunConfig& config);

/// bfd.tsv, lambda_sweep.tsv, cutoff_sweep.tsv, report.json, wordcloud.tsv
/// and predictions.tsv.
void write_run_outputs(const std::filesystem::path& dir,
                       const GroupedDataset& ds,
                       const SplitIndex& split,
                       const RunResult& result,
                       const RunConfig& config);

/// Solver diagnostics along the lambda grid on the core rows: active-set
/// sizes (pooled and per group), objective, sweeps, convergence.
void write_path_dump(const std::filesystem::path& file,
                     const GroupedDataset& ds,
                     const SplitIndex& split,
                     const PenaltyWeights& weights,
                     const RunConfig& config);

nlohmann::json pca_report_json(const PcaLdaReport& report);

void write_text(const std::filesystem::path& file, const std::string& text);

} // namespace adabag
