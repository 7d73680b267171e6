#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adabag/core_data.hpp"

namespace adabag {

struct IngestOptions
{
    std::size_t min_reviews = 5;
    /// Target genres in priority order; a review in several goes to the first.
    std::vector<std::string> genres{"drama", "comedy", "horror"};
    std::optional<std::filesystem::path> polarity_file;
    std::size_t min_token_length = 2;
    bool lowercase = true;
    double lower = 4.0;  // class 0 iff rating <= lower
    double upper = 7.0;  // class 1 iff rating >= upper
    std::size_t jobs = 1;
};

struct IngestReport
{
    std::size_t reviews = 0;
    std::size_t dropped_band = 0;
    std::size_t dropped_no_genre = 0;
    std::size_t multi_genre = 0;
    std::size_t empty_rows = 0;
    std::size_t vocabulary = 0;
};

/// Lowercases (optionally), splits on anything that is not an ASCII letter
/// or digit, and drops tokens shorter than the minimum length.
std::vector<std::string> tokenize(std::string_view text, const IngestOptions& options = {});

/// Tokens found in at least `min_reviews` documents, sorted.
std::vector<std::string> build_vocab(const std::vector<std::vector<std::string>>& docs, std::size_t min_reviews);

/// Presence matrix over the vocabulary; repeated tokens count once.
SparseBinaryMatrix binarize(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& vocab);

/// `token<TAB>score` per line; blank lines and lines starting with '#' are
/// skipped. Anything else is an error naming the line.
std::unordered_map<std::string, double> read_polarity(const std::filesystem::path& file);

/// Lowercased genre list, split on ',' '|' or ';'.
std::vector<std::string> parse_genres(std::string_view field);

/// Raw corpus: `dir/metadata.tsv` with columns file, rating, genres, and the
/// review texts at the listed paths (relative to dir).
GroupedDataset ingest_raw(const std::filesystem::path& dir, const IngestOptions& options, IngestReport* report = nullptr);

/// Prebuilt bag of words: `imdb.vocab`, `imdbEr.txt` (used as polarity when
/// no polarity file is given), every `*.feat` file below dir in path order
/// (libsvm lines `rating idx:count ...`, rows numbered in that order) and
/// `genres.tsv` with columns row, genres.
GroupedDataset ingest_prebuilt(const std::filesystem::path& dir,
                               const IngestOptions& options,
                               IngestReport* report = nullptr);

} // namespace adabag
