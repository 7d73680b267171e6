#include "adabag/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "adabag/error.hpp"
#include "adabag/parallel.hpp"

namespace adabag {

namespace fs = std::filesystem;

std::vector<std::string> tokenize(std::string_view text, const IngestOptions& options)
{
    std::vector<std::string> out;
    std::string cur;
    const auto flush = [&] {
        if (cur.size() >= options.min_token_length) out.push_back(cur);
        cur.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 128 && std::isalnum(c)) {
            cur.push_back(options.lowercase ? static_cast<char>(std::tolower(c)) : ch);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::vector<std::string> build_vocab(const std::vector<std::vector<std::string>>& docs, std::size_t min_reviews)
{
    if (min_reviews < 1) fail(ErrorKind::config, "min_reviews must be >= 1");
    if (docs.empty()) fail(ErrorKind::data, "vocabulary: empty corpus");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::vector<std::string> distinct(doc);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (auto& t : distinct) ++df[t];
    }
    std::vector<std::string> vocab;
    for (const auto& [token, count] : df) {
        if (count >= min_reviews) vocab.push_back(token);
    }
    if (vocab.empty()) {
        fail(ErrorKind::data, "vocabulary: no token appears in " + std::to_string(min_reviews) + " or more reviews");
    }
    return vocab;
}

SparseBinaryMatrix binarize(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& vocab)
{
    if (vocab.empty()) fail(ErrorKind::invalid_argument, "binarize: empty vocabulary");
    std::unordered_map<std::string, FeatureIndex> index;
    index.reserve(vocab.size());
    for (std::size_t j = 0; j < vocab.size(); ++j) index.emplace(vocab[j], static_cast<FeatureIndex>(j));
    std::vector<std::vector<FeatureIndex>> rows(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& t : docs[i]) {
            if (const auto it = index.find(t); it != index.end()) rows[i].push_back(it->second);
        }
    }
    return SparseBinaryMatrix::from_rows(vocab.size(), rows);
}

std::unordered_map<std::string, double> read_polarity(const fs::path& file)
{
    std::ifstream in(file);
    if (!in) fail(ErrorKind::io, "cannot open polarity file " + file.string());
    std::unordered_map<std::string, double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        const auto bad = [&](const std::string& why) {
            fail(ErrorKind::data, "polarity file " + file.filename().string() + " line " + std::to_string(line_no) +
                                      ": " + why);
        };
        if (tab == std::string::npos || tab == 0) bad("expected token<TAB>score");
        const std::string token = line.substr(0, tab);
        const std::string value = line.substr(tab + 1);
        double v = 0.0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
            bad("bad score '" + value + "'");
        }
        out[token] = v;
    }
    return out;
}

std::vector<std::string> parse_genres(std::string_view field)
{
    std::vector<std::string> out;
    std::string cur;
    const auto flush = [&] {
        const auto b = cur.find_first_not_of(' ');
        const auto e = cur.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char ch : field) {
        if (ch == ',' || ch == '|' || ch == ';') flush();
        else cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    flush();
    return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) out.push_back(field);
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

double parse_rating(const std::string& s, const std::string& where)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 1.0 || v > 10.0) {
        fail(ErrorKind::data, where + ": rating must be a number in 1..10, got '" + s + "'");
    }
    return v;
}

// Groups, band removal and polarity; shared by both input modes.
GroupedDataset assemble(const SparseBinaryMatrix& x,
                        const std::vector<double>& ratings,
                        const std::vector<std::vector<std::string>>& genres,
                        std::vector<std::string> vocab,
                        const std::unordered_map<std::string, double>& polarity_map,
                        const IngestOptions& options,
                        IngestReport& report)
{
    if (options.genres.empty()) fail(ErrorKind::config, "at least one genre is required");
    std::vector<std::string> targets;
    for (const auto& g : options.genres) targets.push_back(parse_genres(g).empty() ? g : parse_genres(g).front());

    std::vector<Index> keep;
    std::vector<GroupId> groups;
    std::vector<double> y;
    for (Index i = 0; i < x.n_rows(); ++i) {
        std::size_t matches = 0;
        std::optional<GroupId> group;
        for (std::size_t g = 0; g < targets.size(); ++g) {
            if (std::find(genres[i].begin(), genres[i].end(), targets[g]) != genres[i].end()) {
                ++matches;
                if (!group) group = static_cast<GroupId>(g);
            }
        }
        if (!group) {
            ++report.dropped_no_genre;
            continue;
        }
        if (matches > 1) ++report.multi_genre;
        keep.push_back(i);
        groups.push_back(*group);
        y.push_back(ratings[i]);
    }
    if (report.dropped_no_genre > 0) {
        spdlog::info("ingest: {} reviews have none of the target genres and were dropped", report.dropped_no_genre);
    }
    if (report.multi_genre > 0) {
        spdlog::info("ingest: {} reviews match several target genres; each went to the first in priority order",
                     report.multi_genre);
    }

    std::vector<double> polarity(vocab.size(), 0.0);
    std::size_t unknown = 0;
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        if (const auto it = polarity_map.find(vocab[j]); it != polarity_map.end()) {
            polarity[j] = it->second;
        } else {
            ++unknown;
        }
    }
    if (unknown > 0) spdlog::info("ingest: {} of {} tokens have no polarity score (set to 0)", unknown, vocab.size());

    std::size_t dropped = 0;
    GroupedDataset ds = GroupedDataset::drop_middle_band(x.select_rows(keep), std::move(y), std::move(groups), targets,
                                                         ClassThresholds{options.lower, options.upper},
                                                         std::move(vocab), std::move(polarity), &dropped);
    report.dropped_band = dropped;
    spdlog::info("ingest: dropped {} reviews with rating strictly between {} and {}", dropped, options.lower,
                 options.upper);
    for (Index i = 0; i < ds.n_rows(); ++i) report.empty_rows += ds.x().row(i).empty() ? 1 : 0;
    if (report.empty_rows > 0) spdlog::warn("ingest: {} kept reviews contain no vocabulary token", report.empty_rows);
    report.vocabulary = ds.n_features();
    return ds;
}

std::string read_file(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

GroupedDataset ingest_raw(const fs::path& dir, const IngestOptions& options, IngestReport* report_out)
{
    const fs::path meta_file = dir / "metadata.tsv";
    std::ifstream in(meta_file);
    if (!in) fail(ErrorKind::io, "cannot open " + meta_file.string());
    std::vector<fs::path> files;
    std::vector<double> ratings;
    std::vector<std::vector<std::string>> genres;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("file", 0) == 0)) continue;
        const auto f = split_tabs(line);
        const std::string where = "metadata.tsv line " + std::to_string(line_no);
        if (f.size() != 3) fail(ErrorKind::data, where + ": expected columns file, rating, genres");
        files.push_back(dir / f[0]);
        ratings.push_back(parse_rating(f[1], where));
        genres.push_back(parse_genres(f[2]));
    }
    if (files.empty()) fail(ErrorKind::data, "ingest: metadata.tsv lists no reviews");

    std::vector<std::vector<std::string>> docs(files.size());
    parallel_for(files.size(), options.jobs, [&](std::size_t i) { docs[i] = tokenize(read_file(files[i]), options); });

    std::vector<std::string> vocab = build_vocab(docs, options.min_reviews);
    const SparseBinaryMatrix x = binarize(docs, vocab);
    std::unordered_map<std::string, double> polarity;
    if (options.polarity_file) polarity = read_polarity(*options.polarity_file);

    IngestReport report;
    report.reviews = files.size();
    GroupedDataset ds = assemble(x, ratings, genres, std::move(vocab), polarity, options, report);
    if (report_out) *report_out = report;
    return ds;
}

GroupedDataset ingest_prebuilt(const fs::path& dir, const IngestOptions& options, IngestReport* report_out)
{
    if (options.min_reviews < 1) fail(ErrorKind::config, "min_reviews must be >= 1");
    std::vector<std::string> base_vocab;
    {
        std::ifstream in(dir / "imdb.vocab");
        if (!in) fail(ErrorKind::io, "cannot open " + (dir / "imdb.vocab").string());
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            base_vocab.push_back(line);
        }
    }

    std::vector<fs::path> feat_files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".feat") feat_files.push_back(entry.path());
    }
    std::sort(feat_files.begin(), feat_files.end());
    if (feat_files.empty()) fail(ErrorKind::data, "prebuilt: no *.feat files under " + dir.string());

    std::vector<std::vector<std::uint32_t>> rows;
    std::vector<double> ratings;
    for (const auto& file : feat_files) {
        std::ifstream in(file);
        if (!in) fail(ErrorKind::io, "cannot open " + file.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const std::string where = file.filename().string() + " line " + std::to_string(line_no);
            std::istringstream ss(line);
            std::string field;
            ss >> field;
            ratings.push_back(parse_rating(field, where));
            std::vector<std::uint32_t> ids;
            while (ss >> field) {
                const auto colon = field.find(':');
                std::uint32_t id = 0;
                const auto res = std::from_chars(field.data(), field.data() + (colon == std::string::npos ? field.size() : colon), id);
                if (res.ec != std::errc{} || id >= base_vocab.size()) {
                    fail(ErrorKind::data, where + ": bad feature '" + field + "'");
                }
                ids.push_back(id);
            }
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            rows.push_back(std::move(ids));
        }
    }

    std::vector<std::vector<std::string>> genres(rows.size());
    {
        const fs::path file = dir / "genres.tsv";
        std::ifstream in(file);
        if (!in) fail(ErrorKind::io, "cannot open " + file.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || (line_no == 1 && line.rfind("row", 0) == 0)) continue;
            const auto f = split_tabs(line);
            std::size_t row = 0;
            const auto res = f.empty() ? std::from_chars_result{nullptr, std::errc::invalid_argument}
                                       : std::from_chars(f[0].data(), f[0].data() + f[0].size(), row);
            if (f.size() != 2 || res.ec != std::errc{} || row >= rows.size()) {
                fail(ErrorKind::data, "genres.tsv line " + std::to_string(line_no) + ": expected row<TAB>genres");
            }
            genres[row] = parse_genres(f[1]);
        }
    }

    std::vector<std::size_t> df(base_vocab.size(), 0);
    for (const auto& r : rows) {
        for (auto id : r) ++df[id];
    }
    std::vector<std::uint32_t> kept;
    for (std::uint32_t id = 0; id < base_vocab.size(); ++id) {
        if (df[id] >= options.min_reviews) kept.push_back(id);
    }
    if (kept.empty()) fail(ErrorKind::data, "vocabulary: no token reaches the document-frequency threshold");
    std::stable_sort(kept.begin(), kept.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return base_vocab[a] < base_vocab[b]; });
    std::vector<long> remap(base_vocab.size(), -1);
    std::vector<std::string> vocab;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        remap[kept[k]] = static_cast<long>(k);
        vocab.push_back(base_vocab[kept[k]]);
    }
    std::vector<std::vector<FeatureIndex>> mapped(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto id : rows[i]) {
            if (remap[id] >= 0) mapped[i].push_back(static_cast<FeatureIndex>(remap[id]));
        }
    }
    const SparseBinaryMatrix x = SparseBinaryMatrix::from_rows(vocab.size(), mapped);

    std::unordered_map<std::string, double> polarity;
    if (options.polarity_file) {
        polarity = read_polarity(*options.polarity_file);
    } else if (fs::exists(dir / "imdbEr.txt")) {
        std::ifstream in(dir / "imdbEr.txt");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line) && line_no < base_vocab.size()) {
            double v = 0.0;
            const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
            if (res.ec != std::errc{}) {
                fail(ErrorKind::data, "imdbEr.txt line " + std::to_string(line_no + 1) + ": bad score");
            }
            polarity[base_vocab[line_no]] = v;
            ++line_no;
        }
    }

    IngestReport report;
    report.reviews = rows.size();
    GroupedDataset ds = assemble(x, ratings, genres, std::move(vocab), polarity, options, report);
    if (report_out) *report_out = report;
    return ds;
}

} // namespace adabag
