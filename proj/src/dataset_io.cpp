#include "adabag/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "adabag/error.hpp"

namespace adabag {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ifstream open_in(const fs::path& file)
{
    std::ifstream in(file);
    if (!in) fail(ErrorKind::io, "cannot open " + file.string());
    return in;
}

std::ofstream open_out(const fs::path& file)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + file.string());
    return out;
}

std::vector<std::string> split_tabs(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

[[noreturn]] void bad_line(const fs::path& file, std::size_t line_no, const std::string& what)
{
    fail(ErrorKind::data, file.filename().string() + " line " + std::to_string(line_no) + ": " + what);
}

template <class T>
T parse_number(const std::string& s, const fs::path& file, std::size_t line_no)
{
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) bad_line(file, line_no, "bad number '" + s + "'");
    return v;
}

SparseBinaryMatrix read_matrix(const fs::path& file)
{
    auto in = open_in(file);
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::size_t nnz = 0;
    if (!(in >> n_rows >> n_cols >> nnz)) fail(ErrorKind::data, file.filename().string() + ": bad header");
    std::vector<std::vector<FeatureIndex>> rows(n_rows);
    std::size_t count = 0;
    std::size_t r = 0;
    std::size_t c = 0;
    while (in >> r >> c) {
        if (r >= n_rows || c >= n_cols) {
            fail(ErrorKind::data, file.filename().string() + ": entry " + std::to_string(count + 1) + " out of range");
        }
        rows[r].push_back(static_cast<FeatureIndex>(c));
        ++count;
    }
    if (!in.eof()) fail(ErrorKind::data, file.filename().string() + ": unreadable entry after " + std::to_string(count));
    if (count != nnz) {
        fail(ErrorKind::data, file.filename().string() + ": header says " + std::to_string(nnz) + " entries, found " +
                                  std::to_string(count));
    }
    return SparseBinaryMatrix::from_rows(n_cols, rows);
}

} // namespace

SplitIndex read_split(const fs::path& file, std::size_t n_rows)
{
    auto in = open_in(file);
    SplitIndex split;
    std::string line;
    std::size_t line_no = 0;
    std::vector<char> seen(n_rows, 0);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("row_id", 0) == 0)) continue;
        const auto f = split_tabs(line);
        if (f.size() != 2) bad_line(file, line_no, "expected 2 columns");
        const auto row = parse_number<std::size_t>(f[0], file, line_no);
        if (row >= n_rows) bad_line(file, line_no, "row id out of range");
        if (seen[row]) bad_line(file, line_no, "row listed twice");
        seen[row] = 1;
        if (f[1] == "core") split.core.push_back(row);
        else if (f[1] == "validation") split.validation.push_back(row);
        else if (f[1] == "test") split.test.push_back(row);
        else bad_line(file, line_no, "unknown set '" + f[1] + "'");
    }
    std::sort(split.core.begin(), split.core.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

void write_split(const fs::path& file, const SplitIndex& split)
{
    std::vector<std::pair<Index, const char*>> rows;
    for (Index i : split.core) rows.emplace_back(i, "core");
    for (Index i : split.validation) rows.emplace_back(i, "validation");
    for (Index i : split.test) rows.emplace_back(i, "test");
    std::sort(rows.begin(), rows.end());
    auto out = open_out(file);
    out << "row_id\tset\n";
    for (const auto& [i, s] : rows) out << i << '\t' << s << '\n';
}

DatasetFiles load_dataset(const fs::path& dir, std::optional<ClassThresholds> thresholds)
{
    if (!fs::is_directory(dir)) fail(ErrorKind::io, "dataset directory not found: " + dir.string());
    SparseBinaryMatrix x = read_matrix(dir / "matrix.smx");

    json meta = json::object();
    if (fs::exists(dir / "dataset.json")) {
        auto in = open_in(dir / "dataset.json");
        try {
            meta = json::parse(in);
        } catch (const json::exception& e) {
            fail(ErrorKind::data, "dataset.json: " + std::string(e.what()));
        }
    }
    if (!thresholds) {
        if (!meta.contains("lower") || !meta.contains("upper")) {
            fail(ErrorKind::config, "class thresholds missing: give them on the command line or in dataset.json");
        }
        thresholds = ClassThresholds{meta["lower"].get<double>(), meta["upper"].get<double>()};
    }

    std::vector<std::string> group_names;
    std::map<std::string, GroupId> group_ids;
    if (meta.contains("groups")) {
        for (const auto& g : meta["groups"]) {
            group_ids.emplace(g.get<std::string>(), static_cast<GroupId>(group_names.size()));
            group_names.push_back(g.get<std::string>());
        }
    }

    std::vector<double> y(x.n_rows(), 0.0);
    std::vector<GroupId> groups(x.n_rows(), 0);
    {
        const fs::path file = dir / "labels.tsv";
        auto in = open_in(file);
        std::string line;
        std::size_t line_no = 0;
        std::vector<char> seen(x.n_rows(), 0);
        std::size_t count = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || (line_no == 1 && line.rfind("row_id", 0) == 0)) continue;
            const auto f = split_tabs(line);
            if (f.size() != 3) bad_line(file, line_no, "expected 3 columns");
            const auto row = parse_number<std::size_t>(f[0], file, line_no);
            if (row >= x.n_rows()) bad_line(file, line_no, "row id out of range");
            if (seen[row]) bad_line(file, line_no, "row listed twice");
            seen[row] = 1;
            ++count;
            y[row] = parse_number<double>(f[1], file, line_no);
            auto it = group_ids.find(f[2]);
            if (it == group_ids.end()) {
                if (meta.contains("groups")) bad_line(file, line_no, "group '" + f[2] + "' not listed in dataset.json");
                it = group_ids.emplace(f[2], static_cast<GroupId>(group_names.size())).first;
                group_names.push_back(f[2]);
            }
            groups[row] = it->second;
        }
        if (count != x.n_rows()) fail(ErrorKind::data, "labels.tsv: expected one line per matrix row");
    }

    std::vector<std::string> names(x.n_cols());
    std::vector<double> polarity(x.n_cols(), 0.0);
    {
        const fs::path file = dir / "features.tsv";
        auto in = open_in(file);
        std::string line;
        std::size_t line_no = 0;
        std::size_t count = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || (line_no == 1 && line.rfind("col_id", 0) == 0)) continue;
            const auto f = split_tabs(line);
            if (f.size() != 3) bad_line(file, line_no, "expected 3 columns");
            const auto col = parse_number<std::size_t>(f[0], file, line_no);
            if (col >= x.n_cols()) bad_line(file, line_no, "column id out of range");
            names[col] = f[1];
            polarity[col] = parse_number<double>(f[2], file, line_no);
            ++count;
        }
        if (count != x.n_cols()) fail(ErrorKind::data, "features.tsv: expected one line per matrix column");
    }

    DatasetFiles out;
    out.dataset = GroupedDataset(std::move(x), std::move(y), std::move(groups), std::move(group_names), *thresholds,
                                 std::move(names), std::move(polarity));
    if (meta.contains("true_support")) out.true_support = meta["true_support"].get<std::vector<FeatureIndex>>();
    if (fs::exists(dir / "split.tsv")) out.split = read_split(dir / "split.tsv", out.dataset.n_rows());
    return out;
}

void save_dataset(const fs::path& dir, const GroupedDataset& ds, const SplitIndex* split,
                  std::span<const FeatureIndex> true_support)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    {
        auto out = open_out(dir / "matrix.smx");
        out << ds.n_rows() << '\t' << ds.n_features() << '\t' << ds.x().nnz() << '\n';
        for (Index i = 0; i < ds.n_rows(); ++i) {
            for (FeatureIndex j : ds.x().row(i)) out << i << '\t' << j << '\n';
        }
    }
    {
        auto out = open_out(dir / "labels.tsv");
        out << "row_id\ty\tgroup\n";
        for (Index i = 0; i < ds.n_rows(); ++i) {
            out << i << '\t' << format_real(ds.y()[i]) << '\t' << ds.group_names()[ds.groups()[i]] << '\n';
        }
    }
    {
        auto out = open_out(dir / "features.tsv");
        out << "col_id\ttoken\tpolarity\n";
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            out << j << '\t' << ds.feature_names()[j] << '\t' << format_real(ds.polarity()[j]) << '\n';
        }
    }
    json meta;
    meta["lower"] = ds.thresholds().lower;
    meta["upper"] = ds.thresholds().upper;
    meta["groups"] = ds.group_names();
    if (!true_support.empty()) meta["true_support"] = std::vector<FeatureIndex>(true_support.begin(), true_support.end());
    {
        auto out = open_out(dir / "dataset.json");
        out << meta.dump(2) << '\n';
    }
    if (split) write_split(dir / "split.tsv", *split);
}

} // namespace adabag
