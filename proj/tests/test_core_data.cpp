#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "adabag/core_data.hpp"
#include "adabag/error.hpp"
#include "adabag/rng.hpp"

using namespace adabag;

namespace {

GroupedDataset toy(std::size_t n, std::size_t G, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::vector<FeatureIndex>> rows(n);
    std::vector<double> y(n);
    std::vector<GroupId> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rng() % 2) rows[i].push_back(0);
        if (rng() % 3 == 0) rows[i].push_back(2);
        y[i] = (rng() % 2) ? 8.0 : 2.0;
        g[i] = static_cast<GroupId>(rng() % G);
    }
    std::vector<std::string> names;
    for (std::size_t k = 0; k < G; ++k) names.push_back("g" + std::to_string(k));
    return GroupedDataset(SparseBinaryMatrix::from_rows(3, rows), y, g, names, {4.0, 7.0}, {"a", "b", "c"},
                          {0.5, -0.5, 0.1});
}

} // namespace

TEST_CASE("sparse matrix layout is validated")
{
    CHECK_NOTHROW(SparseBinaryMatrix(2, 3, {0, 1, 3}, {2, 0, 1}));
    CHECK_THROWS_AS(SparseBinaryMatrix(2, 3, {0, 1}, {2}), Error);           // offsets too short
    CHECK_THROWS_AS(SparseBinaryMatrix(2, 3, {0, 2, 1}, {0, 1}), Error);     // decreasing offsets
    CHECK_THROWS_AS(SparseBinaryMatrix(1, 3, {0, 2}, {1, 1}), Error);        // repeated column
    CHECK_THROWS_AS(SparseBinaryMatrix(1, 3, {0, 1}, {3}), Error);           // column out of range
}

TEST_CASE("from_rows collapses repeated presence")
{
    const auto x = SparseBinaryMatrix::from_rows(4, {{3, 1, 3}, {}, {0}});
    CHECK(x.n_rows() == 3);
    CHECK(x.nnz() == 3);
    CHECK(std::vector<FeatureIndex>(x.row(0).begin(), x.row(0).end()) == std::vector<FeatureIndex>{1, 3});
    CHECK(x.contains(0, 3));
    CHECK_FALSE(x.contains(1, 0));
    CHECK(x.column_counts() == std::vector<std::size_t>{1, 1, 0, 1});
}

TEST_CASE("row and column selection")
{
    const auto x = SparseBinaryMatrix::from_rows(4, {{0, 2}, {1}, {2, 3}});
    const std::vector<Index> rows{2, 0, 2};
    const auto r = x.select_rows(rows);
    CHECK(r.n_rows() == 3);
    CHECK(r.contains(0, 3));
    CHECK(r.contains(1, 0));
    CHECK(r.contains(2, 2));
    const std::vector<FeatureIndex> cols{2, 3};
    const auto c = x.select_cols(cols);
    CHECK(c.n_cols() == 2);
    CHECK(c.contains(0, 0));
    CHECK(c.row(1).empty());
    CHECK(c.contains(2, 1));
}

TEST_CASE("class labels and the middle band")
{
    CHECK(label_class(4.0, 4.0, 7.0) == 0);
    CHECK(label_class(7.0, 4.0, 7.0) == 1);
    CHECK(label_class(-1.0, 4.0, 7.0) == 0);
    CHECK_THROWS_AS(label_class(5.5, 4.0, 7.0), Error);

    const auto x = SparseBinaryMatrix::from_rows(1, {{0}, {}, {0}, {}});
    CHECK_THROWS_AS(GroupedDataset(x, {1, 5, 8, 9}, {0, 0, 0, 0}, {"g"}, {4, 7}, {"w"}, {0.1}), Error);
    std::size_t dropped = 0;
    const auto ds = GroupedDataset::drop_middle_band(x, {1, 5, 8, 9}, {0, 0, 0, 0}, {"g"}, {4, 7}, {"w"}, {0.1}, &dropped);
    CHECK(dropped == 1);
    CHECK(ds.n_rows() == 3);
    CHECK(ds.classes() == std::vector<int>{0, 1, 1});
    CHECK(ds.x().contains(1, 0));
}

TEST_CASE("stratified split apportions every cell 2:1:1")
{
    const GroupedDataset ds = toy(203, 3, 5);
    const SplitIndex s = stratified_split(ds, 9);
    std::set<Index> all;
    for (const auto* part : {&s.core, &s.validation, &s.test}) {
        CHECK(std::is_sorted(part->begin(), part->end()));
        all.insert(part->begin(), part->end());
    }
    CHECK(all.size() == ds.n_rows());
    CHECK(s.core.size() + s.validation.size() + s.test.size() == ds.n_rows());

    std::map<std::pair<GroupId, int>, std::array<std::size_t, 3>> cells;
    const std::array<const std::vector<Index>*, 3> parts{&s.core, &s.validation, &s.test};
    for (std::size_t k = 0; k < 3; ++k) {
        for (Index i : *parts[k]) ++cells[{ds.groups()[i], ds.class_of(i)}][k];
    }
    for (const auto& [key, c] : cells) {
        const double total = static_cast<double>(c[0] + c[1] + c[2]);
        CHECK(std::abs(static_cast<double>(c[0]) - total / 2.0) < 1.0);
        CHECK(std::abs(static_cast<double>(c[1]) - total / 4.0) < 1.0);
        CHECK(std::abs(static_cast<double>(c[2]) - total / 4.0) < 1.0);
    }
    CHECK(stratified_split(ds, 9) == s);
    CHECK_FALSE(stratified_split(ds, 10) == s);
}

TEST_CASE("stratified split rejects an empty cell")
{
    const auto x = SparseBinaryMatrix::from_rows(1, {{0}, {}, {0}});
    const GroupedDataset ds(x, {8, 8, 1}, {0, 0, 1}, {"a", "b"}, {4, 7}, {"w"}, {0.1});
    CHECK_THROWS_AS(stratified_split(ds, 1), Error);
}

TEST_CASE("bootstrap keeps class counts and draws within class")
{
    std::vector<Index> core;
    for (Index i = 0; i < 300; ++i) core.push_back(3 * i);
    const auto class_of = [](Index i) { return (i / 3) % 4 == 0 ? 1 : 0; };
    const auto sample = bootstrap_resample(core, class_of, 77);
    REQUIRE(sample.size() == core.size());
    const std::size_t ones = static_cast<std::size_t>(std::count_if(core.begin(), core.end(), [&](Index i) {
        return class_of(i) == 1;
    }));
    // class 0 first, then class 1, each of its original size
    for (std::size_t k = 0; k < sample.size(); ++k) {
        CHECK(class_of(sample[k]) == (k < core.size() - ones ? 0 : 1));
        CHECK(std::binary_search(core.begin(), core.end(), sample[k]));
    }
    // distinct draws: n (1 - (1 - 1/n)^n) in expectation, per class
    const std::set<Index> distinct(sample.begin(), sample.end());
    double expected = 0.0;
    for (double n : {static_cast<double>(core.size() - ones), static_cast<double>(ones)}) {
        expected += n * (1.0 - std::pow(1.0 - 1.0 / n, n));
    }
    CHECK(std::abs(static_cast<double>(distinct.size()) - expected) < 25.0);
    CHECK(bootstrap_resample(core, class_of, 77) == sample);
}

TEST_CASE("bootstrap multiplicities follow the binomial law")
{
    // over many draws the multiplicity of one row is Binomial(n, 1/n)
    std::vector<Index> core(50);
    for (Index i = 0; i < core.size(); ++i) core[i] = i;
    const auto class_of = [](Index) { return 0; };
    std::array<double, 4> hist{};
    const int draws = 4000;
    for (int s = 0; s < draws; ++s) {
        const auto sample = bootstrap_resample(core, class_of, sub_seed(3, SeedStage::bootstrap, s));
        const auto m = static_cast<std::size_t>(std::count(sample.begin(), sample.end(), Index{7}));
        ++hist[std::min<std::size_t>(m, 3)];
    }
    const double n = 50.0;
    const double p0 = std::pow(1.0 - 1.0 / n, n);
    const double p1 = n * (1.0 / n) * std::pow(1.0 - 1.0 / n, n - 1.0);
    CHECK(std::abs(hist[0] / draws - p0) < 0.03);
    CHECK(std::abs(hist[1] / draws - p1) < 0.03);
}

TEST_CASE("seed streams are distinct per stage and index")
{
    std::set<std::uint64_t> seen;
    for (auto stage : {SeedStage::split, SeedStage::bootstrap, SeedStage::bootstrap_retry, SeedStage::simulate}) {
        for (std::uint64_t r = 0; r < 100; ++r) seen.insert(sub_seed(1, stage, r));
    }
    CHECK(seen.size() == 400);
    CHECK(sub_seed(1, SeedStage::split) != sub_seed(2, SeedStage::split));
}
