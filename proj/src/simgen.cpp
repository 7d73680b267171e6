#include "adabag/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

#include "adabag/error.hpp"
#include "adabag/rng.hpp"

namespace adabag {

std::optional<PolarityVariant> parse_variant(std::string_view name)
{
    if (name == "equal") return PolarityVariant::equal;
    if (name == "structured") return PolarityVariant::structured;
    return std::nullopt;
}

std::string_view variant_name(PolarityVariant variant)
{
    return variant == PolarityVariant::equal ? "equal" : "structured";
}

void SimConfig::validate() const
{
    if (n == 0 || p == 0) fail(ErrorKind::config, "simulation: n and p must be positive");
    if (!(noise_var >= 0.0)) fail(ErrorKind::config, "simulation: noise variance must be non-negative");
    if (per_class < 4) fail(ErrorKind::config, "simulation: need at least 4 rows per class");
    for (const auto& b : blocks) {
        if (b.first > b.last || b.last >= p) fail(ErrorKind::config, "simulation: column block out of range");
        if (!(b.probability > 0.0 && b.probability < 1.0)) {
            fail(ErrorKind::config, "simulation: block probabilities must lie in (0, 1)");
        }
    }
    for (const auto& [j, v] : beta) {
        if (j >= p) fail(ErrorKind::config, "simulation: coefficient index out of range");
    }
}

std::vector<double> polarity_variant(PolarityVariant variant, std::size_t p)
{
    if (variant == PolarityVariant::equal) return std::vector<double>(p, 1.0);
    if (p != 77) fail(ErrorKind::config, "structured polarity is defined for 77 features only");

    std::vector<double> out(p, 0.0);
    const std::array<double, 8> a{-1, 1, -1, 1, 0.5, -0.5, -0.25, -0.125};
    const std::array<double, 12> b{0.25, 0.33, 0.33, 0.20, 0.20, 0.25, 0.20, 0.20, 0.20, 0.20, 0.20, 0.20};
    std::copy(a.begin(), a.end(), out.begin());
    std::copy(b.begin(), b.end(), out.begin() + 8);  // features 9..20
    // feature 21 belongs to the 9:21 block but b has only 12 entries
    out[20] = 0.2;
    spdlog::debug("structured polarity: feature 21 has no listed score, filled with 0.2");
    for (std::size_t i = 22; i <= 25; ++i) out[i - 1] = 0.2;
    for (std::size_t i = 26; i <= 75; ++i) out[i - 1] = 1.0 / static_cast<double>(i);
    out[75] = 1.25;
    out[76] = 1.25;
    return out;
}

SimData generate(const SimConfig& config)
{
    config.validate();
    Rng rng = make_rng(config.seed, SeedStage::simulate);

    std::vector<double> prob(config.p, 0.0);
    for (const auto& b : config.blocks) {
        for (std::size_t j = b.first; j <= b.last; ++j) prob[j] = b.probability;
    }
    std::vector<double> beta(config.p, 0.0);
    for (const auto& [j, v] : config.beta) beta[j] = v;

    std::vector<std::vector<FeatureIndex>> rows(config.n);
    std::vector<double> y(config.n, config.mu);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < config.n; ++i) {
        for (std::size_t j = 0; j < config.p; ++j) {
            if (unif(rng) < prob[j]) {
                rows[i].push_back(static_cast<FeatureIndex>(j));
                y[i] += beta[j];
            }
        }
    }
    std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_var));
    for (double& v : y) v += noise(rng);

    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(config.n);
    const double half = std::sqrt(config.noise_var);
    const ClassThresholds thresholds{ybar - half, ybar + half};
    if (!(thresholds.lower < thresholds.upper)) {
        fail(ErrorKind::data, "simulation: zero noise leaves an empty band; every row would be removed");
    }

    std::array<std::vector<Index>, 2> by_class;
    for (Index i = 0; i < config.n; ++i) {
        if (y[i] >= thresholds.upper) by_class[1].push_back(i);
        else if (y[i] <= thresholds.lower) by_class[0].push_back(i);
    }
    SimData out;
    out.generated = config.n;
    out.survived = by_class[0].size() + by_class[1].size();
    spdlog::info("simulation: removed {} of {} rows inside the band", config.n - out.survived, config.n);
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < config.per_class) {
            fail(ErrorKind::data, "simulation: only " + std::to_string(by_class[c].size()) + " rows of class " +
                                      std::to_string(c) + " survive (need " + std::to_string(config.per_class) +
                                      "); try another seed or a larger n");
        }
    }

    // pick per_class rows from each class, then deal them 2:1:1
    const std::size_t n_core = config.per_class / 2;
    const std::size_t n_val = (config.per_class - n_core) / 2;
    std::vector<Index> keep;
    std::array<std::vector<Index>, 3> role_rows;  // original row ids
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t k = 0; k < config.per_class; ++k) {
            const int role = k < n_core ? 0 : (k < n_core + n_val ? 1 : 2);
            role_rows[role].push_back(members[k]);
            keep.push_back(members[k]);
        }
    }
    std::sort(keep.begin(), keep.end());
    std::vector<Index> new_id(config.n, 0);
    std::vector<std::vector<FeatureIndex>> kept_rows;
    std::vector<double> kept_y;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        new_id[keep[k]] = k;
        kept_rows.push_back(std::move(rows[keep[k]]));
        kept_y.push_back(y[keep[k]]);
    }
    for (int role = 0; role < 3; ++role) {
        std::vector<Index>& target = role == 0 ? out.split.core : (role == 1 ? out.split.validation : out.split.test);
        for (Index i : role_rows[role]) target.push_back(new_id[i]);
        std::sort(target.begin(), target.end());
    }

    std::vector<std::string> names;
    names.reserve(config.p);
    for (std::size_t j = 0; j < config.p; ++j) names.push_back("f" + std::to_string(j + 1));
    out.dataset = GroupedDataset(SparseBinaryMatrix::from_rows(config.p, kept_rows), std::move(kept_y),
                                 std::vector<GroupId>(keep.size(), 0), {"all"}, thresholds, std::move(names),
                                 polarity_variant(config.variant, config.p));
    for (const auto& [j, v] : config.beta) {
        if (v != 0.0) out.true_support.push_back(j);
    }
    std::sort(out.true_support.begin(), out.true_support.end());
    return out;
}

} // namespace adabag
