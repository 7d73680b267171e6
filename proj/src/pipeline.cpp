#include "adabag/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "adabag/error.hpp"
#include "adabag/parallel.hpp"
#include "adabag/rng.hpp"

namespace adabag {

std::vector<std::string> RunConfig::validate() const
{
    std::vector<std::string> problems;
    if (bootstrap_replicates < 1) problems.emplace_back("bootstrap replicates must be >= 1");
    if (grid_size < 2) problems.emplace_back("lambda grid size must be >= 2");
    if (!(grid_eps > 0.0 && grid_eps < 1.0)) problems.emplace_back("lambda grid ratio must lie in (0, 1)");
    if (!(relative_tol > 0.0)) problems.emplace_back("solver tolerance must be positive");
    if (max_iter < 1) problems.emplace_back("solver max_iter must be >= 1");
    if (!(polarity_tol > 0.0)) problems.emplace_back("polarity tolerance must be positive");
    if (jobs < 1) problems.emplace_back("jobs must be >= 1");
    if (scheme == WeightScheme::custom) {
        if (custom_group_weights.empty()) problems.emplace_back("custom scheme requires group weights");
        for (double r : custom_group_weights) {
            if (!(r > 0.0) || !std::isfinite(r)) {
                problems.emplace_back("custom group weights must be positive and finite");
                break;
            }
        }
    }
    return problems;
}

double LambdaSweep::error_rate(std::size_t i) const
{
    return n_validation == 0 ? 0.0 : static_cast<double>(errors.at(i)) / static_cast<double>(n_validation);
}

namespace {

double response_scale(const GroupedDataset& ds, std::span<const Index> rows)
{
    if (rows.size() < 2) return 1.0;
    double mean = 0.0;
    for (Index i : rows) mean += ds.y()[i];
    mean /= static_cast<double>(rows.size());
    double ss = 0.0;
    for (Index i : rows) ss += (ds.y()[i] - mean) * (ds.y()[i] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(rows.size() - 1));
    return sd > 0.0 ? sd : 1.0;
}

std::vector<std::vector<Index>> rows_by_group(const GroupedDataset& ds, std::span<const Index> rows)
{
    std::vector<std::vector<Index>> out(ds.n_groups());
    for (Index i : rows) out[ds.groups()[i]].push_back(i);
    return out;
}

std::vector<FeatureIndex> set_union(const std::vector<std::vector<FeatureIndex>>& sets)
{
    std::vector<FeatureIndex> out;
    for (const auto& s : sets) out.insert(out.end(), s.begin(), s.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Per-group OLS. A group without fitting rows has never been seen in
// training; it is routed to the pooled fit over the union of column sets.
std::vector<OlsFit> fit_group_aware(const GroupedDataset& ds,
                                    const std::vector<std::vector<Index>>& by_group,
                                    std::span<const Index> all_rows,
                                    const std::vector<std::vector<FeatureIndex>>& sets,
                                    double sigma_floor)
{
    std::vector<OlsFit> fits(ds.n_groups());
    bool need_pooled = false;
    for (std::size_t g = 0; g < ds.n_groups(); ++g) {
        if (by_group[g].empty()) {
            need_pooled = true;
            continue;
        }
        fits[g] = ols_fit(ds.x(), by_group[g], sets[g], ds.y(), sigma_floor);
    }
    if (need_pooled) {
        const OlsFit pooled = ols_fit(ds.x(), all_rows, set_union(sets), ds.y(), sigma_floor);
        for (std::size_t g = 0; g < ds.n_groups(); ++g) {
            if (by_group[g].empty()) fits[g] = pooled;
        }
    }
    return fits;
}

std::size_t count_errors(const GroupedDataset& ds, std::span<const Index> rows, const std::vector<OlsFit>& fits)
{
    std::size_t wrong = 0;
    for (Index i : rows) {
        const double mean = fits[ds.groups()[i]].predict(ds.x().row(i));
        wrong += probit_label(mean, ds.thresholds()) != ds.class_of(i) ? 1 : 0;
    }
    return wrong;
}

std::size_t count_errors_pooled(const GroupedDataset& ds, std::span<const Index> rows, const OlsFit& fit)
{
    std::size_t wrong = 0;
    for (Index i : rows) {
        wrong += probit_label(fit.predict(ds.x().row(i)), ds.thresholds()) != ds.class_of(i) ? 1 : 0;
    }
    return wrong;
}

std::vector<Index> merge_rows(std::span<const Index> a, std::span<const Index> b)
{
    std::vector<Index> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> core_group_sizes(const GroupedDataset& ds, std::span<const Index> core)
{
    std::vector<std::size_t> sizes(ds.n_groups(), 0);
    for (Index i : core) ++sizes[ds.groups()[i]];
    return sizes;
}

} // namespace

LambdaSweep optimize_lambda(const GroupedDataset& ds,
                            std::span<const Index> core_rows,
                            std::span<const Index> validation,
                            const PenaltyWeights& weights,
                            const RunConfig& config)
{
    if (core_rows.empty()) fail(ErrorKind::data, "optimize_lambda: empty core set");
    if (validation.empty()) fail(ErrorKind::data, "optimize_lambda: empty validation set");
    const std::size_t G = ds.n_groups();

    const SparseBinaryMatrix x_core = ds.x().select_rows(core_rows);
    std::vector<GroupId> g_core;
    std::vector<double> y_core;
    g_core.reserve(core_rows.size());
    y_core.reserve(core_rows.size());
    for (Index i : core_rows) {
        g_core.push_back(ds.groups()[i]);
        y_core.push_back(ds.y()[i]);
    }

    const DslDesign design =
        build_dsl_design(x_core, g_core, G, weights.group, weights.feature, config.standardize);
    const WeightedLasso solver = design.problem();
    const std::vector<double> y_centered = center_by_group(y_core, g_core, G);
    const double scale = response_scale(ds, core_rows);
    const LambdaGrid grid = make_lambda_grid(solver, y_centered, config.grid_size, config.grid_eps);
    const SolverOptions options{config.relative_tol * scale, config.max_iter};
    const std::vector<PathPoint> path = solver.fit_path(y_centered, grid, options);

    const double sigma_floor = 1e-6 * scale;
    const auto by_group = rows_by_group(ds, core_rows);
    const bool every_group_seen =
        std::none_of(by_group.begin(), by_group.end(), [](const auto& r) { return r.empty(); });

    LambdaSweep sweep;
    sweep.n_validation = validation.size();
    std::vector<std::vector<FeatureIndex>> previous_sets;
    std::vector<OlsFit> fits;
    std::vector<std::vector<std::vector<FeatureIndex>>> sets_along_path;
    sets_along_path.reserve(path.size());
    std::size_t previous_errors = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        auto sets = active_sets(design, path[k].coefficients);
        std::size_t errors = previous_errors;
        if (k == 0 || sets != previous_sets || !every_group_seen) {
            if (every_group_seen && k > 0) {
                // refit only the groups whose active set moved
                for (std::size_t g = 0; g < G; ++g) {
                    if (sets[g] != previous_sets[g]) {
                        fits[g] = ols_fit(ds.x(), by_group[g], sets[g], ds.y(), sigma_floor);
                    }
                }
            } else {
                fits = fit_group_aware(ds, by_group, core_rows, sets, sigma_floor);
            }
            errors = count_errors(ds, validation, fits);
        }
        sweep.lambdas.push_back(path[k].lambda);
        sweep.errors.push_back(errors);
        sweep.support_sizes.push_back(set_union(sets).size());
        sweep.objectives.push_back(path[k].objective);
        sweep.converged.push_back(path[k].converged ? 1 : 0);
        previous_errors = errors;
        previous_sets = sets;
        sets_along_path.push_back(std::move(sets));
    }

    // grid is decreasing, so the first minimum is the sparsest
    sweep.best = static_cast<std::size_t>(
        std::min_element(sweep.errors.begin(), sweep.errors.end()) - sweep.errors.begin());
    sweep.group_support = std::move(sets_along_path[sweep.best]);
    sweep.support = set_union(sweep.group_support);
    return sweep;
}

BfdTable run_bagging(const GroupedDataset& ds,
                     const SplitIndex& split,
                     const PenaltyWeights& weights,
                     const RunConfig& config)
{
    if (config.bootstrap_replicates < 1) fail(ErrorKind::config, "bagging needs at least one replicate");
    const std::size_t B = config.bootstrap_replicates;
    const auto class_of = [&ds](Index i) { return ds.class_of(i); };

    struct Replicate
    {
        std::vector<FeatureIndex> support;
        double lambda = 0.0;
        bool retried = false;
        bool flagged = false;
    };
    std::vector<Replicate> replicates(B);

    parallel_for(B, config.jobs, [&](std::size_t r) {
        const auto rows = bootstrap_resample(split.core, class_of, sub_seed(config.seed, SeedStage::bootstrap, r));
        LambdaSweep sweep = optimize_lambda(ds, rows, split.validation, weights, config);
        Replicate& out = replicates[r];
        if (!sweep.best_converged()) {
            out.retried = true;
            const auto again =
                bootstrap_resample(split.core, class_of, sub_seed(config.seed, SeedStage::bootstrap_retry, r));
            sweep = optimize_lambda(ds, again, split.validation, weights, config);
            out.flagged = !sweep.best_converged();
        }
        out.lambda = sweep.best_lambda();
        out.support = std::move(sweep.support);
    });

    BfdTable bfd;
    bfd.replicates = B;
    bfd.frequency.assign(ds.n_features(), 0);
    for (const auto& rep : replicates) {
        for (FeatureIndex j : rep.support) ++bfd.frequency[j];
        bfd.retried += rep.retried ? 1 : 0;
        bfd.flagged += rep.flagged ? 1 : 0;
        bfd.replicate_lambda.push_back(rep.lambda);
        bfd.replicate_support_size.push_back(rep.support.size());
    }
    if (bfd.flagged > 0) {
        spdlog::warn("{} of {} bootstrap replicates did not converge after a retry; their fits are used as-is",
                     bfd.flagged, B);
    }
    return bfd;
}

std::vector<FeatureIndex> cutoff_support(const BfdTable& bfd, std::size_t cutoff)
{
    std::vector<FeatureIndex> out;
    for (std::size_t j = 0; j < bfd.frequency.size(); ++j) {
        if (bfd.frequency[j] >= cutoff) out.push_back(static_cast<FeatureIndex>(j));
    }
    return out;
}

CutoffSweep cutoff_sweep(const GroupedDataset& ds, const SplitIndex& split, const BfdTable& bfd, const RunConfig& config)
{
    const std::size_t B = bfd.replicates;
    if (B < 1) fail(ErrorKind::invalid_argument, "cutoff sweep: empty bagging table");
    const double scale = response_scale(ds, split.core);
    const double sigma_floor = 1e-6 * scale;
    const auto by_group = rows_by_group(ds, split.core);
    const std::vector<Index> training = merge_rows(split.core, split.validation);

    CutoffSweep sweep;
    sweep.models.resize(B);
    parallel_for(B, config.jobs, [&](std::size_t k) {
        CutoffModel& m = sweep.models[k];
        m.cutoff = k + 1;
        m.support = cutoff_support(bfd, m.cutoff);
        const std::vector<std::vector<FeatureIndex>> sets(ds.n_groups(), m.support);
        const auto fits = fit_group_aware(ds, by_group, split.core, sets, sigma_floor);
        m.validation_errors = count_errors(ds, split.validation, fits);
        m.validation_me = static_cast<double>(m.validation_errors) / static_cast<double>(split.validation.size());
        if (!split.test.empty()) {
            const OlsFit pooled = ols_fit(ds.x(), training, m.support, ds.y(), sigma_floor);
            m.test_me = static_cast<double>(count_errors_pooled(ds, split.test, pooled)) /
                        static_cast<double>(split.test.size());
        }
    });

    std::size_t best = B;
    for (std::size_t c = B; c >= 1; --c) {
        if (sweep.at(c).validation_errors < sweep.at(best).validation_errors) best = c;
    }
    sweep.best_cutoff = best;
    for (const auto& m : sweep.models) {
        if (m.validation_errors < sweep.at(best).validation_errors) {
            fail(ErrorKind::numeric, "cutoff sweep: selected cutoff is not a validation minimum");
        }
    }

    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& m : sweep.models) {
        xs.push_back(static_cast<double>(m.cutoff));
        ys.push_back(m.validation_me);
    }
    sweep.smoothed_validation_me = loess_smooth(xs, ys);
    return sweep;
}

ModelReport evaluate_test(const GroupedDataset& ds,
                          const SplitIndex& split,
                          std::span<const FeatureIndex> support,
                          const RunConfig& config)
{
    static_cast<void>(config);
    if (split.test.empty()) fail(ErrorKind::data, "evaluate_test: empty test set");
    const std::vector<Index> training = merge_rows(split.core, split.validation);
    const double sigma_floor = 1e-6 * response_scale(ds, training);

    ModelReport report;
    report.support.assign(support.begin(), support.end());
    report.pooled_fit = ols_fit(ds.x(), training, support, ds.y(), sigma_floor);
    report.model.groups = {report.pooled_fit};
    report.model.thresholds = ds.thresholds();

    std::vector<std::size_t> wrong(ds.n_groups(), 0);
    report.group_test_rows.assign(ds.n_groups(), 0);
    std::size_t total_wrong = 0;
    for (Index i : split.test) {
        const GroupId g = ds.groups()[i];
        const bool miss = shrinkage_predict(report.model, ds.x().row(i)) != ds.class_of(i);
        wrong[g] += miss ? 1 : 0;
        total_wrong += miss ? 1 : 0;
        ++report.group_test_rows[g];
    }
    report.test_me = static_cast<double>(total_wrong) / static_cast<double>(split.test.size());
    report.group_test_me.resize(ds.n_groups());
    for (std::size_t g = 0; g < ds.n_groups(); ++g) {
        report.group_test_me[g] = report.group_test_rows[g] == 0
                                      ? 0.0
                                      : static_cast<double>(wrong[g]) / static_cast<double>(report.group_test_rows[g]);
    }
    return report;
}

RunResult run_adabag(const GroupedDataset& ds, const SplitIndex& split, const RunConfig& config)
{
    if (const auto problems = config.validate(); !problems.empty()) {
        std::string msg = "invalid run configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        fail(ErrorKind::config, msg);
    }
    RunResult result;
    result.core_group_sizes = core_group_sizes(ds, split.core);
    result.weights = make_penalty_weights(ds.polarity(), config.polarity_tol, config.scheme,
                                          result.core_group_sizes, config.custom_group_weights);

    spdlog::info("lambda sweep on the core set ({} rows, {} features, {} groups)", split.core.size(),
                 ds.n_features(), ds.n_groups());
    result.base = optimize_lambda(ds, split.core, split.validation, result.weights, config);

    spdlog::info("bagging: {} bootstrap replicates on {} worker(s)", config.bootstrap_replicates, config.jobs);
    result.bfd = run_bagging(ds, split, result.weights, config);

    spdlog::info("cutoff sweep over c = 1..{}", result.bfd.replicates);
    result.cutoffs = cutoff_sweep(ds, split, result.bfd, config);

    const CutoffModel& chosen = result.cutoffs.at(result.cutoffs.best_cutoff);
    result.report = evaluate_test(ds, split, chosen.support, config);
    result.report.cutoff = chosen.cutoff;
    result.report.validation_me = chosen.validation_me;
    return result;
}

std::vector<double> loess_smooth(std::span<const double> x, std::span<const double> y, double span)
{
    const std::size_t n = x.size();
    if (y.size() != n) fail(ErrorKind::invalid_argument, "loess: length mismatch");
    if (n == 0) return {};
    const std::size_t q = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(span * static_cast<double>(n))), 1, n);
    std::vector<double> out(n);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) dist[k] = std::abs(x[k] - x[i]);
        std::vector<double> sorted = dist;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
        double h = sorted[q - 1];
        if (span > 1.0) h *= span;
        if (h <= 0.0) h = 1.0;

        Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
        Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
        double wsum = 0.0;
        double wy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double u = dist[k] / h;
            if (u >= 1.0) continue;
            const double w = std::pow(1.0 - u * u * u, 3.0);
            const double d = x[k] - x[i];
            const Eigen::Vector3d basis(1.0, d, d * d);
            lhs += w * basis * basis.transpose();
            rhs += w * y[k] * basis;
            wsum += w;
            wy += w * y[k];
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(lhs);
        if (lu.rank() == 3) {
            out[i] = lu.solve(rhs)[0];
        } else {
            out[i] = wsum > 0.0 ? wy / wsum : y[i];
        }
    }
    return out;
}

} // namespace adabag
