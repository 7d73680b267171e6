#include "adabag/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "adabag/dataset_io.hpp"
#include "adabag/error.hpp"

namespace adabag {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + file.string());
    out << text;
    if (!out) fail(ErrorKind::io, "write failed: " + file.string());
}

json config_to_json(const RunConfig& config)
{
    json j;
    j["scheme"] = std::string(scheme_name(config.scheme));
    if (config.scheme == WeightScheme::custom) j["custom_group_weights"] = config.custom_group_weights;
    j["bootstrap_replicates"] = config.bootstrap_replicates;
    j["grid_size"] = config.grid_size;
    j["grid_eps"] = config.grid_eps;
    j["relative_tol"] = config.relative_tol;
    j["max_iter"] = config.max_iter;
    j["polarity_tol"] = config.polarity_tol;
    j["standardize"] = config.standardize;
    j["seed"] = config.seed;
    j["jobs"] = config.jobs;
    return j;
}

RunConfig config_from_json(const json& j, RunConfig base)
{
    if (!j.is_object()) fail(ErrorKind::config, "configuration must be a JSON object");
    std::vector<std::string> problems;
    const auto read = [&](const std::string& key, auto& target) {
        try {
            target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
        } catch (const json::exception&) {
            problems.push_back("'" + key + "' has the wrong type");
        }
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "scheme") {
            if (!value.is_string()) {
                problems.emplace_back("'scheme' must be a string");
            } else if (const auto s = parse_scheme(value.get<std::string>())) {
                base.scheme = *s;
            } else {
                problems.push_back("unknown scheme '" + value.get<std::string>() + "'");
            }
        } else if (key == "custom_group_weights") {
            read(key, base.custom_group_weights);
        } else if (key == "bootstrap_replicates") {
            read(key, base.bootstrap_replicates);
        } else if (key == "grid_size") {
            read(key, base.grid_size);
        } else if (key == "grid_eps") {
            read(key, base.grid_eps);
        } else if (key == "relative_tol") {
            read(key, base.relative_tol);
        } else if (key == "max_iter") {
            read(key, base.max_iter);
        } else if (key == "polarity_tol") {
            read(key, base.polarity_tol);
        } else if (key == "standardize") {
            read(key, base.standardize);
        } else if (key == "seed") {
            read(key, base.seed);
        } else if (key == "jobs") {
            read(key, base.jobs);
        } else {
            problems.push_back("unknown key '" + key + "'");
        }
    }
    for (auto& p : base.validate()) problems.push_back(std::move(p));
    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        fail(ErrorKind::config, msg);
    }
    return base;
}

namespace {

std::vector<std::string> tokens_of(const GroupedDataset& ds, std::span<const FeatureIndex> cols)
{
    std::vector<std::string> out;
    for (FeatureIndex j : cols) out.push_back(ds.feature_names()[j]);
    return out;
}

} // namespace

json report_json(const GroupedDataset& ds, const SplitIndex& split, const RunResult& result, const RunConfig& config)
{
    const ModelReport& r = result.report;
    json j;
    j["c_star"] = r.cutoff;
    j["model_size"] = r.support.size();
    j["test_me"] = r.test_me;
    j["validation_me"] = r.validation_me;
    j["support"] = r.support;
    j["support_tokens"] = tokens_of(ds, r.support);
    json groups = json::array();
    for (std::size_t g = 0; g < ds.n_groups(); ++g) {
        groups.push_back({{"group", ds.group_names()[g]},
                          {"core_rows", result.core_group_sizes[g]},
                          {"routed_to_pooled", result.core_group_sizes[g] == 0},
                          {"sharing_weight", result.weights.group[g]},
                          {"test_rows", r.group_test_rows[g]},
                          {"test_me", r.group_test_me[g]}});
    }
    j["groups"] = groups;
    j["sharing_condition"] = sharing_condition_holds(result.weights.group);
    j["split"] = {{"core", split.core.size()}, {"validation", split.validation.size()}, {"test", split.test.size()}};
    j["base_fit"] = {{"lambda", result.base.best_lambda()},
                     {"validation_me", result.base.error_rate(result.base.best)},
                     {"support_size", result.base.support.size()},
                     {"converged", result.base.best_converged()}};
    j["bagging"] = {{"replicates", result.bfd.replicates},
                    {"retried", result.bfd.retried},
                    {"flagged", result.bfd.flagged}};
    j["pooled_fit"] = {{"intercept", r.pooled_fit.intercept},
                       {"sigma", r.pooled_fit.sigma},
                       {"rank_deficient", r.pooled_fit.rank_deficient}};
    j["thresholds"] = {{"lower", ds.thresholds().lower}, {"upper", ds.thresholds().upper}};
    j["config"] = config_to_json(config);
    j["config"].erase("jobs");  // does not affect results
    return j;
}

void write_run_outputs(const fs::path& dir,
                       const GroupedDataset& ds,
                       const SplitIndex& split,
                       const RunResult& result,
                       const RunConfig& config)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

    {
        std::ostringstream os;
        os << "feature\ttoken\tfrequency\n";
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            os << j << '\t' << ds.feature_names()[j] << '\t' << result.bfd.frequency[j] << '\n';
        }
        write_text(dir / "bfd.tsv", os.str());
    }
    {
        const LambdaSweep& s = result.base;
        std::ostringstream os;
        os << "lambda\tactive_size\tval_me\tconverged\n";
        for (std::size_t k = 0; k < s.lambdas.size(); ++k) {
            os << format_real(s.lambdas[k]) << '\t' << s.support_sizes[k] << '\t' << format_real(s.error_rate(k))
               << '\t' << static_cast<int>(s.converged[k]) << '\n';
        }
        write_text(dir / "lambda_sweep.tsv", os.str());
    }
    {
        std::ostringstream os;
        os << "c\tsize\tval_me\tval_me_smoothed\ttest_me\n";
        for (std::size_t k = 0; k < result.cutoffs.models.size(); ++k) {
            const CutoffModel& m = result.cutoffs.models[k];
            os << m.cutoff << '\t' << m.support.size() << '\t' << format_real(m.validation_me) << '\t'
               << format_real(result.cutoffs.smoothed_validation_me[k]) << '\t' << format_real(m.test_me) << '\n';
        }
        write_text(dir / "cutoff_sweep.tsv", os.str());
    }
    write_text(dir / "report.json", report_json(ds, split, result, config).dump(2) + "\n");
    {
        // final model: A_B words with their pooled coefficients, largest first
        const std::vector<FeatureIndex> words = cutoff_support(result.bfd, result.bfd.replicates);
        std::vector<Index> training(split.core);
        training.insert(training.end(), split.validation.begin(), split.validation.end());
        std::sort(training.begin(), training.end());
        const OlsFit fit = ols_fit(ds.x(), training, words, ds.y(), 0.0);
        std::vector<std::size_t> order(words.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(fit.coefficients[a]) > std::abs(fit.coefficients[b]);
        });
        std::ostringstream os;
        os << "feature\ttoken\tcoefficient\tsign\n";
        for (std::size_t k : order) {
            const double c = fit.coefficients[k];
            os << words[k] << '\t' << ds.feature_names()[words[k]] << '\t' << format_real(c) << '\t'
               << (c > 0 ? '+' : (c < 0 ? '-' : '0')) << '\n';
        }
        write_text(dir / "wordcloud.tsv", os.str());
    }
    {
        std::ostringstream os;
        os << "row_id\tgroup\tmean\tp_high\tp_low\tclass\ttruth\n";
        for (Index i : split.test) {
            const ProbitDecision d = evaluate(result.report.model, ds.x().row(i), 0);
            os << i << '\t' << ds.group_names()[ds.groups()[i]] << '\t' << format_real(d.mean) << '\t'
               << format_real(d.p_high) << '\t' << format_real(d.p_low) << '\t' << d.label << '\t' << ds.class_of(i)
               << '\n';
        }
        write_text(dir / "predictions.tsv", os.str());
    }
}

void write_path_dump(const fs::path& file,
                     const GroupedDataset& ds,
                     const SplitIndex& split,
                     const PenaltyWeights& weights,
                     const RunConfig& config)
{
    const SparseBinaryMatrix x = ds.x().select_rows(split.core);
    std::vector<GroupId> g;
    std::vector<double> y;
    for (Index i : split.core) {
        g.push_back(ds.groups()[i]);
        y.push_back(ds.y()[i]);
    }
    const DslDesign design = build_dsl_design(x, g, ds.n_groups(), weights.group, weights.feature, config.standardize);
    const WeightedLasso solver = design.problem();
    const std::vector<double> yc = center_by_group(y, g, ds.n_groups());
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    double sd = y.size() > 1 ? std::sqrt(ss / static_cast<double>(y.size() - 1)) : 1.0;
    if (!(sd > 0.0)) sd = 1.0;
    const LambdaGrid grid = make_lambda_grid(solver, yc, config.grid_size, config.grid_eps);
    const auto path = solver.fit_path(yc, grid, {config.relative_tol * sd, config.max_iter});

    std::ostringstream os;
    os << "index\tlambda\tnonzero\tactive_size";
    for (const auto& name : ds.group_names()) os << "\tactive_" << name;
    os << "\tobjective\tsweeps\tconverged\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto sets = active_sets(design, path[k].coefficients);
        std::vector<FeatureIndex> pooled;
        for (const auto& set : sets) pooled.insert(pooled.end(), set.begin(), set.end());
        std::sort(pooled.begin(), pooled.end());
        pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
        os << k << '\t' << format_real(path[k].lambda) << '\t' << path[k].coefficients.nonzeros.size() << '\t'
           << pooled.size();
        for (const auto& set : sets) os << '\t' << set.size();
        os << '\t' << format_real(path[k].objective) << '\t' << path[k].sweeps << '\t' << (path[k].converged ? 1 : 0)
           << '\n';
    }
    write_text(file, os.str());
}

json pca_report_json(const PcaLdaReport& report)
{
    const auto outcome = [](const PcaLdaOutcome& o) {
        return json{{"ordering", std::string(ordering_name(o.ordering))},
                    {"t", o.t},
                    {"cumulative_variance", o.explained},
                    {"test_me", o.test_me},
                    {"test_rows", o.test_rows}};
    };
    json j;
    j["target_variance"] = report.target_variance;
    json pooled = json::array();
    for (const auto& o : report.pooled) pooled.push_back(outcome(o));
    j["pooled"] = pooled;
    json groups = json::array();
    for (std::size_t g = 0; g < report.by_group.size(); ++g) {
        json row = json::array();
        for (const auto& o : report.by_group[g]) row.push_back(outcome(o));
        groups.push_back({{"group", report.group_names[g]}, {"results", row}});
    }
    j["groups"] = groups;
    return j;
}

} // namespace adabag
