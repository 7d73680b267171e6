#include "adabag/adabag.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "adabag/dataset_io.hpp"
#include "adabag/error.hpp"
#include "adabag/ingest.hpp"
#include "adabag/outputs.hpp"
#include "adabag/pca_lda.hpp"
#include "adabag/pipeline.hpp"
#include "adabag/simgen.hpp"

#ifndef ADABAG_VERSION
#define ADABAG_VERSION "0.0.0"
#endif

using namespace adabag;

struct adabag_dataset
{
    std::shared_ptr<DatasetFiles> files;
};

struct adabag_config
{
    RunConfig config;
};

struct adabag_result
{
    std::shared_ptr<const DatasetFiles> files;
    SplitIndex split;
    RunConfig config;
    RunResult result;
};

struct adabag_pca_result
{
    PcaLdaReport report;
};

namespace {

thread_local std::string last_error;

// progress and diagnostics go to stderr
const bool logger_ready = [] {
    auto logger = spdlog::stderr_color_mt("adabag");
    logger->set_pattern("[%H:%M:%S] [%l] %v");
    spdlog::set_default_logger(std::move(logger));
    return true;
}();

adabag_status status_of(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::config: return ADABAG_ERR_CONFIG;
    case ErrorKind::data: return ADABAG_ERR_DATA;
    case ErrorKind::numeric: return ADABAG_ERR_NUMERIC;
    case ErrorKind::io: return ADABAG_ERR_IO;
    case ErrorKind::invalid_argument: return ADABAG_ERR_INVALID_ARGUMENT;
    }
    return ADABAG_ERR_INTERNAL;
}

template <class Fn>
adabag_status guarded(Fn&& fn)
{
    try {
        fn();
        last_error.clear();
        return ADABAG_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return ADABAG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return ADABAG_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return ADABAG_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what)
{
    if (!p) fail(ErrorKind::invalid_argument, std::string(what) + " must not be null");
}

char* copy_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

IngestOptions ingest_options(const adabag_ingest_options* o)
{
    IngestOptions opt;
    if (!o) return opt;
    if (o->min_reviews > 0) opt.min_reviews = o->min_reviews;
    if (o->genres) opt.genres = parse_genres(o->genres);
    if (o->polarity_file) opt.polarity_file = o->polarity_file;
    if (o->jobs > 0) opt.jobs = o->jobs;
    return opt;
}

adabag_dataset* wrap(DatasetFiles files)
{
    auto* ds = new adabag_dataset;
    ds->files = std::make_shared<DatasetFiles>(std::move(files));
    return ds;
}

} // namespace

extern "C" {

const char* adabag_version(void)
{
    return ADABAG_VERSION;
}

const char* adabag_last_error(void)
{
    return last_error.c_str();
}

const char* adabag_status_name(adabag_status status)
{
    switch (status) {
    case ADABAG_OK: return "ok";
    case ADABAG_ERR_CONFIG: return "config";
    case ADABAG_ERR_DATA: return "data";
    case ADABAG_ERR_NUMERIC: return "numeric";
    case ADABAG_ERR_IO: return "io";
    case ADABAG_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ADABAG_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

void adabag_set_log_level(int level)
{
    if (level < 0) level = 0;
    if (level > 6) level = 6;
    spdlog::set_level(static_cast<spdlog::level::level_enum>(level));
}

void adabag_string_free(char* s)
{
    std::free(s);
}

adabag_status adabag_dataset_load(const char* dir, const double* thresholds, adabag_dataset** out)
{
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        std::optional<ClassThresholds> t;
        if (thresholds) t = ClassThresholds{thresholds[0], thresholds[1]};
        *out = wrap(load_dataset(dir, t));
    });
}

adabag_status adabag_dataset_save(const adabag_dataset* ds, const char* dir)
{
    return guarded([&] {
        require(ds, "dataset");
        require(dir, "dir");
        const auto& f = *ds->files;
        save_dataset(dir, f.dataset, f.split ? &*f.split : nullptr, f.true_support);
    });
}

void adabag_dataset_free(adabag_dataset* ds)
{
    delete ds;
}

adabag_status adabag_dataset_get_info(const adabag_dataset* ds, adabag_dataset_info* out)
{
    return guarded([&] {
        require(ds, "dataset");
        require(out, "out");
        const auto& f = *ds->files;
        *out = adabag_dataset_info{};
        out->n_rows = f.dataset.n_rows();
        out->n_features = f.dataset.n_features();
        out->n_groups = f.dataset.n_groups();
        out->nnz = f.dataset.x().nnz();
        out->lower = f.dataset.thresholds().lower;
        out->upper = f.dataset.thresholds().upper;
        out->has_split = f.split ? 1 : 0;
        if (f.split) {
            out->n_core = f.split->core.size();
            out->n_validation = f.split->validation.size();
            out->n_test = f.split->test.size();
        }
    });
}

adabag_status adabag_dataset_group_name(const adabag_dataset* ds, size_t group, const char** out)
{
    return guarded([&] {
        require(ds, "dataset");
        require(out, "out");
        const auto& names = ds->files->dataset.group_names();
        if (group >= names.size()) fail(ErrorKind::invalid_argument, "group index out of range");
        *out = names[group].c_str();
    });
}

adabag_status adabag_dataset_split(adabag_dataset* ds, uint64_t seed)
{
    return guarded([&] {
        require(ds, "dataset");
        auto copy = std::make_shared<DatasetFiles>(*ds->files);
        copy->split = stratified_split(copy->dataset, seed);
        ds->files = std::move(copy);
    });
}

adabag_status adabag_simulate(uint64_t seed, const char* variant, adabag_dataset** out)
{
    return guarded([&] {
        require(out, "out");
        SimConfig config;
        config.seed = seed;
        if (variant) {
            const auto v = parse_variant(variant);
            if (!v) fail(ErrorKind::config, std::string("unknown polarity variant '") + variant + "'");
            config.variant = *v;
        }
        SimData sim = generate(config);
        DatasetFiles files;
        files.dataset = std::move(sim.dataset);
        files.split = std::move(sim.split);
        files.true_support = std::move(sim.true_support);
        *out = wrap(std::move(files));
    });
}

adabag_status adabag_ingest_raw(const char* dir, const adabag_ingest_options* options, adabag_dataset** out)
{
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        DatasetFiles files;
        files.dataset = ingest_raw(dir, ingest_options(options));
        *out = wrap(std::move(files));
    });
}

adabag_status adabag_ingest_prebuilt(const char* dir, const adabag_ingest_options* options, adabag_dataset** out)
{
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        DatasetFiles files;
        files.dataset = ingest_prebuilt(dir, ingest_options(options));
        *out = wrap(std::move(files));
    });
}

adabag_status adabag_config_create(adabag_config** out)
{
    return guarded([&] {
        require(out, "out");
        *out = new adabag_config;
    });
}

adabag_status adabag_config_from_json(const char* text, adabag_config** out)
{
    return guarded([&] {
        require(text, "json");
        require(out, "out");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::config, std::string("configuration is not valid JSON: ") + e.what());
        }
        auto* c = new adabag_config;
        try {
            c->config = config_from_json(j);
        } catch (...) {
            delete c;
            throw;
        }
        *out = c;
    });
}

adabag_status adabag_config_to_json(const adabag_config* config, char** out)
{
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = copy_string(config_to_json(config->config).dump(2));
    });
}

void adabag_config_free(adabag_config* config)
{
    delete config;
}

adabag_status adabag_config_set_scheme(adabag_config* config, const char* scheme)
{
    return guarded([&] {
        require(config, "config");
        require(scheme, "scheme");
        const auto s = parse_scheme(scheme);
        if (!s) fail(ErrorKind::config, std::string("unknown weight scheme '") + scheme + "'");
        config->config.scheme = *s;
    });
}

adabag_status adabag_config_set_custom_weights(adabag_config* config, const double* weights, size_t n)
{
    return guarded([&] {
        require(config, "config");
        if (n > 0) require(weights, "weights");
        config->config.scheme = WeightScheme::custom;
        config->config.custom_group_weights.assign(weights, weights + n);
    });
}

adabag_status adabag_config_set_replicates(adabag_config* config, size_t replicates)
{
    return guarded([&] {
        require(config, "config");
        if (replicates < 1) fail(ErrorKind::config, "bootstrap replicates must be >= 1");
        config->config.bootstrap_replicates = replicates;
    });
}

adabag_status adabag_config_set_grid(adabag_config* config, size_t size, double eps)
{
    return guarded([&] {
        require(config, "config");
        if (size < 2) fail(ErrorKind::config, "lambda grid size must be >= 2");
        if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::config, "lambda grid ratio must lie in (0, 1)");
        config->config.grid_size = size;
        config->config.grid_eps = eps;
    });
}

adabag_status adabag_config_set_tolerance(adabag_config* config, double relative_tol, size_t max_iter)
{
    return guarded([&] {
        require(config, "config");
        if (!(relative_tol > 0.0)) fail(ErrorKind::config, "solver tolerance must be positive");
        if (max_iter < 1) fail(ErrorKind::config, "max_iter must be >= 1");
        config->config.relative_tol = relative_tol;
        config->config.max_iter = max_iter;
    });
}

adabag_status adabag_config_set_standardize(adabag_config* config, int standardize)
{
    return guarded([&] {
        require(config, "config");
        config->config.standardize = standardize != 0;
    });
}

adabag_status adabag_config_set_seed(adabag_config* config, uint64_t seed)
{
    return guarded([&] {
        require(config, "config");
        config->config.seed = seed;
    });
}

adabag_status adabag_config_set_jobs(adabag_config* config, size_t jobs)
{
    return guarded([&] {
        require(config, "config");
        if (jobs < 1) fail(ErrorKind::config, "jobs must be >= 1");
        config->config.jobs = jobs;
    });
}

adabag_status adabag_run(const adabag_dataset* ds, const adabag_config* config, adabag_result** out)
{
    return guarded([&] {
        require(ds, "dataset");
        require(config, "config");
        require(out, "out");
        auto r = std::make_unique<adabag_result>();
        r->files = ds->files;
        r->config = config->config;
        r->split = ds->files->split ? *ds->files->split : stratified_split(ds->files->dataset, r->config.seed);
        r->result = run_adabag(ds->files->dataset, r->split, r->config);
        *out = r.release();
    });
}

void adabag_result_free(adabag_result* result)
{
    delete result;
}

adabag_status adabag_result_write(const adabag_result* result, const char* dir)
{
    return guarded([&] {
        require(result, "result");
        require(dir, "dir");
        write_run_outputs(dir, result->files->dataset, result->split, result->result, result->config);
    });
}

adabag_status adabag_result_summary(const adabag_result* result, adabag_summary* out)
{
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        const RunResult& r = result->result;
        *out = adabag_summary{};
        out->c_star = r.report.cutoff;
        out->model_size = r.report.support.size();
        out->test_me = r.report.test_me;
        out->validation_me = r.report.validation_me;
        out->replicates = r.bfd.replicates;
        out->retried = r.bfd.retried;
        out->flagged = r.bfd.flagged;
        out->base_lambda = r.base.best_lambda();
        out->base_validation_me = r.base.error_rate(r.base.best);
    });
}

adabag_status adabag_result_group(const adabag_result* result, size_t group, adabag_group_summary* out)
{
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        const RunResult& r = result->result;
        if (group >= r.core_group_sizes.size()) fail(ErrorKind::invalid_argument, "group index out of range");
        out->core_rows = r.core_group_sizes[group];
        out->sharing_weight = r.weights.group[group];
        out->test_rows = r.report.group_test_rows[group];
        out->test_me = r.report.group_test_me[group];
    });
}

adabag_status adabag_result_bfd(const adabag_result* result, uint32_t* out, size_t n)
{
    return guarded([&] {
        require(result, "result");
        const auto& f = result->result.bfd.frequency;
        if (n > 0) require(out, "out");
        std::copy_n(f.begin(), std::min(n, f.size()), out);
    });
}

adabag_status adabag_result_support(const adabag_result* result, uint32_t* out, size_t cap, size_t* len)
{
    return guarded([&] {
        require(result, "result");
        require(len, "len");
        const auto& s = result->result.report.support;
        *len = s.size();
        if (cap > 0) require(out, "out");
        std::copy_n(s.begin(), std::min(cap, s.size()), out);
    });
}

adabag_status adabag_result_cutoff(const adabag_result* result, size_t cutoff, adabag_cutoff_row* out)
{
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        const CutoffSweep& s = result->result.cutoffs;
        if (cutoff < 1 || cutoff > s.models.size()) fail(ErrorKind::invalid_argument, "cutoff out of range");
        const CutoffModel& m = s.at(cutoff);
        out->cutoff = m.cutoff;
        out->size = m.support.size();
        out->validation_me = m.validation_me;
        out->validation_me_smoothed = s.smoothed_validation_me[cutoff - 1];
        out->test_me = m.test_me;
    });
}

adabag_status adabag_result_report_json(const adabag_result* result, char** out)
{
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        *out = copy_string(
            report_json(result->files->dataset, result->split, result->result, result->config).dump(2));
    });
}

adabag_status adabag_dump_path(const adabag_dataset* ds, const adabag_config* config, const char* file)
{
    return guarded([&] {
        require(ds, "dataset");
        require(config, "config");
        require(file, "file");
        const auto& f = *ds->files;
        const RunConfig& c = config->config;
        const SplitIndex split = f.split ? *f.split : stratified_split(f.dataset, c.seed);
        std::vector<std::size_t> sizes(f.dataset.n_groups(), 0);
        for (Index i : split.core) ++sizes[f.dataset.groups()[i]];
        const PenaltyWeights w =
            make_penalty_weights(f.dataset.polarity(), c.polarity_tol, c.scheme, sizes, c.custom_group_weights);
        write_path_dump(file, f.dataset, split, w, c);
    });
}

adabag_status adabag_pca_lda(const adabag_dataset* ds, double target_variance, uint64_t seed, adabag_pca_result** out)
{
    return guarded([&] {
        require(ds, "dataset");
        require(out, "out");
        if (!(target_variance > 0.0 && target_variance <= 1.0)) {
            fail(ErrorKind::config, "variance target must lie in (0, 1]");
        }
        const auto& f = *ds->files;
        const SplitIndex split = f.split ? *f.split : stratified_split(f.dataset, seed);
        PcaOptions options;
        options.seed = seed;
        auto r = std::make_unique<adabag_pca_result>();
        r->report = run_pca_lda(f.dataset, split, target_variance, options);
        *out = r.release();
    });
}

void adabag_pca_result_free(adabag_pca_result* result)
{
    delete result;
}

adabag_status adabag_pca_result_get(const adabag_pca_result* result, adabag_pc_ordering ordering, adabag_pca_outcome* out)
{
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        const PcOrdering want = ordering == ADABAG_PC_ENTROPY ? PcOrdering::entropy : PcOrdering::variance;
        for (const auto& o : result->report.pooled) {
            if (o.ordering == want) {
                out->t = o.t;
                out->explained = o.explained;
                out->test_me = o.test_me;
                out->test_rows = o.test_rows;
                return;
            }
        }
        fail(ErrorKind::invalid_argument, "ordering not present in the result");
    });
}

adabag_status adabag_pca_result_json(const adabag_pca_result* result, char** out)
{
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        *out = copy_string(pca_report_json(result->report).dump(2));
    });
}

adabag_status adabag_pca_result_write(const adabag_pca_result* result, const char* file)
{
    return guarded([&] {
        require(result, "result");
        require(file, "file");
        write_text(file, pca_report_json(result->report).dump(2) + "\n");
    });
}

} // extern "C"
