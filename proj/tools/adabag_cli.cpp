#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adabag/adabag.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Carries a failed C call out to main.
struct CallFailed
{
    adabag_status status;
    std::string message;
};

void check(adabag_status s)
{
    if (s != ADABAG_OK) throw CallFailed{s, adabag_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle
{
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};

using Dataset = Handle<adabag_dataset, adabag_dataset_free>;
using Config = Handle<adabag_config, adabag_config_free>;
using Result = Handle<adabag_result, adabag_result_free>;
using PcaResult = Handle<adabag_pca_result, adabag_pca_result_free>;

std::string take_string(char* s)
{
    std::string out(s ? s : "");
    adabag_string_free(s);
    return out;
}

int exit_code(adabag_status s)
{
    return s == ADABAG_OK ? 0 : 1 + static_cast<int>(s);
}

class Stopwatch
{
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("ADABAG_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CallFailed{ADABAG_ERR_CONFIG, std::string("ADABAG_SEED is not an unsigned integer: ") + env};
        }
    }
    return 1;
}

json read_json_file(const fs::path& file)
{
    std::ifstream in(file);
    if (!in) throw CallFailed{ADABAG_ERR_IO, "cannot open " + file.string()};
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw CallFailed{ADABAG_ERR_CONFIG, file.string() + ": " + e.what()};
    }
}

void write_json_file(const fs::path& file, const json& j)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw CallFailed{ADABAG_ERR_IO, "cannot write " + file.string()};
    out << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw CallFailed{ADABAG_ERR_IO, "cannot create " + dir.string() + ": " + ec.message()};
}

// Options shared by `run` and `sweep-schemes`.
struct RunOptions
{
    std::string data;
    std::string out = "out";
    std::string config_file;
    std::string manifest;
    std::optional<std::string> scheme;
    std::vector<double> custom_weights;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> grid_size;
    std::optional<double> grid_eps;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    bool standardize = false;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    std::optional<double> lower;
    std::optional<double> upper;
    std::string dump_path;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_scheme)
{
    cmd->add_option("-d,--data", o.data, "Dataset directory");
    cmd->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--config", o.config_file, "JSON run configuration");
    cmd->add_option("--manifest", o.manifest, "Repeat the run recorded in a run_manifest.json");
    if (with_scheme) {
        cmd->add_option("--scheme", o.scheme, "Sharing weights: ws1..ws6 or custom");
        cmd->add_option("--custom-weights", o.custom_weights, "Per-group weights for --scheme custom")
            ->delimiter(',');
    }
    cmd->add_option("-B,--replicates", o.replicates, "Bootstrap replicates");
    cmd->add_option("--grid-size", o.grid_size, "Number of lambda values");
    cmd->add_option("--grid-eps", o.grid_eps, "Smallest lambda as a fraction of lambda_max");
    cmd->add_option("--tol", o.tol, "Solver tolerance relative to sd(y)");
    cmd->add_option("--max-iter", o.max_iter, "Solver sweep limit per lambda");
    cmd->add_flag("--standardize", o.standardize, "Scale design columns within groups");
    cmd->add_option("--seed", o.seed, "Master seed (default: $ADABAG_SEED or 1)");
    cmd->add_option("-j,--jobs", o.jobs, "Worker threads")->capture_default_str();
    cmd->add_option("--lower", o.lower, "Class-0 threshold a (overrides dataset.json)");
    cmd->add_option("--upper", o.upper, "Class-1 threshold b (overrides dataset.json)");
}

// Merges config file, manifest and flags into one JSON document that the
// library validates as a whole.
json build_config(RunOptions& o)
{
    json cfg = json::object();
    if (!o.manifest.empty()) {
        const json m = read_json_file(o.manifest);
        if (!m.contains("config") || !m.contains("data")) {
            throw CallFailed{ADABAG_ERR_CONFIG, o.manifest + ": not a run manifest"};
        }
        cfg = m["config"];
        if (o.data.empty()) o.data = m["data"].get<std::string>();
        if (m.contains("thresholds") && !o.lower && !o.upper) {
            o.lower = m["thresholds"]["lower"].get<double>();
            o.upper = m["thresholds"]["upper"].get<double>();
        }
    }
    if (!o.config_file.empty()) {
        const json file = read_json_file(o.config_file);
        if (!file.is_object()) throw CallFailed{ADABAG_ERR_CONFIG, o.config_file + ": expected a JSON object"};
        for (const auto& [k, v] : file.items()) {
            if (k == "data") {
                if (o.data.empty()) o.data = v.get<std::string>();
            } else if (k == "out") {
                o.out = v.get<std::string>();
            } else {
                cfg[k] = v;
            }
        }
    }
    if (!cfg.contains("seed")) cfg["seed"] = default_seed();
    if (o.scheme) cfg["scheme"] = *o.scheme;
    if (!o.custom_weights.empty()) {
        cfg["custom_group_weights"] = o.custom_weights;
        if (!o.scheme) cfg["scheme"] = "custom";
    }
    if (o.replicates) cfg["bootstrap_replicates"] = *o.replicates;
    if (o.grid_size) cfg["grid_size"] = *o.grid_size;
    if (o.grid_eps) cfg["grid_eps"] = *o.grid_eps;
    if (o.tol) cfg["relative_tol"] = *o.tol;
    if (o.max_iter) cfg["max_iter"] = *o.max_iter;
    if (o.standardize) cfg["standardize"] = true;
    if (o.seed) cfg["seed"] = *o.seed;
    cfg["jobs"] = o.jobs;
    if (o.data.empty()) throw CallFailed{ADABAG_ERR_CONFIG, "no dataset given (--data, --config or --manifest)"};
    if (o.lower.has_value() != o.upper.has_value()) {
        throw CallFailed{ADABAG_ERR_CONFIG, "--lower and --upper must be given together"};
    }
    return cfg;
}

void load_dataset(const RunOptions& o, Dataset& ds)
{
    if (o.lower) {
        const double t[2] = {*o.lower, *o.upper};
        check(adabag_dataset_load(o.data.c_str(), t, ds.out()));
    } else {
        check(adabag_dataset_load(o.data.c_str(), nullptr, ds.out()));
    }
}

json manifest_base(const std::string& command, const std::vector<std::string>& argv)
{
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["version"] = adabag_version();
    return m;
}

json dataset_json(const adabag_dataset* ds)
{
    adabag_dataset_info info{};
    check(adabag_dataset_get_info(ds, &info));
    json groups = json::array();
    for (std::size_t g = 0; g < info.n_groups; ++g) {
        const char* name = nullptr;
        check(adabag_dataset_group_name(ds, g, &name));
        groups.push_back(name);
    }
    return json{{"rows", info.n_rows},
                {"features", info.n_features},
                {"nnz", info.nnz},
                {"groups", groups},
                {"stored_split", info.has_split != 0}};
}

int cmd_simulate(std::uint64_t seed, const std::string& variant, const std::string& out,
                 const std::vector<std::string>& argv)
{
    Stopwatch clock;
    Dataset ds;
    check(adabag_simulate(seed, variant.c_str(), ds.out()));
    check(adabag_dataset_save(ds.get(), out.c_str()));
    json m = manifest_base("simulate", argv);
    m["seed"] = seed;
    m["variant"] = variant;
    m["dataset"] = dataset_json(ds.get());
    m["wall_seconds"] = {{"total", clock.lap()}};
    write_json_file(fs::path(out) / "run_manifest.json", m);
    std::cerr << "wrote simulated dataset to " << out << '\n';
    return 0;
}

int cmd_ingest(const std::string& input, const std::string& out, bool prebuilt, std::size_t min_reviews,
               const std::string& genres, const std::string& polarity, std::size_t jobs,
               const std::vector<std::string>& argv)
{
    if (fs::exists(out) && fs::equivalent(input, out)) {
        throw CallFailed{ADABAG_ERR_CONFIG, "output directory must differ from the input directory"};
    }
    Stopwatch clock;
    adabag_ingest_options opt{};
    opt.min_reviews = min_reviews;
    opt.genres = genres.empty() ? nullptr : genres.c_str();
    opt.polarity_file = polarity.empty() ? nullptr : polarity.c_str();
    opt.jobs = jobs;
    Dataset ds;
    if (prebuilt) {
        check(adabag_ingest_prebuilt(input.c_str(), &opt, ds.out()));
    } else {
        check(adabag_ingest_raw(input.c_str(), &opt, ds.out()));
    }
    const double t_ingest = clock.lap();
    check(adabag_dataset_save(ds.get(), out.c_str()));
    json m = manifest_base("ingest", argv);
    m["input"] = input;
    m["mode"] = prebuilt ? "prebuilt" : "raw";
    m["min_reviews"] = min_reviews;
    m["genres"] = genres.empty() ? "drama,comedy,horror" : genres;
    m["polarity_file"] = polarity;
    m["dataset"] = dataset_json(ds.get());
    m["wall_seconds"] = {{"ingest", t_ingest}, {"write", clock.lap()}};
    write_json_file(fs::path(out) / "run_manifest.json", m);
    std::cerr << "wrote dataset to " << out << '\n';
    return 0;
}

int cmd_run(RunOptions& o, const std::vector<std::string>& argv)
{
    json cfg = build_config(o);
    Stopwatch clock;
    Config config;
    check(adabag_config_from_json(cfg.dump().c_str(), config.out()));
    Dataset ds;
    load_dataset(o, ds);
    const double t_load = clock.lap();
    ensure_dir(o.out);

    if (!o.dump_path.empty()) check(adabag_dump_path(ds.get(), config.get(), o.dump_path.c_str()));
    Result result;
    check(adabag_run(ds.get(), config.get(), result.out()));
    const double t_run = clock.lap();
    check(adabag_result_write(result.get(), o.out.c_str()));

    adabag_summary s{};
    check(adabag_result_summary(result.get(), &s));
    adabag_dataset_info info{};
    check(adabag_dataset_get_info(ds.get(), &info));

    json m = manifest_base("run", argv);
    m["data"] = fs::absolute(o.data).string();
    m["config"] = json::parse(take_string([&] {
        char* text = nullptr;
        check(adabag_config_to_json(config.get(), &text));
        return text;
    }()));
    m["thresholds"] = {{"lower", info.lower}, {"upper", info.upper}};
    m["seeds"] = {{"master", m["config"]["seed"]},
                  {"split", info.has_split ? json("stored in dataset") : m["config"]["seed"]}};
    m["dataset"] = dataset_json(ds.get());
    m["summary"] = {{"c_star", s.c_star}, {"model_size", s.model_size}, {"test_me", s.test_me}};
    m["wall_seconds"] = {{"load", t_load}, {"pipeline", t_run}, {"write", clock.lap()}};
    write_json_file(fs::path(o.out) / "run_manifest.json", m);
    std::cerr << "c* = " << s.c_star << ", model size " << s.model_size << ", test ME " << s.test_me << '\n';
    return 0;
}

int cmd_pca(const std::string& data, const std::string& out, double target, std::optional<std::uint64_t> seed_opt,
            std::optional<double> lower, std::optional<double> upper, const std::vector<std::string>& argv)
{
    const std::uint64_t seed = seed_opt ? *seed_opt : default_seed();
    Stopwatch clock;
    RunOptions o;
    o.data = data;
    o.lower = lower;
    o.upper = upper;
    if (lower.has_value() != upper.has_value()) {
        throw CallFailed{ADABAG_ERR_CONFIG, "--lower and --upper must be given together"};
    }
    Dataset ds;
    load_dataset(o, ds);
    PcaResult pca;
    check(adabag_pca_lda(ds.get(), target, seed, pca.out()));
    ensure_dir(out);
    check(adabag_pca_result_write(pca.get(), (fs::path(out) / "pca_report.json").string().c_str()));
    adabag_pca_outcome v{};
    adabag_pca_outcome e{};
    check(adabag_pca_result_get(pca.get(), ADABAG_PC_VARIANCE, &v));
    check(adabag_pca_result_get(pca.get(), ADABAG_PC_ENTROPY, &e));
    json m = manifest_base("pca-lda", argv);
    m["data"] = fs::absolute(data).string();
    m["var_explained"] = target;
    m["seeds"] = {{"master", seed}};
    m["dataset"] = dataset_json(ds.get());
    m["wall_seconds"] = {{"total", clock.lap()}};
    write_json_file(fs::path(out) / "run_manifest.json", m);
    std::cerr << "variance-ordered: t = " << v.t << ", test ME " << v.test_me << "; entropy-ordered: t = " << e.t
              << ", test ME " << e.test_me << '\n';
    return 0;
}

int cmd_sweep(RunOptions& o, const std::vector<std::string>& argv)
{
    json cfg = build_config(o);
    Stopwatch clock;
    Dataset ds;
    load_dataset(o, ds);
    adabag_dataset_info info{};
    check(adabag_dataset_get_info(ds.get(), &info));
    ensure_dir(o.out);

    std::ostringstream tsv;
    tsv << "scheme\tpooled_tme";
    for (std::size_t g = 0; g < info.n_groups; ++g) {
        const char* name = nullptr;
        check(adabag_dataset_group_name(ds.get(), g, &name));
        tsv << '\t' << name << "_tme";
    }
    tsv << "\tmodel_size\tc_star\n";
    json times = json::object();
    for (const char* scheme : {"ws1", "ws2", "ws3", "ws4", "ws5", "ws6"}) {
        cfg["scheme"] = scheme;
        Config config;
        check(adabag_config_from_json(cfg.dump().c_str(), config.out()));
        Result result;
        std::cerr << "scheme " << scheme << '\n';
        check(adabag_run(ds.get(), config.get(), result.out()));
        check(adabag_result_write(result.get(), (fs::path(o.out) / scheme).string().c_str()));
        adabag_summary s{};
        check(adabag_result_summary(result.get(), &s));
        tsv << scheme << '\t' << s.test_me * 100.0;
        for (std::size_t g = 0; g < info.n_groups; ++g) {
            adabag_group_summary gs{};
            check(adabag_result_group(result.get(), g, &gs));
            tsv << '\t' << gs.test_me * 100.0;
        }
        tsv << '\t' << s.model_size << '\t' << s.c_star << '\n';
        times[scheme] = clock.lap();
    }
    {
        std::ofstream out(fs::path(o.out) / "schemes.tsv", std::ios::binary);
        if (!out) throw CallFailed{ADABAG_ERR_IO, "cannot write schemes.tsv"};
        out << tsv.str();
    }
    cfg.erase("scheme");
    json m = manifest_base("sweep-schemes", argv);
    m["data"] = fs::absolute(o.data).string();
    m["config"] = cfg;
    m["thresholds"] = {{"lower", info.lower}, {"upper", info.upper}};
    m["seeds"] = {{"master", cfg["seed"]}};
    m["dataset"] = dataset_json(ds.get());
    m["wall_seconds"] = times;
    write_json_file(fs::path(o.out) / "run_manifest.json", m);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Adaptive bagged lasso for grouped binary features"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(adabag_version()));
    int verbosity = 0;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbosity, "More log output (repeatable)");
    app.add_flag("-q,--quiet", quiet, "Only warnings and errors");

    std::optional<std::uint64_t> sim_seed;
    std::string sim_variant = "structured";
    std::string sim_out = "data";
    auto* sim = app.add_subcommand("simulate", "Generate the simulated 77-feature dataset");
    sim->add_option("--seed", sim_seed, "Seed (default: $ADABAG_SEED or 1)");
    sim->add_option("--variant", sim_variant, "Polarity variant")
        ->check(CLI::IsMember({"structured", "equal"}))
        ->capture_default_str();
    sim->add_option("-o,--out", sim_out, "Output dataset directory")->capture_default_str();

    std::string ing_input;
    std::string ing_out = "data";
    bool ing_prebuilt = false;
    std::size_t ing_min = 5;
    std::string ing_genres;
    std::string ing_polarity;
    std::size_t ing_jobs = 1;
    auto* ing = app.add_subcommand("ingest", "Build a dataset from a review corpus");
    ing->add_option("-i,--input", ing_input, "Corpus directory")->required();
    ing->add_option("-o,--out", ing_out, "Output dataset directory")->capture_default_str();
    ing->add_flag("--prebuilt", ing_prebuilt, "Read prebuilt vocabulary and *.feat files");
    ing->add_option("--min-reviews", ing_min, "Minimum document frequency")->capture_default_str();
    ing->add_option("--genres", ing_genres, "Comma-separated genres in priority order");
    ing->add_option("--polarity-file", ing_polarity, "token<TAB>score file");
    ing->add_option("-j,--jobs", ing_jobs, "Worker threads")->capture_default_str();

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Run the bagged lasso pipeline");
    add_run_options(run, run_opts, true);
    run->add_option("--dump-path", run_opts.dump_path, "Write solver diagnostics along the lambda path (TSV)");

    std::string pca_data;
    std::string pca_out = "out";
    double pca_target = 0.30;
    std::optional<std::uint64_t> pca_seed;
    std::optional<double> pca_lower;
    std::optional<double> pca_upper;
    auto* pca = app.add_subcommand("pca-lda", "Principal components with linear discrimination");
    pca->add_option("-d,--data", pca_data, "Dataset directory")->required();
    pca->add_option("-o,--out", pca_out, "Output directory")->capture_default_str();
    pca->add_option("--var-explained", pca_target, "Variance fraction to retain")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    pca->add_option("--seed", pca_seed, "Seed for the split and randomized SVD");
    pca->add_option("--lower", pca_lower, "Class-0 threshold a");
    pca->add_option("--upper", pca_upper, "Class-1 threshold b");

    RunOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep-schemes", "Run every sharing-weight scheme and tabulate test errors");
    add_run_options(sweep, sweep_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    adabag_set_log_level(quiet ? 3 : (verbosity >= 2 ? 0 : (verbosity == 1 ? 1 : 2)));
    try {
        if (*sim) return cmd_simulate(sim_seed ? *sim_seed : default_seed(), sim_variant, sim_out, args);
        if (*ing) {
            return cmd_ingest(ing_input, ing_out, ing_prebuilt, ing_min, ing_genres, ing_polarity, ing_jobs, args);
        }
        if (*run) return cmd_run(run_opts, args);
        if (*pca) return cmd_pca(pca_data, pca_out, pca_target, pca_seed, pca_lower, pca_upper, args);
        if (*sweep) return cmd_sweep(sweep_opts, args);
    } catch (const CallFailed& e) {
        std::cerr << "error [" << adabag_status_name(e.status) << "]: " << e.message << '\n';
        return exit_code(e.status);
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << '\n';
        return exit_code(ADABAG_ERR_INTERNAL);
    }
    return 0;
}
