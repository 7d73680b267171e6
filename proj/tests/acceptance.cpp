// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Set ADABAG_IMDB_PREBUILT to a prebuilt corpus directory
// to run the corpus-scale check instead of its property-suite replacement.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>
#include <unistd.h>

#include "adabag/dataset_io.hpp"
#include "adabag/ingest.hpp"
#include "adabag/outputs.hpp"
#include "adabag/pca_lda.hpp"
#include "adabag/pipeline.hpp"
#include "adabag/simgen.hpp"
#include "properties.hpp"

namespace fs = std::filesystem;
using namespace adabag;

namespace {

constexpr std::size_t kSeeds = 10;

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

std::string pct(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

std::string list(const std::vector<double>& v, bool percent)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? " " : "");
        if (percent) {
            os << pct(v[i]);
        } else {
            os << v[i];
        }
    }
    return os.str();
}

int failures = 0;

void verdict(int id, bool pass, const std::string& detail)
{
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::size_t jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

struct SeedRun
{
    SimData data;
    RunResult result;
    double seconds = 0.0;
};

SeedRun run_seed(PolarityVariant variant, std::uint64_t seed, std::size_t workers)
{
    SimConfig sim;
    sim.variant = variant;
    sim.seed = seed;
    SeedRun out;
    const auto start = std::chrono::steady_clock::now();
    out.data = generate(sim);
    RunConfig cfg;
    cfg.seed = seed;
    cfg.jobs = workers;
    out.result = run_adabag(out.data.dataset, out.data.split, cfg);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// A_{c+1} within A_c for every c, and every frequency in [0, B].
bool structure_ok(const RunResult& r)
{
    const std::size_t B = r.bfd.replicates;
    for (std::uint32_t f : r.bfd.frequency) {
        if (f > B) return false;
    }
    for (std::size_t c = 1; c < B; ++c) {
        const auto outer = cutoff_support(r.bfd, c);
        const auto inner = cutoff_support(r.bfd, c + 1);
        if (!std::includes(outer.begin(), outer.end(), inner.begin(), inner.end())) return false;
        if (r.cutoffs.at(c).support != outer) return false;
    }
    return r.cutoffs.models.size() == B;
}

std::string slurp(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& diff)
{
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
    std::size_t count_b = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
    if (names.size() != count_b) {
        diff = "file lists differ";
        return false;
    }
    for (const auto& n : names) {
        if (slurp(a / n) != slurp(b / n)) {
            diff = n.string() + " differs";
            return false;
        }
    }
    return true;
}

void corpus_check(const fs::path& dir)
{
    IngestOptions opt;
    opt.jobs = jobs();
    const GroupedDataset ds = ingest_prebuilt(dir, opt);
    const SplitIndex split = stratified_split(ds, 1);
    RunConfig cfg;
    cfg.scheme = WeightScheme::ws3;
    cfg.jobs = jobs();
    const RunResult r = run_adabag(ds, split, cfg);
    PcaOptions po;
    po.seed = 1;
    const PcaLdaReport pca = run_pca_lda(ds, split, 0.30, po, {PcOrdering::variance});
    const double tme = r.report.test_me;
    const std::size_t size = r.report.support.size();
    const std::size_t t = pca.pooled.at(0).t;
    const bool pass = std::abs(tme - 0.128) <= 0.02 && size >= 300 && size <= 700 && t >= 141 && t <= 181;
    std::ostringstream os;
    os << "corpus " << dir << ": WS3 pooled TME " << pct(tme) << " (target 12.8 +- 2), model size " << size
       << " (target 300..700), variance-ordered PCs at 30% = " << t << " (target 161 +- 20)";
    verdict(4, pass, os.str());
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);
    std::printf("acceptance: %zu seeds per simulation criterion, %zu worker thread(s)\n", kSeeds, jobs());

    // ---- structured-polarity simulation: criteria 1, 3 and 7
    std::vector<SeedRun> structured;
    std::vector<double> a100_me, lda_me, adabag_me, t_var, t_ent;
    std::size_t support_ok = 0;
    std::size_t lda_worse = 0;
    double slowest = 0.0;
    std::ostringstream support_detail;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        SeedRun run = run_seed(PolarityVariant::structured, seed, 1);
        slowest = std::max(slowest, run.seconds);
        const RunResult& r = run.result;
        const std::size_t B = r.bfd.replicates;
        const CutoffModel& a100 = r.cutoffs.at(B);
        a100_me.push_back(a100.test_me);

        std::size_t true_hits = 0;
        std::size_t redundant = 0;
        const auto& truth = run.data.true_support;
        for (FeatureIndex j : a100.support) {
            if (j < 6) ++true_hits;
            if (std::find(truth.begin(), truth.end(), j) == truth.end()) ++redundant;
        }
        if (true_hits >= 5 && redundant <= 3) ++support_ok;
        support_detail << (seed > 1 ? " " : "") << true_hits << "/" << redundant;

        PcaOptions po;
        po.seed = seed;
        const PcaLdaReport pca = run_pca_lda(run.data.dataset, run.data.split, 0.30, po);
        t_var.push_back(static_cast<double>(pca.pooled[0].t));
        t_ent.push_back(static_cast<double>(pca.pooled[1].t));
        lda_me.push_back(pca.pooled[0].test_me);
        adabag_me.push_back(r.report.test_me);
        if (pca.pooled[0].test_me > r.report.test_me) ++lda_worse;
        structured.push_back(std::move(run));
    }
    {
        const double med = median(a100_me);
        const bool pass = med >= 0.07 && med <= 0.13 && support_ok >= 8 && slowest < 180.0;
        std::ostringstream os;
        os << "A_100 median test ME " << pct(med) << " (target [7%, 13%]; per seed " << list(a100_me, true)
           << "); support with >= 5 of {1..6} and <= 3 redundant in " << support_ok
           << "/10 seeds (target >= 8; true/redundant per seed " << support_detail.str() << "); slowest seed "
           << slowest << " s on 1 thread (target < 180 s)";
        verdict(1, pass, os.str());
    }

    // ---- equal-polarity simulation: criterion 2
    std::vector<SeedRun> equal;
    {
        std::vector<double> val_min, test_at;
        for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
            SeedRun run = run_seed(PolarityVariant::equal, seed, jobs());
            val_min.push_back(run.result.report.validation_me);
            test_at.push_back(run.result.report.test_me);
            equal.push_back(std::move(run));
        }
        const double mv = median(val_min);
        const double mt = median(test_at);
        const bool pass = mv >= 0.02 && mv <= 0.08 && std::abs(mt - mv) <= 0.08;
        std::ostringstream os;
        os << "median validation minimum " << pct(mv) << " (target [2%, 8%]; per seed " << list(val_min, true)
           << "); median test ME at c* " << pct(mt) << ", gap " << pct(std::abs(mt - mv))
           << " (target <= 8 points; per seed " << list(test_at, true) << ")";
        verdict(2, pass, os.str());
    }

    {
        const double mv = median(t_var);
        const double me = median(t_ent);
        const double ml = median(lda_me);
        const bool var_ok = mv >= 9.0 && mv <= 13.0;
        const bool ent_ok = me >= 13.0 && me <= 19.0;
        const bool lda_ok = ml >= 0.25;
        const bool beat_ok = lda_worse >= 8;
        std::ostringstream os;
        os << "variance-ordered PCs for 30% median " << mv << (var_ok ? " ok" : " OUT") << " (target 11 +- 2; per seed "
           << list(t_var, false) << "); entropy-ordered median " << me << (ent_ok ? " ok" : " OUT")
           << " (target 16 +- 3; per seed " << list(t_ent, false) << "); LDA median test ME " << pct(ml)
           << (lda_ok ? " ok" : " OUT") << " (target >= 25%; per seed " << list(lda_me, true)
           << "); LDA worse than AdaBag in " << lda_worse << "/10 seeds" << (beat_ok ? " ok" : " OUT")
           << " (target >= 8; AdaBag per seed " << list(adabag_me, true) << ")";
        verdict(3, var_ok && ent_ok && lda_ok && beat_ok, os.str());
    }

    // ---- property suites: criteria 5, 6, 8, 9 (4 falls back to them)
    const props::Summary kkt = props::solver_kkt(200, 101);
    const props::Summary soft = props::soft_threshold(500, 102);
    const props::Summary repar = props::reparameterization(100, 103);
    const props::Summary lmax = props::lambda_max_empty(200, 104);
    const props::Summary mid = props::midpoint(10000, 105);
    const props::Summary ws = props::weight_identities(1000, 106);
    const props::Summary ols = props::ols_oracle(300, 107);
    const props::Summary lda = props::lda_oracle(100, 108);
    const bool solver_ok = kkt.ok() && soft.ok() && repar.ok() && lmax.ok();
    const bool suites_ok = solver_ok && mid.ok() && ws.ok() && ols.ok() && lda.ok();

    if (const char* corpus = std::getenv("ADABAG_IMDB_PREBUILT"); corpus && *corpus) {
        try {
            corpus_check(corpus);
        } catch (const std::exception& e) {
            verdict(4, false, std::string("corpus check failed: ") + e.what());
        }
    } else {
        verdict(4, suites_ok,
                "no corpus (ADABAG_IMDB_PREBUILT unset); replaced by the property suites of criteria 5, 6, 8 and 9");
    }

    {
        std::ostringstream os;
        os << "KKT on " << kkt.cases << " instances: " << kkt.failures << " failures, " << kkt.note
           << " (limit 10); soft threshold on " << soft.cases << " designs: " << soft.note
           << "; reparameterization on " << repar.cases << " instances: " << repar.note << " (limit 1e-8); lambda_max empty on "
           << lmax.cases - lmax.failures << "/" << lmax.cases << " instances";
        verdict(5, solver_ok, os.str());
    }
    verdict(6, mid.ok() && mid.cases == 10000, mid.note);

    {
        std::size_t runs = 0;
        std::size_t good = 0;
        for (const auto* set : {&structured, &equal}) {
            for (const SeedRun& run : *set) {
                ++runs;
                if (structure_ok(run.result)) ++good;
            }
        }
        // the structured runs used one thread; rerun seed 1 multi-threaded
        const std::size_t threads = std::max<std::size_t>(4, jobs());
        const SeedRun again = run_seed(PolarityVariant::structured, 1, threads);
        const SeedRun& first = structured.front();
        const fs::path base = fs::temp_directory_path() / ("adabag_acceptance_" + std::to_string(::getpid()));
        std::string diff;
        bool identical = false;
        try {
            RunConfig c1;
            c1.seed = 1;
            c1.jobs = 1;
            RunConfig c2 = c1;
            c2.jobs = threads;
            write_run_outputs(base / "a", first.data.dataset, first.data.split, first.result, c1);
            write_run_outputs(base / "b", again.data.dataset, again.data.split, again.result, c2);
            identical = same_tree(base / "a", base / "b", diff);
        } catch (const std::exception& e) {
            diff = e.what();
        }
        std::error_code ec;
        fs::remove_all(base, ec);
        std::ostringstream os;
        os << "nesting and bfd range hold in " << good << "/" << runs << " runs; rerun of seed 1 with 1 vs " << threads
           << " threads " << (identical ? "byte-identical" : "DIFFERS: " + diff);
        verdict(7, good == runs && identical, os.str());
    }
    verdict(8, ws.ok(), "on " + std::to_string(ws.cases) + " random size vectors, " + ws.note + " (limit 1e-12)");
    verdict(9, ols.ok() && lda.ok(),
            "OLS on " + std::to_string(ols.cases) + " instances: " + ols.note + " (limit 1e-8); LDA on " +
                std::to_string(lda.cases) + " instances: " + lda.note);

    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
