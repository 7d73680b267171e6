#pragma once

// Randomized property checks shared by the unit tests and the acceptance
// runner. Every oracle here is computed densely and independently of the
// library code path it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adabag/classifier.hpp"
#include "adabag/lasso_solver.hpp"
#include "adabag/pca_lda.hpp"
#include "adabag/weights.hpp"

namespace props {

using namespace adabag;

struct Summary
{
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst = 0.0;
    std::string note;

    bool ok() const { return cases > 0 && failures == 0; }
    void record(bool pass, double value = 0.0)
    {
        ++cases;
        if (!pass) ++failures;
        worst = std::max(worst, value);
    }
};

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline SparseBinaryMatrix random_binary(std::mt19937_64& rng, std::size_t n, std::size_t p, double density)
{
    std::bernoulli_distribution on(density);
    std::vector<std::vector<FeatureIndex>> rows(n);
    for (auto& row : rows) {
        for (std::size_t j = 0; j < p; ++j) {
            if (on(rng)) row.push_back(static_cast<FeatureIndex>(j));
        }
    }
    return SparseBinaryMatrix::from_rows(p, rows);
}

inline Eigen::MatrixXd dense(const SparseBinaryMatrix& x)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.n_rows()), static_cast<Eigen::Index>(x.n_cols()));
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        for (FeatureIndex j : x.row(i)) d(static_cast<Eigen::Index>(i), j) = 1.0;
    }
    return d;
}

/// Solves A x = b by Gauss-Jordan elimination with partial pivoting in long
/// double. Returns false when a pivot falls below `min_pivot`.
inline bool gauss_jordan(std::vector<std::vector<long double>> a,
                         std::vector<long double> b,
                         std::vector<long double>& x,
                         long double min_pivot = 1e-9L)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        }
        if (std::fabs(a[piv][c]) < min_pivot) return false;
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    x.assign(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

// A random data-shared lasso problem, built the way the pipeline builds it.
struct LassoInstance
{
    SparseBinaryMatrix x;
    std::vector<GroupId> groups;
    std::size_t n_groups = 1;
    std::vector<double> y;  // centered within groups
    DslDesign design;
};

inline LassoInstance random_lasso(std::mt19937_64& rng)
{
    LassoInstance inst;
    const std::size_t n = pick(rng, 20, 90);
    const std::size_t p = pick(rng, 2, 14);
    inst.n_groups = pick(rng, 1, 3);
    inst.x = random_binary(rng, n, p, uniform(rng, 0.1, 0.5));
    for (std::size_t i = 0; i < n; ++i) inst.groups.push_back(static_cast<GroupId>(i % inst.n_groups));
    std::normal_distribution<double> normal;
    std::vector<double> beta(p);
    for (double& b : beta) b = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : normal(rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.5 * normal(rng) + 0.3 * static_cast<double>(inst.groups[i]);
        for (FeatureIndex j : inst.x.row(i)) v += beta[j];
        y[i] = v;
    }
    inst.y = center_by_group(y, inst.groups, inst.n_groups);
    std::vector<double> r(inst.n_groups);
    for (double& v : r) v = uniform(rng, 0.3, 1.5);
    std::vector<double> w(p);
    for (double& v : w) v = 1.0 / (std::abs(uniform(rng, -1.0, 1.0)) + 1e-5);
    inst.design = build_dsl_design(inst.x, inst.groups, inst.n_groups, r, w, uniform(rng, 0.0, 1.0) < 0.3);
    return inst;
}

inline double sample_sd(const std::vector<double>& v)
{
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double a : v) ss += (a - m) * (a - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Dense design centered within groups.
inline Eigen::MatrixXd centered_design(const WeightedLasso& problem, const std::vector<GroupId>& groups, std::size_t G)
{
    Eigen::MatrixXd z(problem.design());
    for (std::size_t g = 0; g < G; ++g) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(z.cols());
        double count = 0.0;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i] != g) continue;
            mean += z.row(static_cast<Eigen::Index>(i)).transpose();
            count += 1.0;
        }
        if (count == 0.0) continue;
        mean /= count;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i] == g) z.row(static_cast<Eigen::Index>(i)) -= mean.transpose();
        }
    }
    return z;
}

// Largest optimality violation, recomputed from scratch.
inline double dense_kkt(const Eigen::MatrixXd& zc,
                        const std::vector<double>& penalty,
                        const std::vector<double>& y,
                        const std::vector<double>& b,
                        double lambda)
{
    const Eigen::Index n = zc.rows();
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), zc.cols());
    const Eigen::VectorXd grad = zc.transpose() * (yv - zc * bv) / static_cast<double>(n);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < zc.cols(); ++j) {
        if (zc.col(j).squaredNorm() < 1e-24) continue;
        const double t = lambda * penalty[static_cast<std::size_t>(j)];
        const double v = bv[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - t) : std::abs(grad[j] - std::copysign(t, bv[j]));
        worst = std::max(worst, v);
    }
    return worst;
}

/// KKT residual along a 20-point path, against 10 * tol with the pipeline's
/// tolerance (1e-7 * sd(y)).
inline Summary solver_kkt(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Summary s;
    std::size_t points = 0;
    for (std::size_t k = 0; k < instances; ++k) {
        const LassoInstance inst = random_lasso(rng);
        const WeightedLasso problem = inst.design.problem();
        const double tol = 1e-7 * sample_sd(inst.y);
        const LambdaGrid grid = make_lambda_grid(problem, inst.y, 20, 1e-2);
        const auto path = problem.fit_path(inst.y, grid, {tol, 100000});
        const Eigen::MatrixXd zc = centered_design(problem, inst.design.row_group, inst.design.n_groups);
        double worst = 0.0;
        bool converged = true;
        for (const PathPoint& pt : path) {
            worst = std::max(worst, dense_kkt(zc, problem.penalty(), inst.y, pt.coefficients.dense(problem.n_cols()),
                                              pt.lambda) / tol);
            converged = converged && pt.converged;
            ++points;
        }
        s.record(worst <= 10.0 && converged, worst);
    }
    std::ostringstream os;
    os << points << " path points, worst residual " << s.worst << " x tol";
    s.note = os.str();
    return s;
}

/// One column: the solution is the soft-thresholded univariate fit.
inline Summary soft_threshold(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Summary s;
    for (std::size_t k = 0; k < instances; ++k) {
        const std::size_t n = pick(rng, 5, 60);
        std::vector<std::vector<FeatureIndex>> rows(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (i < 2 ? i == 0 : uniform(rng, 0.0, 1.0) < 0.4) rows[i].push_back(0);
            y[i] = normal(rng) + (rows[i].empty() ? 0.0 : 0.7);
        }
        const std::vector<GroupId> g(n, 0);
        const std::vector<double> yc = center_by_group(y, g, 1);
        const double w = uniform(rng, 0.1, 4.0);
        Eigen::SparseMatrix<double> z(static_cast<Eigen::Index>(n), 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (!rows[i].empty()) z.insert(static_cast<Eigen::Index>(i), 0) = 1.0;
        }
        const WeightedLasso problem(z, {w}, g, 1);

        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += rows[i].empty() ? 0.0 : 1.0;
        m /= static_cast<double>(n);
        double zy = 0.0;
        double zz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = (rows[i].empty() ? 0.0 : 1.0) - m;
            zy += zi * yc[i];
            zz += zi * zi;
        }
        const double rho = zy / static_cast<double>(n);
        const double lmax = std::abs(rho) / w;
        const double lambda = uniform(rng, 0.0, 1.3) * lmax;
        const double expected = std::copysign(std::max(0.0, std::abs(rho) - lambda * w), rho) / (zz / static_cast<double>(n));
        const PathPoint pt = problem.fit(yc, lambda, {1e-14, 1000});
        const double got = pt.coefficients.dense(1)[0];
        const double err = std::abs(got - expected) / std::max(1.0, std::abs(expected));
        // equal up to the rounding of the two summation orders
        s.record(err <= 1e-13 && ((expected == 0.0) == (got == 0.0)), err);
    }
    std::ostringstream os;
    os << "worst relative difference " << s.worst;
    s.note = os.str();
    return s;
}

/// Weighted penalty on Z equals the plain lasso on Z / w with b = b~ / w.
inline Summary reparameterization(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Summary s;
    for (std::size_t k = 0; k < instances; ++k) {
        const std::size_t p = pick(rng, 2, 10);
        const std::size_t n = pick(rng, 4 * p, 100);
        const SparseBinaryMatrix x = random_binary(rng, n, p, uniform(rng, 0.2, 0.5));
        const std::size_t G = pick(rng, 1, 2);
        std::vector<GroupId> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<GroupId>(i % G);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = normal(rng);
            for (FeatureIndex j : x.row(i)) y[i] += j % 2 == 0 ? 0.8 : -0.4;
        }
        const std::vector<double> yc = center_by_group(y, g, G);
        std::vector<double> w(p);
        for (double& v : w) v = uniform(rng, 0.2, 5.0);

        Eigen::SparseMatrix<double> z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        Eigen::SparseMatrix<double> zt(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        for (std::size_t i = 0; i < n; ++i) {
            for (FeatureIndex j : x.row(i)) {
                z.insert(static_cast<Eigen::Index>(i), j) = 1.0;
                zt.insert(static_cast<Eigen::Index>(i), j) = 1.0 / w[j];
            }
        }
        const WeightedLasso weighted(z, w, g, G);
        const WeightedLasso plain(zt, std::vector<double>(p, 1.0), g, G);
        const double lmax = weighted.lambda_max(yc);
        double worst = 0.0;
        for (double frac : {0.7, 0.3, 0.05}) {
            const double lambda = frac * lmax;
            const auto a = weighted.fit(yc, lambda, {1e-13, 1000000}).coefficients.dense(p);
            const auto b = plain.fit(yc, lambda, {1e-13, 1000000}).coefficients.dense(p);
            for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::abs(a[j] - b[j] / w[j]));
        }
        s.record(worst <= 1e-8, worst);
    }
    std::ostringstream os;
    os << "worst coefficient difference " << s.worst;
    s.note = os.str();
    return s;
}

/// The first grid value gives the empty model, and it is the smallest such
/// value up to the documented relative nudge.
inline Summary lambda_max_empty(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Summary s;
    for (std::size_t k = 0; k < instances; ++k) {
        const LassoInstance inst = random_lasso(rng);
        const WeightedLasso problem = inst.design.problem();
        const Eigen::MatrixXd zc = centered_design(problem, inst.design.row_group, inst.design.n_groups);
        const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(inst.y.data(), zc.rows());
        const Eigen::VectorXd grad = zc.transpose() * yv / static_cast<double>(zc.rows());
        double oracle = 0.0;
        for (Eigen::Index j = 0; j < zc.cols(); ++j) {
            if (zc.col(j).squaredNorm() < 1e-24) continue;
            oracle = std::max(oracle, std::abs(grad[j]) / problem.penalty()[static_cast<std::size_t>(j)]);
        }
        const double tol = 1e-7 * sample_sd(inst.y);
        const LambdaGrid grid = make_lambda_grid(problem, inst.y, 10, 1e-2);
        const bool empty = problem.fit(inst.y, grid.values[0], {tol, 10000}).coefficients.nonzeros.empty();
        const bool tight = std::abs(grid.values[0] / oracle - 1.0) <= 1e-8;
        const bool below = oracle == 0.0 || !problem.fit(inst.y, 0.99 * oracle, {tol, 10000}).coefficients.nonzeros.empty();
        s.record(empty && tight && below, std::abs(grid.values[0] / oracle - 1.0));
    }
    std::ostringstream os;
    os << "worst |lambda_max / oracle - 1| = " << s.worst;
    s.note = os.str();
    return s;
}

/// Probit decision against the (a+b)/2 mean rule. The oracle mean is summed
/// here and the class probabilities come from erfc.
inline Summary midpoint(std::size_t pairs, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Summary s;
    const std::size_t p = 30;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double a = uniform(rng, -5.0, 8.0);
        const double b = a + uniform(rng, 0.05, 6.0);
        OlsFit fit;
        fit.intercept = (a + b) / 2.0 + normal(rng);
        for (FeatureIndex j = 0; j < p; ++j) {
            if (uniform(rng, 0.0, 1.0) < 0.3) {
                fit.columns.push_back(j);
                fit.coefficients.push_back(normal(rng));
            }
        }
        fit.sigma = std::exp(uniform(rng, -4.0, 2.0));
        const ProbitModel model{{fit}, {a, b}};
        std::vector<FeatureIndex> row;
        for (FeatureIndex j = 0; j < p; ++j) {
            if (uniform(rng, 0.0, 1.0) < 0.25) row.push_back(j);
        }
        double mean = fit.intercept;
        for (std::size_t c = 0; c < fit.columns.size(); ++c) {
            if (std::binary_search(row.begin(), row.end(), fit.columns[c])) mean += fit.coefficients[c];
        }
        const int rule = mean >= (a + b) / 2.0 ? 1 : 0;
        const ProbitDecision d = evaluate(model, row, 0);
        const double hi = 0.5 * std::erfc((b - mean) / (fit.sigma * std::sqrt(2.0)));
        const double lo = 0.5 * std::erfc((mean - a) / (fit.sigma * std::sqrt(2.0)));
        // where both tails underflow alike the probabilities cannot decide
        const bool probability_agrees = hi == lo || (hi > lo) == (rule == 1);
        s.record(d.label == rule && probability_agrees && shrinkage_predict(model, row) == rule);
    }
    std::ostringstream os;
    os << s.failures << " disagreements in " << s.cases << " pairs";
    s.note = os.str();
    return s;
}

/// Relations between the sharing-weight schemes on random group sizes.
inline Summary weight_identities(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Summary s;
    for (std::size_t k = 0; k < instances; ++k) {
        std::vector<std::size_t> sizes(pick(rng, 1, 12));
        for (auto& v : sizes) v = pick(rng, 2, k % 2 == 0 ? 50 : 100000);
        const auto w1 = group_weights(WeightScheme::ws1, sizes);
        const auto w2 = group_weights(WeightScheme::ws2, sizes);
        const auto w3 = group_weights(WeightScheme::ws3, sizes);
        const auto w4 = group_weights(WeightScheme::ws4, sizes);
        const auto w5 = group_weights(WeightScheme::ws5, sizes);
        const auto w6 = group_weights(WeightScheme::ws6, sizes);
        double worst = 0.0;
        for (std::size_t g = 0; g < sizes.size(); ++g) {
            worst = std::max({worst,
                              std::abs(w1[g] - std::sqrt(1.0 / 3.0)),
                              std::abs(w3[g] * w5[g] - 1.0),
                              std::abs(w4[g] - w3[g] * w3[g]),
                              std::abs(w6[g] - w3[g] / w2[g])});
        }
        s.record(worst <= 1e-12, worst);
    }
    std::ostringstream os;
    os << "worst deviation " << s.worst;
    s.note = os.str();
    return s;
}

/// OLS with intercept against the normal equations solved in long double.
inline Summary ols_oracle(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Summary s;
    while (s.cases < instances) {
        const std::size_t p = 12;
        const std::size_t n = pick(rng, 12, 60);
        const SparseBinaryMatrix x = random_binary(rng, n, p, uniform(rng, 0.2, 0.6));
        std::vector<double> y(n);
        for (double& v : y) v = uniform(rng, 0.0, 10.0);
        std::vector<Index> rows(pick(rng, 10, 2 * n));
        for (Index& r : rows) r = pick(rng, 0, n - 1);
        std::vector<FeatureIndex> cols;
        const std::size_t t = pick(rng, 0, 5);
        while (cols.size() < t) {
            const auto j = static_cast<FeatureIndex>(pick(rng, 0, p - 1));
            if (std::find(cols.begin(), cols.end(), j) == cols.end()) cols.push_back(j);
        }
        std::sort(cols.begin(), cols.end());
        if (rows.size() < t + 2) continue;

        const std::size_t m = t + 1;
        std::vector<std::vector<long double>> a(m, std::vector<long double>(m, 0.0L));
        std::vector<long double> rhs(m, 0.0L);
        for (Index i : rows) {
            std::vector<long double> f(m, 0.0L);
            f[0] = 1.0L;
            for (std::size_t c = 0; c < t; ++c) f[c + 1] = x.contains(i, cols[c]) ? 1.0L : 0.0L;
            for (std::size_t u = 0; u < m; ++u) {
                rhs[u] += f[u] * static_cast<long double>(y[i]);
                for (std::size_t v = 0; v < m; ++v) a[u][v] += f[u] * f[v];
            }
        }
        std::vector<long double> beta;
        if (!gauss_jordan(a, rhs, beta, 1e-6L)) continue;  // singular: not an oracle instance

        const OlsFit fit = ols_fit(x, rows, cols, y, 0.0);
        double worst = std::abs(fit.intercept - static_cast<double>(beta[0]));
        for (std::size_t c = 0; c < t; ++c) {
            worst = std::max(worst, std::abs(fit.coefficients[c] - static_cast<double>(beta[c + 1])));
        }
        long double rss = 0.0L;
        for (Index i : rows) {
            long double e = static_cast<long double>(y[i]) - beta[0];
            for (std::size_t c = 0; c < t; ++c) e -= x.contains(i, cols[c]) ? beta[c + 1] : 0.0L;
            rss += e * e;
        }
        const double sigma = static_cast<double>(std::sqrt(rss / static_cast<long double>(rows.size() - m)));
        worst = std::max(worst, std::abs(fit.sigma - sigma));
        s.record(worst <= 1e-8 && !fit.rank_deficient, worst);
    }
    std::ostringstream os;
    os << "worst difference " << s.worst;
    s.note = os.str();
    return s;
}

/// Fisher LDA against nearest class mean in the Mahalanobis metric of the
/// same pooled covariance, on fresh points.
inline Summary lda_oracle(std::size_t instances, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Summary s;
    std::size_t points = 0;
    for (std::size_t k = 0; k < instances; ++k) {
        const std::size_t t = pick(rng, 1, 5);
        const std::size_t n = pick(rng, 10, 80);
        Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
        std::vector<int> cls(n);
        Eigen::VectorXd shift(static_cast<Eigen::Index>(t));
        for (Eigen::Index c = 0; c < shift.size(); ++c) shift[c] = normal(rng);
        for (std::size_t i = 0; i < n; ++i) {
            cls[i] = i < 2 ? static_cast<int>(i) : (uniform(rng, 0.0, 1.0) < 0.5 ? 1 : 0);
            for (std::size_t c = 0; c < t; ++c) {
                scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    normal(rng) * (1.0 + static_cast<double>(c)) + (cls[i] == 1 ? shift[static_cast<Eigen::Index>(c)] : 0.0);
            }
        }
        const LdModel model = fit_lda(scores, cls);

        std::vector<long double> m0(t, 0.0L), m1(t, 0.0L);
        long double n0 = 0.0L, n1 = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            auto& m = cls[i] == 1 ? m1 : m0;
            (cls[i] == 1 ? n1 : n0) += 1.0L;
            for (std::size_t c = 0; c < t; ++c) m[c] += scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        }
        for (std::size_t c = 0; c < t; ++c) {
            m0[c] /= n0;
            m1[c] /= n1;
        }
        std::vector<std::vector<long double>> sw(t, std::vector<long double>(t, 0.0L));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& m = cls[i] == 1 ? m1 : m0;
            for (std::size_t u = 0; u < t; ++u) {
                for (std::size_t v = 0; v < t; ++v) {
                    sw[u][v] += (scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(u)) - m[u]) *
                                (scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) - m[v]);
                }
            }
        }
        long double trace = 0.0L;
        for (std::size_t u = 0; u < t; ++u) {
            for (std::size_t v = 0; v < t; ++v) sw[u][v] /= static_cast<long double>(n - 2);
            trace += sw[u][u];
        }
        for (std::size_t u = 0; u < t; ++u) sw[u][u] += 1e-8L * trace / static_cast<long double>(t);

        const auto mahalanobis = [&](const Eigen::VectorXd& q, const std::vector<long double>& m) {
            std::vector<long double> d(t), sol;
            for (std::size_t c = 0; c < t; ++c) d[c] = q[static_cast<Eigen::Index>(c)] - m[c];
            gauss_jordan(sw, d, sol, 0.0L);
            long double out = 0.0L;
            for (std::size_t c = 0; c < t; ++c) out += d[c] * sol[c];
            return out;
        };
        bool agree = true;
        for (int q = 0; q < 50; ++q) {
            Eigen::VectorXd point(static_cast<Eigen::Index>(t));
            for (std::size_t c = 0; c < t; ++c) point[static_cast<Eigen::Index>(c)] = 3.0 * normal(rng);
            const int oracle = mahalanobis(point, m1) <= mahalanobis(point, m0) ? 1 : 0;
            agree = agree && model.classify(point) == oracle;
            ++points;
        }
        s.record(agree);
    }
    std::ostringstream os;
    os << s.failures << " disagreeing instances, " << points << " points";
    s.note = os.str();
    return s;
}

} // namespace props
