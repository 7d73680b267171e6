#include "adabag/lasso_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "adabag/error.hpp"

namespace adabag {

std::vector<double> Coefficients::dense(std::size_t n_cols) const
{
    std::vector<double> out(n_cols, 0.0);
    for (const auto& [j, v] : nonzeros) out[j] = v;
    return out;
}

Coefficients Coefficients::from_dense(std::span<const double> values)
{
    Coefficients out;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (values[j] != 0.0) out.nonzeros.emplace_back(j, values[j]);
    }
    return out;
}

namespace {

double soft_threshold(double z, double t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

} // namespace

struct WeightedLasso::State
{
    std::vector<double> beta;
    std::vector<double> residual;        // y - Z b, uncentered
    std::vector<double> group_residual;  // per-group sums of `residual`
};

WeightedLasso::WeightedLasso(SparseMatrix design,
                             std::vector<double> penalty,
                             std::vector<GroupId> row_group,
                             std::size_t n_groups)
    : design_(std::move(design)),
      penalty_(std::move(penalty)),
      row_group_(std::move(row_group)),
      n_groups_(n_groups),
      group_size_(n_groups, 0.0)
{
    design_.makeCompressed();
    if (penalty_.size() != n_cols()) fail(ErrorKind::invalid_argument, "lasso: one penalty weight per column required");
    if (row_group_.size() != n_rows()) fail(ErrorKind::invalid_argument, "lasso: one group per row required");
    if (n_rows() == 0) fail(ErrorKind::invalid_argument, "lasso: design has no rows");
    for (double w : penalty_) {
        if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::invalid_argument, "lasso: penalty weights must be positive");
    }
    for (GroupId g : row_group_) {
        if (g >= n_groups_) fail(ErrorKind::invalid_argument, "lasso: row group out of range");
        group_size_[g] += 1.0;
    }

    const double n = static_cast<double>(n_rows());
    group_sums_.resize(n_cols());
    centered_ss_.resize(n_cols());
    std::vector<double> sums(n_groups_, 0.0);
    std::vector<char> seen(n_groups_, 0);
    std::vector<GroupId> touched;
    for (std::size_t j = 0; j < n_cols(); ++j) {
        double raw = 0.0;
        touched.clear();
        for (SparseMatrix::InnerIterator it(design_, static_cast<Eigen::Index>(j)); it; ++it) {
            const GroupId g = row_group_[static_cast<std::size_t>(it.row())];
            if (!seen[g]) {
                seen[g] = 1;
                touched.push_back(g);
            }
            sums[g] += it.value();
            raw += it.value() * it.value();
        }
        std::sort(touched.begin(), touched.end());
        double ss = raw;
        for (GroupId g : touched) {
            group_sums_[j].emplace_back(g, sums[g]);
            ss -= sums[g] * sums[g] / group_size_[g];
            sums[g] = 0.0;
            seen[g] = 0;
        }
        // a column constant within each group is all intercept
        centered_ss_[j] = ss > 1e-12 * raw ? ss / n : 0.0;
    }
}

WeightedLasso::State WeightedLasso::initial_state(std::span<const double> y, const Coefficients& b) const
{
    if (y.size() != n_rows()) fail(ErrorKind::invalid_argument, "lasso: response length must match rows");
    State s;
    s.beta = b.dense(n_cols());
    s.residual.assign(y.begin(), y.end());
    for (const auto& [j, v] : b.nonzeros) {
        for (SparseMatrix::InnerIterator it(design_, static_cast<Eigen::Index>(j)); it; ++it) {
            s.residual[static_cast<std::size_t>(it.row())] -= v * it.value();
        }
    }
    s.group_residual.assign(n_groups_, 0.0);
    for (std::size_t i = 0; i < n_rows(); ++i) s.group_residual[row_group_[i]] += s.residual[i];
    return s;
}

double WeightedLasso::gradient(std::size_t j, const State& s) const
{
    double dot = 0.0;
    for (SparseMatrix::InnerIterator it(design_, static_cast<Eigen::Index>(j)); it; ++it) {
        dot += it.value() * s.residual[static_cast<std::size_t>(it.row())];
    }
    // centered column against centered residual
    for (const auto& [g, sum] : group_sums_[j]) dot -= sum * s.group_residual[g] / group_size_[g];
    return dot / static_cast<double>(n_rows());
}

double WeightedLasso::update(std::size_t j, double lambda, State& s) const
{
    const double ss = centered_ss_[j];
    if (ss == 0.0) return 0.0;
    const double old = s.beta[j];
    const double z = gradient(j, s) + ss * old;
    const double next = soft_threshold(z, lambda * penalty_[j]) / ss;
    const double delta = next - old;
    if (delta == 0.0) return 0.0;
    s.beta[j] = next;
    for (SparseMatrix::InnerIterator it(design_, static_cast<Eigen::Index>(j)); it; ++it) {
        s.residual[static_cast<std::size_t>(it.row())] -= delta * it.value();
    }
    for (const auto& [g, sum] : group_sums_[j]) s.group_residual[g] -= delta * sum;
    return std::abs(delta) * std::sqrt(ss);
}

double WeightedLasso::lambda_max(std::span<const double> y) const
{
    const State s = initial_state(y, {});
    double best = 0.0;
    for (std::size_t j = 0; j < n_cols(); ++j) {
        if (centered_ss_[j] == 0.0) continue;
        best = std::max(best, std::abs(gradient(j, s)) / penalty_[j]);
    }
    // the nudge absorbs rounding in lambda * w_j, so every coordinate sits
    // strictly inside its threshold at grid[0]
    return best * (1.0 + 1e-10);
}

PathPoint WeightedLasso::fit(std::span<const double> y,
                             double lambda,
                             const SolverOptions& options,
                             const Coefficients& warm_start) const
{
    if (!(lambda >= 0.0)) fail(ErrorKind::invalid_argument, "lasso: lambda must be non-negative");
    if (!(options.tol > 0.0)) fail(ErrorKind::invalid_argument, "lasso: tolerance must be positive");

    State s = initial_state(y, warm_start);
    std::vector<char> is_active(n_cols(), 0);
    std::vector<std::size_t> active;
    for (const auto& [j, v] : warm_start.nonzeros) {
        is_active[j] = 1;
        active.push_back(j);
    }

    PathPoint point;
    point.lambda = lambda;
    point.converged = false;
    std::size_t sweeps = 0;
    while (sweeps < options.max_iter) {
        double move = 0.0;
        for (std::size_t j = 0; j < n_cols(); ++j) {
            move = std::max(move, update(j, lambda, s));
            if (s.beta[j] != 0.0 && !is_active[j]) {
                is_active[j] = 1;
                active.push_back(j);
            }
        }
        ++sweeps;
        if (move < options.tol) {
            point.converged = true;
            break;
        }
        while (sweeps < options.max_iter) {
            double inner = 0.0;
            for (std::size_t j : active) inner = std::max(inner, update(j, lambda, s));
            ++sweeps;
            if (inner < options.tol) break;
        }
    }
    point.sweeps = sweeps;
    point.coefficients = Coefficients::from_dense(s.beta);
    point.objective = objective(y, point.coefficients, lambda);
    return point;
}

std::vector<PathPoint> WeightedLasso::fit_path(std::span<const double> y,
                                               const LambdaGrid& grid,
                                               const SolverOptions& options) const
{
    std::vector<PathPoint> path;
    path.reserve(grid.size());
    Coefficients warm;
    for (double lambda : grid.values) {
        path.push_back(fit(y, lambda, options, warm));
        warm = path.back().coefficients;
    }
    return path;
}

double WeightedLasso::objective(std::span<const double> y, const Coefficients& b, double lambda) const
{
    const State s = initial_state(y, b);
    double rss = 0.0;
    for (double r : s.residual) rss += r * r;
    for (std::size_t g = 0; g < n_groups_; ++g) {
        if (group_size_[g] > 0.0) rss -= s.group_residual[g] * s.group_residual[g] / group_size_[g];
    }
    double l1 = 0.0;
    for (const auto& [j, v] : b.nonzeros) l1 += penalty_[j] * std::abs(v);
    return rss / (2.0 * static_cast<double>(n_rows())) + lambda * l1;
}

double WeightedLasso::kkt_residual(std::span<const double> y, const Coefficients& b, double lambda) const
{
    const State s = initial_state(y, b);
    double worst = 0.0;
    for (std::size_t j = 0; j < n_cols(); ++j) {
        if (centered_ss_[j] == 0.0) continue;
        const double g = gradient(j, s);
        const double t = lambda * penalty_[j];
        const double v = s.beta[j] == 0.0 ? std::max(0.0, std::abs(g) - t)
                                          : std::abs(g - std::copysign(t, s.beta[j]));
        worst = std::max(worst, v);
    }
    return worst;
}

LambdaGrid make_lambda_grid(const WeightedLasso& problem,
                            std::span<const double> y_centered,
                            std::size_t k,
                            double eps)
{
    if (k < 2) fail(ErrorKind::config, "lambda grid needs at least 2 values");
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::config, "lambda grid ratio must lie in (0, 1)");
    double top = problem.lambda_max(y_centered);
    // nothing to fit: any positive lambda gives the empty model
    if (!(top > 0.0)) top = 1.0;
    LambdaGrid grid;
    grid.values.reserve(k);
    const double log_top = std::log(top);
    const double log_eps = std::log(eps);
    grid.values.push_back(top);
    for (std::size_t i = 1; i < k; ++i) {
        grid.values.push_back(std::exp(log_top + log_eps * static_cast<double>(i) / static_cast<double>(k - 1)));
    }
    return grid;
}

std::vector<double> center_by_group(std::span<const double> y,
                                    std::span<const GroupId> groups,
                                    std::size_t n_groups,
                                    std::vector<double>* means)
{
    if (y.size() != groups.size()) fail(ErrorKind::invalid_argument, "center_by_group: length mismatch");
    std::vector<double> sum(n_groups, 0.0);
    std::vector<double> count(n_groups, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        sum[groups[i]] += y[i];
        count[groups[i]] += 1.0;
    }
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (count[g] > 0.0) sum[g] /= count[g];
    }
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - sum[groups[i]];
    if (means) *means = std::move(sum);
    return out;
}

WeightedLasso DslDesign::problem() const
{
    return WeightedLasso(z, penalty, row_group, n_groups);
}

DslDesign build_dsl_design(const SparseBinaryMatrix& x,
                           std::span<const GroupId> row_group,
                           std::size_t n_groups,
                           std::span<const double> group_weight,
                           std::span<const double> feature_weight,
                           bool standardize)
{
    const std::size_t n = x.n_rows();
    const std::size_t p = x.n_cols();
    if (row_group.size() != n) fail(ErrorKind::invalid_argument, "dsl design: one group per row required");
    if (group_weight.size() != n_groups) fail(ErrorKind::invalid_argument, "dsl design: one weight per group required");
    if (feature_weight.size() != p) fail(ErrorKind::invalid_argument, "dsl design: one weight per feature required");
    for (double r : group_weight) {
        if (!(r > 0.0)) fail(ErrorKind::invalid_argument, "dsl design: group weights must be positive");
    }
    for (double w : feature_weight) {
        if (!(w > 0.0)) fail(ErrorKind::invalid_argument, "dsl design: feature weights must be positive");
    }

    DslDesign d;
    d.n_features = p;
    d.n_groups = n_groups;
    d.row_group.assign(row_group.begin(), row_group.end());
    d.group_weight.assign(group_weight.begin(), group_weight.end());
    const std::size_t cols = p * (n_groups + 1);
    d.penalty.resize(cols);
    for (std::size_t b = 0; b <= n_groups; ++b) {
        std::copy(feature_weight.begin(), feature_weight.end(), d.penalty.begin() + static_cast<std::ptrdiff_t>(b * p));
    }

    d.column_scale.assign(cols, 1.0);
    if (standardize) {
        // per-group presence counts give the within-group centered variance
        std::vector<double> group_n(n_groups, 0.0);
        for (GroupId g : row_group) group_n[g] += 1.0;
        std::vector<std::vector<double>> counts(n_groups, std::vector<double>(p, 0.0));
        for (Index i = 0; i < n; ++i) {
            for (FeatureIndex j : x.row(i)) counts[row_group[i]][j] += 1.0;
        }
        for (std::size_t j = 0; j < p; ++j) {
            double shared = 0.0;
            for (std::size_t g = 0; g < n_groups; ++g) {
                const double c = counts[g][j];
                const double ss = c - c * c / std::max(group_n[g], 1.0);
                shared += ss;
                const double block = ss / (group_weight[g] * group_weight[g]);
                if (block > 0.0) d.column_scale[(g + 1) * p + j] = std::sqrt(block / static_cast<double>(n));
            }
            if (shared > 0.0) d.column_scale[j] = std::sqrt(shared / static_cast<double>(n));
        }
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * x.nnz());
    for (Index i = 0; i < n; ++i) {
        const GroupId g = row_group[i];
        const std::size_t offset = (g + 1) * p;
        for (FeatureIndex j : x.row(i)) {
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0 / d.column_scale[j]);
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(offset + j),
                                  1.0 / (group_weight[g] * d.column_scale[offset + j]));
        }
    }
    d.z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
    d.z.setFromTriplets(triplets.begin(), triplets.end());
    d.z.makeCompressed();
    return d;
}

std::vector<FeatureIndex> LassoFit::pooled_support() const
{
    std::vector<FeatureIndex> out;
    for (const auto& s : active_sets) out.insert(out.end(), s.begin(), s.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double LassoFit::predict(std::span<const FeatureIndex> row, GroupId group) const
{
    double m = intercepts.at(group);
    for (FeatureIndex j : row) m += beta_shared[j] + deltas[group][j];
    return m;
}

LassoFit to_lasso_fit(const DslDesign& design,
                      const SparseBinaryMatrix& x,
                      std::span<const double> y,
                      const PathPoint& point)
{
    const std::size_t p = design.n_features;
    const std::size_t G = design.n_groups;
    if (x.n_rows() != design.row_group.size() || y.size() != x.n_rows()) {
        fail(ErrorKind::invalid_argument, "to_lasso_fit: rows do not match the design");
    }
    LassoFit fit;
    fit.lambda = point.lambda;
    fit.converged = point.converged;
    fit.beta_shared.assign(p, 0.0);
    fit.deltas.assign(G, std::vector<double>(p, 0.0));
    for (const auto& [col, v] : point.coefficients.nonzeros) {
        const double unscaled = v / design.column_scale[col];
        if (col < p) {
            fit.beta_shared[col] = unscaled;
        } else {
            const std::size_t g = col / p - 1;
            fit.deltas[g][col % p] = unscaled / design.group_weight[g];
        }
    }
    fit.active_sets.assign(G, {});
    for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t j = 0; j < p; ++j) {
            if (fit.beta_shared[j] + fit.deltas[g][j] != 0.0) {
                fit.active_sets[g].push_back(static_cast<FeatureIndex>(j));
            }
        }
    }
    // mu_g = mean(y_g) - mean(x_g)' (beta + Delta_g)
    std::vector<double> sum(G, 0.0);
    std::vector<double> count(G, 0.0);
    for (Index i = 0; i < x.n_rows(); ++i) {
        const GroupId g = design.row_group[i];
        double xb = 0.0;
        for (FeatureIndex j : x.row(i)) xb += fit.beta_shared[j] + fit.deltas[g][j];
        sum[g] += y[i] - xb;
        count[g] += 1.0;
    }
    fit.intercepts.resize(G);
    for (std::size_t g = 0; g < G; ++g) fit.intercepts[g] = count[g] > 0.0 ? sum[g] / count[g] : 0.0;
    return fit;
}

std::vector<std::vector<FeatureIndex>> active_sets(const DslDesign& design, const Coefficients& b)
{
    const std::size_t p = design.n_features;
    const std::size_t G = design.n_groups;
    std::vector<std::pair<FeatureIndex, double>> shared;
    std::vector<std::vector<std::pair<FeatureIndex, double>>> blocks(G);
    for (const auto& [col, v] : b.nonzeros) {
        const double unscaled = v / design.column_scale[col];
        if (col < p) {
            shared.emplace_back(static_cast<FeatureIndex>(col), unscaled);
        } else {
            const std::size_t g = col / p - 1;
            blocks[g].emplace_back(static_cast<FeatureIndex>(col % p), unscaled / design.group_weight[g]);
        }
    }
    std::vector<std::vector<FeatureIndex>> out(G);
    for (std::size_t g = 0; g < G; ++g) {
        // merge two sorted sparse vectors, keeping nonzero sums
        auto a = shared.begin();
        auto c = blocks[g].begin();
        while (a != shared.end() || c != blocks[g].end()) {
            if (c == blocks[g].end() || (a != shared.end() && a->first < c->first)) {
                out[g].push_back(a->first);
                ++a;
            } else if (a == shared.end() || c->first < a->first) {
                out[g].push_back(c->first);
                ++c;
            } else {
                if (a->second + c->second != 0.0) out[g].push_back(a->first);
                ++a;
                ++c;
            }
        }
    }
    return out;
}

double OlsFit::predict(std::span<const FeatureIndex> row) const
{
    double m = intercept;
    for (FeatureIndex j : row) {
        const auto it = std::lower_bound(columns.begin(), columns.end(), j);
        if (it != columns.end() && *it == j) m += coefficients[static_cast<std::size_t>(it - columns.begin())];
    }
    return m;
}

OlsFit ols_fit(const SparseBinaryMatrix& x,
               std::span<const Index> rows,
               std::span<const FeatureIndex> columns,
               std::span<const double> y,
               double sigma_floor)
{
    if (rows.empty()) fail(ErrorKind::data, "ols: no rows to fit");
    const std::size_t k = columns.size();
    const double n = static_cast<double>(rows.size());

    std::vector<std::int32_t> position(x.n_cols(), -1);
    for (std::size_t a = 0; a < k; ++a) {
        if (columns[a] >= x.n_cols() || (a > 0 && columns[a] <= columns[a - 1])) {
            fail(ErrorKind::invalid_argument, "ols: columns must be sorted, unique and in range");
        }
        position[columns[a]] = static_cast<std::int32_t>(a);
    }

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    double ysum = 0.0;
    std::vector<std::int32_t> present;
    for (Index i : rows) {
        present.clear();
        for (FeatureIndex j : x.row(i)) {
            if (position[j] >= 0) present.push_back(position[j]);
        }
        const double yi = y[i];
        ysum += yi;
        for (std::size_t u = 0; u < present.size(); ++u) {
            colsum[present[u]] += 1.0;
            xty[present[u]] += yi;
            for (std::size_t v = u; v < present.size(); ++v) gram(present[u], present[v]) += 1.0;
        }
    }

    OlsFit fit;
    fit.columns.assign(columns.begin(), columns.end());
    const double ymean = ysum / n;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    if (k > 0) {
        const Eigen::VectorXd xmean = colsum / n;
        Eigen::MatrixXd centered = gram.selfadjointView<Eigen::Upper>();
        centered -= n * xmean * xmean.transpose();
        const Eigen::VectorXd rhs = xty - n * ymean * xmean;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(centered);
        bool singular = k >= rows.size() || ldlt.info() != Eigen::Success;
        if (!singular) {
            const Eigen::VectorXd d = ldlt.vectorD();
            singular = !(d.minCoeff() > 1e-10 * std::max(d.maxCoeff(), 0.0));
        }
        if (singular) {
            const double scale = std::max(centered.trace() / static_cast<double>(k), 1e-300);
            centered.diagonal().array() += 1e-8 * scale;
            b = centered.ldlt().solve(rhs);
            fit.rank_deficient = true;
        } else {
            b = ldlt.solve(rhs);
        }
        fit.intercept = ymean - xmean.dot(b);
    } else {
        fit.intercept = ymean;
    }
    fit.coefficients.assign(b.data(), b.data() + b.size());

    double rss = 0.0;
    for (Index i : rows) {
        double m = fit.intercept;
        for (FeatureIndex j : x.row(i)) {
            if (position[j] >= 0) m += b[position[j]];
        }
        rss += (y[i] - m) * (y[i] - m);
    }
    const double dof = std::max(1.0, n - static_cast<double>(k) - 1.0);
    fit.sigma = std::max(std::sqrt(rss / dof), sigma_floor);
    return fit;
}

std::vector<OlsFit> ols_refit(const SparseBinaryMatrix& x,
                              std::span<const Index> rows,
                              std::span<const GroupId> groups,
                              std::size_t n_groups,
                              const std::vector<std::vector<FeatureIndex>>& columns,
                              std::span<const double> y,
                              double sigma_floor)
{
    if (columns.size() != n_groups) fail(ErrorKind::invalid_argument, "ols_refit: one column set per group required");
    std::vector<std::vector<Index>> by_group(n_groups);
    for (Index i : rows) by_group.at(groups[i]).push_back(i);
    std::vector<OlsFit> fits;
    fits.reserve(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (by_group[g].empty()) fail(ErrorKind::data, "ols_refit: group " + std::to_string(g) + " has no rows");
        fits.push_back(ols_fit(x, by_group[g], columns[g], y, sigma_floor));
    }
    return fits;
}

} // namespace adabag
