#include "adabag/pca_lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/SVD>
#include <Eigen/SparseCore>
#include <spdlog/spdlog.h>

#include "adabag/error.hpp"
#include "adabag/rng.hpp"

namespace adabag {

std::optional<PcOrdering> parse_ordering(std::string_view name)
{
    if (name == "variance") return PcOrdering::variance;
    if (name == "entropy") return PcOrdering::entropy;
    if (name == "entropy-descending") return PcOrdering::entropy_descending;
    return std::nullopt;
}

std::string_view ordering_name(PcOrdering ordering)
{
    switch (ordering) {
    case PcOrdering::variance: return "variance";
    case PcOrdering::entropy: return "entropy";
    case PcOrdering::entropy_descending: return "entropy-descending";
    }
    return "variance";
}

double loading_entropy(const Eigen::Ref<const Eigen::VectorXd>& u)
{
    double h = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double q = u[j] * u[j];
        if (q > 0.0) h -= q * std::log(q);
    }
    return h;
}

namespace {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Training rows restricted to the kept columns, renumbered.
RowSparse training_matrix(const SparseBinaryMatrix& x,
                          std::span<const Index> rows,
                          const std::vector<long>& remap,
                          std::size_t n_kept)
{
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (FeatureIndex j : x.row(rows[r])) {
            if (remap[j] >= 0) triplets.emplace_back(static_cast<int>(r), static_cast<int>(remap[j]), 1.0);
        }
    }
    RowSparse m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_kept));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

// Sign convention: the largest-magnitude loading of each component is positive.
void fix_signs(Eigen::MatrixXd& v)
{
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        Eigen::Index arg = 0;
        v.col(k).cwiseAbs().maxCoeff(&arg);
        if (v(arg, k) < 0.0) v.col(k) = -v.col(k);
    }
}

struct Decomposition
{
    Eigen::MatrixXd v;
    Eigen::VectorXd singular;
};

Decomposition dense_svd(const RowSparse& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale)
{
    Eigen::MatrixXd a = Eigen::MatrixXd(x);
    a.rowwise() -= mean.transpose();
    a = a * scale.cwiseInverse().asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    return {svd.matrixV(), svd.singularValues()};
}

// Randomized subspace iteration on A = (X - 1 m^T) D^-1 without forming A.
Decomposition randomized_svd(const RowSparse& x,
                             const Eigen::VectorXd& mean,
                             const Eigen::VectorXd& scale,
                             std::size_t k,
                             std::size_t oversample,
                             std::size_t power_iterations,
                             std::uint64_t seed)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const Eigen::Index l = std::min<Eigen::Index>(static_cast<Eigen::Index>(k + oversample), std::min(n, p));
    const Eigen::VectorXd inv = scale.cwiseInverse();

    const auto apply = [&](const Eigen::MatrixXd& b) -> Eigen::MatrixXd {
        const Eigen::MatrixXd scaled = inv.asDiagonal() * b;
        Eigen::MatrixXd out = x * scaled;
        out.rowwise() -= (mean.transpose() * scaled);
        return out;
    };
    const auto apply_t = [&](const Eigen::MatrixXd& q) -> Eigen::MatrixXd {
        Eigen::MatrixXd out = x.transpose() * q;
        out -= mean * q.colwise().sum();
        return inv.asDiagonal() * out;
    };
    const auto orthonormal = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    };

    Rng rng = make_rng(seed, SeedStage::pca);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd omega(p, l);
    for (Eigen::Index j = 0; j < l; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) omega(i, j) = normal(rng);
    }
    Eigen::MatrixXd q = orthonormal(apply(omega));
    for (std::size_t it = 0; it < power_iterations; ++it) {
        q = orthonormal(apply(orthonormal(apply_t(q))));
    }
    // B = Q^T A, stored transposed (p x l)
    const Eigen::MatrixXd bt = apply_t(q);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(bt, Eigen::ComputeThinU);
    const Eigen::Index keep = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), l);
    return {svd.matrixU().leftCols(keep), svd.singularValues().head(keep)};
}

std::vector<std::size_t> make_order(const PcBasis& basis)
{
    std::vector<std::size_t> order(static_cast<std::size_t>(basis.eigenvalues.size()));
    std::iota(order.begin(), order.end(), 0);
    if (basis.ordering == PcOrdering::entropy) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return basis.entropy[a] < basis.entropy[b]; });
    } else if (basis.ordering == PcOrdering::entropy_descending) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return basis.entropy[a] > basis.entropy[b]; });
    }
    return order;
}

} // namespace

PcBasis fit_pca(const SparseBinaryMatrix& x, std::span<const Index> rows, const PcaOptions& options)
{
    const std::size_t n = rows.size();
    if (n < 2) fail(ErrorKind::data, "PCA needs at least two training rows");

    std::vector<double> counts(x.n_cols(), 0.0);
    for (Index i : rows) {
        for (FeatureIndex j : x.row(i)) counts[j] += 1.0;
    }
    PcBasis basis;
    basis.ordering = options.ordering;
    std::vector<long> remap(x.n_cols(), -1);
    std::vector<double> means;
    std::vector<double> sds;
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < x.n_cols(); ++j) {
        const double m = counts[j] / dn;
        // 0/1 column: sum (x - m)^2 = c (1 - m)
        const double var = counts[j] * (1.0 - m) / (dn - 1.0);
        if (var <= 0.0) {
            ++basis.dropped_columns;
            continue;
        }
        remap[j] = static_cast<long>(basis.columns.size());
        basis.columns.push_back(static_cast<FeatureIndex>(j));
        means.push_back(m);
        sds.push_back(std::sqrt(var));
    }
    if (basis.dropped_columns > 0) {
        spdlog::info("PCA: dropped {} zero-variance columns", basis.dropped_columns);
    }
    if (basis.columns.empty()) fail(ErrorKind::data, "PCA: every column is constant on the training rows");
    basis.mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    basis.scale = Eigen::Map<Eigen::VectorXd>(sds.data(), static_cast<Eigen::Index>(sds.size()));

    const std::size_t p = basis.columns.size();
    const RowSparse xt = training_matrix(x, rows, remap, p);
    const std::size_t rank_bound = std::min(n, p);

    Decomposition dec;
    if (p <= options.dense_limit) {
        dec = dense_svd(xt, basis.mean, basis.scale);
    } else {
        basis.truncated = true;
        std::size_t k = std::min(rank_bound, std::max<std::size_t>(options.min_components, 1));
        for (;;) {
            dec = randomized_svd(xt, basis.mean, basis.scale, k, options.oversample, options.power_iterations,
                                 options.seed);
            basis.components = dec.v;
            basis.eigenvalues = dec.singular.array().square() / (dn - 1.0);
            basis.entropy.clear();
            for (Eigen::Index c = 0; c < basis.components.cols(); ++c) {
                basis.entropy.push_back(loading_entropy(basis.components.col(c)));
            }
            basis.order = make_order(basis);
            if (threshold_pcs(basis, options.target_variance) > 0 || k >= rank_bound) break;
            k = std::min(rank_bound, 2 * k);
            spdlog::info("PCA: target variance not reached, retrying with {} components", k);
        }
    }
    fix_signs(dec.v);
    basis.components = std::move(dec.v);
    basis.eigenvalues = dec.singular.array().square() / (dn - 1.0);
    basis.entropy.clear();
    for (Eigen::Index c = 0; c < basis.components.cols(); ++c) {
        basis.entropy.push_back(loading_entropy(basis.components.col(c)));
    }
    basis.order = make_order(basis);
    return basis;
}

Eigen::VectorXd PcBasis::project(std::span<const FeatureIndex> row, std::size_t t) const
{
    Eigen::VectorXd z = -mean.cwiseQuotient(scale);
    for (FeatureIndex j : row) {
        const auto it = std::lower_bound(columns.begin(), columns.end(), j);
        if (it != columns.end() && *it == j) {
            const auto k = static_cast<Eigen::Index>(it - columns.begin());
            z[k] += 1.0 / scale[k];
        }
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(t));
    for (std::size_t k = 0; k < t; ++k) v[static_cast<Eigen::Index>(k)] = components.col(static_cast<Eigen::Index>(order.at(k))).dot(z);
    return v;
}

Eigen::MatrixXd PcBasis::project_rows(const SparseBinaryMatrix& x, std::span<const Index> rows, std::size_t t) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t));
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = project(x.row(rows[r]), t).transpose();
    return out;
}

std::size_t threshold_pcs(const PcBasis& basis, double target)
{
    if (!(target > 0.0 && target <= 1.0)) fail(ErrorKind::config, "variance target must lie in (0, 1]");
    const double total = basis.total_variance();
    double cumulative = 0.0;
    for (std::size_t k = 0; k < basis.order.size(); ++k) {
        cumulative += basis.eigenvalues[static_cast<Eigen::Index>(basis.order[k])];
        // relative slack absorbs rounding when the target is the full rank
        if (cumulative >= target * total * (1.0 - 1e-12)) return k + 1;
    }
    return 0;
}

double explained_variance(const PcBasis& basis, std::size_t t)
{
    double cumulative = 0.0;
    for (std::size_t k = 0; k < t && k < basis.order.size(); ++k) {
        cumulative += basis.eigenvalues[static_cast<Eigen::Index>(basis.order[k])];
    }
    return cumulative / basis.total_variance();
}

LdModel fit_lda(const Eigen::Ref<const Eigen::MatrixXd>& scores, std::span<const int> classes)
{
    const Eigen::Index n = scores.rows();
    const Eigen::Index t = scores.cols();
    if (static_cast<std::size_t>(n) != classes.size()) fail(ErrorKind::invalid_argument, "LDA: one class per row");
    if (t < 1) fail(ErrorKind::invalid_argument, "LDA needs at least one component");

    Eigen::VectorXd sum0 = Eigen::VectorXd::Zero(t);
    Eigen::VectorXd sum1 = Eigen::VectorXd::Zero(t);
    Eigen::Index n0 = 0;
    Eigen::Index n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (classes[static_cast<std::size_t>(i)] == 1) {
            sum1 += scores.row(i).transpose();
            ++n1;
        } else {
            sum0 += scores.row(i).transpose();
            ++n0;
        }
    }
    if (n0 == 0 || n1 == 0) fail(ErrorKind::data, "LDA: both classes must be present");
    if (n < 3) fail(ErrorKind::data, "LDA: needs at least three rows");
    const Eigen::VectorXd m0 = sum0 / static_cast<double>(n0);
    const Eigen::VectorXd m1 = sum1 / static_cast<double>(n1);

    Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(t, t);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd d = scores.row(i).transpose() - (classes[static_cast<std::size_t>(i)] == 1 ? m1 : m0);
        sw.noalias() += d * d.transpose();
    }
    sw /= static_cast<double>(n - 2);
    double jitter = 1e-8 * sw.trace() / static_cast<double>(t);
    if (!(jitter > 0.0)) jitter = 1e-8;
    sw.diagonal().array() += jitter;

    Eigen::LLT<Eigen::MatrixXd> llt(sw);
    if (llt.info() != Eigen::Success) fail(ErrorKind::numeric, "LDA: within-class covariance is singular");
    LdModel model;
    model.direction = llt.solve(m1 - m0);
    model.cutpoint = model.direction.dot(m1 + m0) / 2.0;
    return model;
}

PcaLdaOutcome pca_lda(const GroupedDataset& ds,
                      std::span<const Index> train,
                      std::span<const Index> test,
                      double target_variance,
                      PcaOptions options)
{
    options.target_variance = target_variance;
    const PcBasis basis = fit_pca(ds.x(), train, options);
    PcaLdaOutcome out;
    out.ordering = options.ordering;
    out.t = threshold_pcs(basis, target_variance);
    if (out.t == 0) fail(ErrorKind::numeric, "PCA: computed components do not reach the variance target");
    out.explained = explained_variance(basis, out.t);

    std::vector<int> classes;
    classes.reserve(train.size());
    for (Index i : train) classes.push_back(ds.class_of(i));
    const LdModel lda = fit_lda(basis.project_rows(ds.x(), train, out.t), classes);

    std::size_t wrong = 0;
    for (Index i : test) wrong += lda.classify(basis.project(ds.x().row(i), out.t)) != ds.class_of(i) ? 1 : 0;
    out.test_rows = test.size();
    out.test_me = test.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(test.size());
    return out;
}

PcaLdaReport run_pca_lda(const GroupedDataset& ds,
                         const SplitIndex& split,
                         double target_variance,
                         const PcaOptions& options,
                         const std::vector<PcOrdering>& orderings)
{
    std::vector<Index> train(split.core);
    train.insert(train.end(), split.validation.begin(), split.validation.end());
    std::sort(train.begin(), train.end());

    PcaLdaReport report;
    report.target_variance = target_variance;
    for (PcOrdering o : orderings) {
        PcaOptions opt = options;
        opt.ordering = o;
        report.pooled.push_back(pca_lda(ds, train, split.test, target_variance, opt));
    }
    if (ds.n_groups() > 1) {
        report.group_names = ds.group_names();
        for (GroupId g = 0; g < ds.n_groups(); ++g) {
            std::vector<Index> tr;
            std::vector<Index> te;
            for (Index i : train) if (ds.groups()[i] == g) tr.push_back(i);
            for (Index i : split.test) if (ds.groups()[i] == g) te.push_back(i);
            std::vector<PcaLdaOutcome> row;
            for (PcOrdering o : orderings) {
                PcaOptions opt = options;
                opt.ordering = o;
                row.push_back(pca_lda(ds, tr, te, target_variance, opt));
            }
            report.by_group.push_back(std::move(row));
        }
    }
    return report;
}

} // namespace adabag
