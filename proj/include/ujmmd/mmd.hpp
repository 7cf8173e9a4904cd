#pragma once

#include "ujmmd/kernels.hpp"
#include "ujmmd/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ujmmd {

enum class MmdKind { Marginal, Classwise, WeightedClasswise, Hsi, Novel };

/// Coefficient matrix of a squared-discrepancy quadratic form over the
/// concatenated source-then-target sample order.
struct MmdMatrix {
    Eigen::MatrixXd values;
    MmdKind kind = MmdKind::Marginal;
    int class_id = -1;   // classwise kinds only
    double delta = 0.0;  // novel kind only

    int size() const { return static_cast<int>(values.rows()); }
};

namespace detail {

inline void check_counts(int n_s, int n_t, const char* where) {
    if (n_s < 1 || n_t < 1)
        throw std::invalid_argument(std::string(where) + ": both domains need >= 1 sample");
}

}  // namespace detail

/// Marginal discrepancy coefficients: 1/n_s^2 within source, 1/n_t^2 within
/// target, -1/(n_s n_t) across. Rows sum to zero.
inline MmdMatrix mmd_marginal(int n_s, int n_t) {
    detail::check_counts(n_s, n_t, "mmd_marginal");
    const int n = n_s + n_t;
    Eigen::MatrixXd M(n, n);
    const double ss = 1.0 / (static_cast<double>(n_s) * n_s);
    const double tt = 1.0 / (static_cast<double>(n_t) * n_t);
    const double st = -1.0 / (static_cast<double>(n_s) * n_t);
    M.topLeftCorner(n_s, n_s).setConstant(ss);
    M.bottomRightCorner(n_t, n_t).setConstant(tt);
    M.topRightCorner(n_s, n_t).setConstant(st);
    M.bottomLeftCorner(n_t, n_s).setConstant(st);
    return MmdMatrix{std::move(M), MmdKind::Marginal};
}

/// Per-class discrepancy coefficients with per-class normalization
/// (1/(n_s^{(c)})^2 and friends). A class missing from either domain yields
/// the zero matrix for that round.
inline MmdMatrix mmd_classwise(const HardLabels& source_labels, const HardLabels& target_labels,
                               int c) {
    if (source_labels.num_classes != target_labels.num_classes)
        throw std::invalid_argument("mmd_classwise: label class counts disagree");
    if (c < 0 || c >= source_labels.num_classes)
        throw std::invalid_argument("mmd_classwise: class id outside [0, C)");
    const int n_s = source_labels.size();
    const int n_t = target_labels.size();
    const int n = n_s + n_t;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);

    std::vector<int> src, tgt;
    for (int j = 0; j < n_s; ++j)
        if (source_labels.ids[static_cast<std::size_t>(j)] == c)
            src.push_back(j);
    for (int j = 0; j < n_t; ++j)
        if (target_labels.ids[static_cast<std::size_t>(j)] == c)
            tgt.push_back(n_s + j);
    if (src.empty() || tgt.empty())
        return MmdMatrix{std::move(M), MmdKind::Classwise, c};

    const double nsc = static_cast<double>(src.size());
    const double ntc = static_cast<double>(tgt.size());
    for (int i : src)
        for (int j : src)
            M(i, j) = 1.0 / (nsc * nsc);
    for (int i : tgt)
        for (int j : tgt)
            M(i, j) = 1.0 / (ntc * ntc);
    for (int i : src)
        for (int j : tgt) {
            M(i, j) = -1.0 / (nsc * ntc);
            M(j, i) = -1.0 / (nsc * ntc);
        }
    return MmdMatrix{std::move(M), MmdKind::Classwise, c};
}

/// Marginal coefficients restricted to class-c pairs: same 1/n^2 weights as
/// mmd_marginal but zero outside the class-c rows and columns.
inline MmdMatrix mmd_weighted_classwise(const HardLabels& source_labels,
                                        const HardLabels& target_labels, int c) {
    if (source_labels.num_classes != target_labels.num_classes)
        throw std::invalid_argument("mmd_weighted_classwise: label class counts disagree");
    if (c < 0 || c >= source_labels.num_classes)
        throw std::invalid_argument("mmd_weighted_classwise: class id outside [0, C)");
    const int n_s = source_labels.size();
    const int n_t = target_labels.size();
    const MmdMatrix marginal = mmd_marginal(n_s, n_t);

    std::vector<int> ids(static_cast<std::size_t>(n_s + n_t));
    for (int j = 0; j < n_s; ++j)
        ids[static_cast<std::size_t>(j)] = source_labels.ids[static_cast<std::size_t>(j)];
    for (int j = 0; j < n_t; ++j)
        ids[static_cast<std::size_t>(n_s + j)] = target_labels.ids[static_cast<std::size_t>(j)];

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_s + n_t, n_s + n_t);
    for (int i = 0; i < n_s + n_t; ++i) {
        if (ids[static_cast<std::size_t>(i)] != c)
            continue;
        for (int j = 0; j < n_s + n_t; ++j)
            if (ids[static_cast<std::size_t>(j)] == c)
                M(i, j) = marginal.values(i, j);
    }
    return MmdMatrix{std::move(M), MmdKind::WeightedClasswise, c};
}

/// Within-domain second-moment coefficients: the marginal matrix with the
/// cross-domain block zeroed.
inline MmdMatrix mmd_hsi(int n_s, int n_t) {
    detail::check_counts(n_s, n_t, "mmd_hsi");
    const int n = n_s + n_t;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    M.topLeftCorner(n_s, n_s).setConstant(1.0 / (static_cast<double>(n_s) * n_s));
    M.bottomRightCorner(n_t, n_t).setConstant(1.0 / (static_cast<double>(n_t) * n_t));
    return MmdMatrix{std::move(M), MmdKind::Hsi};
}

/// Alignment-minus-discriminability coefficients: marginal matrix minus
/// delta times the within-domain matrix.
inline MmdMatrix mmd_novel(int n_s, int n_t, double delta) {
    if (delta < 0.0)
        throw std::invalid_argument("mmd_novel: delta must be nonnegative");
    MmdMatrix M = mmd_marginal(n_s, n_t);
    M.values -= delta * mmd_hsi(n_s, n_t).values;
    M.kind = MmdKind::Novel;
    M.delta = delta;
    return M;
}

namespace detail {

inline void check_square_match(Eigen::Index a, Eigen::Index b, const char* where) {
    if (a != b)
        throw std::invalid_argument(std::string(where) + ": matrix sizes disagree (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace detail

/// Scalar discrepancy trace((K_xx hadamard K_yy) * M), evaluated entrywise
/// without materializing the product.
inline double jmmd_distance(const KernelMatrix& K_xx, const KernelMatrix& K_yy,
                            const MmdMatrix& M) {
    detail::check_square_match(K_xx.values.rows(), K_yy.values.rows(), "jmmd_distance");
    detail::check_square_match(K_xx.values.rows(), M.values.rows(), "jmmd_distance");
    return (K_xx.values.array() * K_yy.values.array() * M.values.transpose().array()).sum();
}

/// Discrepancy after projecting features through B: the feature kernel is
/// replaced by K_xx B B^T K_xx and evaluated like jmmd_distance.
inline double projected_jmmd(const KernelMatrix& K_xx, const KernelMatrix& K_yy,
                             const MmdMatrix& M, const Eigen::MatrixXd& B) {
    detail::check_square_match(K_xx.values.rows(), K_yy.values.rows(), "projected_jmmd");
    detail::check_square_match(K_xx.values.rows(), M.values.rows(), "projected_jmmd");
    detail::check_square_match(K_xx.values.rows(), B.rows(), "projected_jmmd");
    const Eigen::MatrixXd G = K_xx.values * B;  // n x d
    return ((G * G.transpose()).array() * K_yy.values.array() *
            M.values.transpose().array())
        .sum();
}

/// Within-domain feature-label dependence trace((K_xx hadamard K_yy) * M_h).
inline double hsi_metric(const KernelMatrix& K_xx, const KernelMatrix& K_yy, int n_s, int n_t) {
    if (n_s + n_t != K_xx.values.rows())
        throw std::invalid_argument("hsi_metric: n_s + n_t must equal the kernel size");
    return jmmd_distance(K_xx, K_yy, mmd_hsi(n_s, n_t));
}

/// Reference evaluation with explicit maps: builds the m x C cross-moment
/// matrices (1/n) * sum_i x_i y_i^T per domain with one-hot labels and
/// returns the squared Frobenius distance between them. Equals
/// jmmd_distance with linear kernels on both views.
inline double brute_force_jmmd(const FeatureMatrix& X_all, const SoftLabels& one_hot_labels,
                               int n_s, int n_t) {
    detail::check_counts(n_s, n_t, "brute_force_jmmd");
    if (X_all.cols() != n_s + n_t || one_hot_labels.size() != n_s + n_t)
        throw std::invalid_argument("brute_force_jmmd: sample counts disagree");
    const Eigen::MatrixXd Y = one_hot_labels.probs;  // C x n
    const Eigen::MatrixXd C_s =
        X_all.leftCols(n_s) * Y.leftCols(n_s).transpose() / static_cast<double>(n_s);
    const Eigen::MatrixXd C_t =
        X_all.rightCols(n_t) * Y.rightCols(n_t).transpose() / static_cast<double>(n_t);
    return (C_s - C_t).squaredNorm();
}

}  // namespace ujmmd
