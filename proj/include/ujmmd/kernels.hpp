#pragma once

#include "ujmmd/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ujmmd {

enum class KernelFamily { Linear, Rbf, Polynomial };

inline KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "linear")
        return KernelFamily::Linear;
    if (name == "rbf")
        return KernelFamily::Rbf;
    if (name == "poly" || name == "polynomial")
        return KernelFamily::Polynomial;
    throw std::invalid_argument("unknown kernel family: '" + name + "' (expected linear|rbf|poly)");
}

inline std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Rbf: return "rbf";
        case KernelFamily::Polynomial: return "poly";
    }
    return "?";
}

/// Choice of feature kernel. An unset bandwidth means the RBF width is taken
/// from the median pairwise distance of the data it is applied to.
struct KernelSpec {
    KernelFamily family = KernelFamily::Linear;
    std::optional<double> bandwidth;  // rbf only
    int degree = 2;                   // polynomial only
    double offset = 1.0;              // polynomial only

    void validate() const {
        if (bandwidth && *bandwidth <= 0.0)
            throw std::invalid_argument("KernelSpec: explicit bandwidth must be positive");
        if (degree < 1)
            throw std::invalid_argument("KernelSpec: polynomial degree must be >= 1");
    }
};

enum class KernelKind { Feature, LabelVariant1, LabelVariant2, LabelVariant3, LabelVariant4 };

/// A symmetric kernel Gram matrix over the concatenated source-then-target
/// sample order, tagged with how it was built.
struct KernelMatrix {
    Eigen::MatrixXd values;
    KernelKind kind = KernelKind::Feature;

    int size() const { return static_cast<int>(values.rows()); }

    void validate() const {
        if (values.rows() != values.cols())
            throw std::invalid_argument("KernelMatrix: must be square");
        if (!values.allFinite())
            throw std::invalid_argument("KernelMatrix: entries must be finite");
        const double asym = (values - values.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12)
            throw std::invalid_argument("KernelMatrix: asymmetry " + std::to_string(asym) +
                                        " exceeds 1e-12");
    }
};

/// Median of the n(n-1)/2 pairwise Euclidean distances (average of the two
/// middle values for an even pair count).
inline double median_bandwidth(const FeatureMatrix& X) {
    const int n = static_cast<int>(X.cols());
    if (n < 2)
        throw std::invalid_argument("median_bandwidth: need at least two samples");
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dists.push_back((X.col(i) - X.col(j)).norm());
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    const double median =
        (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (!(median > 0.0))
        throw std::runtime_error(
            "median_bandwidth: median pairwise distance is 0 (duplicate-heavy data); "
            "pass an explicit bandwidth instead");
    return median;
}

/// Gram matrix of the chosen feature kernel over all columns of X_all.
/// Symmetry is enforced exactly by averaging with the transpose.
inline KernelMatrix feature_kernel(const FeatureMatrix& X_all, const KernelSpec& spec) {
    spec.validate();
    if (!X_all.allFinite())
        throw std::invalid_argument("feature_kernel: features must be finite");
    const Eigen::Index n = X_all.cols();
    if (n < 1)
        throw std::invalid_argument("feature_kernel: need at least one sample");

    Eigen::MatrixXd K;
    switch (spec.family) {
        case KernelFamily::Linear: {
            K = X_all.transpose() * X_all;
            break;
        }
        case KernelFamily::Rbf: {
            const double sigma = spec.bandwidth ? *spec.bandwidth : median_bandwidth(X_all);
            const Eigen::VectorXd sq = X_all.colwise().squaredNorm();
            Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                                 2.0 * (X_all.transpose() * X_all);
            d2 = d2.cwiseMax(0.0);
            K = (-d2 / (2.0 * sigma * sigma)).array().exp();
            break;
        }
        case KernelFamily::Polynomial: {
            const Eigen::MatrixXd inner = X_all.transpose() * X_all;
            K = (inner.array() + spec.offset).pow(spec.degree);
            break;
        }
    }
    K = 0.5 * (K + K.transpose().eval());
    return KernelMatrix{std::move(K), KernelKind::Feature};
}

namespace detail {

inline void check_label_pair(const HardLabels& source, const HardLabels& target,
                             int num_classes, const char* where) {
    if (source.num_classes != num_classes || target.num_classes != num_classes)
        throw std::invalid_argument(std::string(where) + ": label class counts disagree with C");
    source.validate();
    target.validate();
}

}  // namespace detail

/// Label Gram matrix over source-then-target order. The four variants weight
/// same-class pairs differently:
///   1: constant 1 everywhere (labels ignored),
///   2: per-domain inverse class frequencies n/n^{(c)},
///   3: plain same-class indicator,
///   4: source reweighted by the target class proportions, target unweighted.
/// A class missing the counts a variant divides by contributes a zero block
/// for that round instead of raising.
inline KernelMatrix label_kernel(int variant, const HardLabels& source_labels,
                                 const HardLabels& target_labels, int num_classes) {
    detail::check_label_pair(source_labels, target_labels, num_classes, "label_kernel");
    const int ns = source_labels.size();
    const int nt = target_labels.size();
    const int n = ns + nt;

    if (variant == 1) {
        return KernelMatrix{Eigen::MatrixXd::Ones(n, n), KernelKind::LabelVariant1};
    }

    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int j = 0; j < ns; ++j)
        ids[static_cast<std::size_t>(j)] = source_labels.ids[static_cast<std::size_t>(j)];
    for (int j = 0; j < nt; ++j)
        ids[static_cast<std::size_t>(ns + j)] = target_labels.ids[static_cast<std::size_t>(j)];

    if (variant == 3) {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (ids[static_cast<std::size_t>(i)] == ids[static_cast<std::size_t>(j)])
                    K(i, j) = 1.0;
        return KernelMatrix{std::move(K), KernelKind::LabelVariant3};
    }
    if (variant != 2 && variant != 4)
        throw std::invalid_argument("label_kernel: variant must be 1, 2, 3, or 4");

    const std::vector<int> cs = class_counts(source_labels, num_classes);
    const std::vector<int> ct = class_counts(target_labels, num_classes);

    // Each same-class block is the outer product of a per-sample weight, so
    // computing the weight first keeps the blocks exactly rank-1. Integer
    // ratios make variant 4 collapse to variant 3 bit-exactly when the class
    // proportions of the two domains coincide.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const int c = ids[static_cast<std::size_t>(j)];
        const std::int64_t nsc = cs[static_cast<std::size_t>(c)];
        const std::int64_t ntc = ct[static_cast<std::size_t>(c)];
        const bool is_source = j < ns;
        if (variant == 2) {
            if (nsc == 0 || ntc == 0)
                continue;  // class absent from one domain, block stays zero
            w(j) = is_source ? static_cast<double>(ns) / static_cast<double>(nsc)
                             : static_cast<double>(nt) / static_cast<double>(ntc);
        } else {  // variant 4
            if (nsc == 0)
                continue;  // no source members to reweight toward, block stays zero
            w(j) = is_source ? static_cast<double>(ntc * ns) /
                                   static_cast<double>(static_cast<std::int64_t>(nt) * nsc)
                             : 1.0;
        }
    }

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (w(i) == 0.0)
            continue;
        for (int j = 0; j < n; ++j)
            if (ids[static_cast<std::size_t>(i)] == ids[static_cast<std::size_t>(j)])
                K(i, j) = w(i) * w(j);
    }
    return KernelMatrix{std::move(K),
                        variant == 2 ? KernelKind::LabelVariant2 : KernelKind::LabelVariant4};
}

struct PsdReport {
    double min_eigenvalue = 0.0;
    bool pass = false;
};

/// Smallest eigenvalue of a symmetric matrix, passed against -tol.
inline PsdReport psd_report(const KernelMatrix& K, double tol) {
    K.validate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.values,
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_report: eigenvalue computation failed");
    const double lam = es.eigenvalues().minCoeff();
    return PsdReport{lam, lam >= -tol};
}

}  // namespace ujmmd
