#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ujmmd {

/// Feature matrices are dense and column-per-sample: an m x n matrix holds
/// n samples of dimension m.
using FeatureMatrix = Eigen::MatrixXd;

/// Hard class assignments. Ids are 0-based and bounded by `num_classes`.
struct HardLabels {
    std::vector<int> ids;
    int num_classes = 0;

    HardLabels() = default;
    HardLabels(std::vector<int> ids_, int num_classes_)
        : ids(std::move(ids_)), num_classes(num_classes_) {
        validate();
    }

    int size() const { return static_cast<int>(ids.size()); }

    void validate() const {
        if (num_classes <= 0)
            throw std::invalid_argument("HardLabels: class count must be positive");
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] < 0 || ids[i] >= num_classes)
                throw std::invalid_argument(
                    "HardLabels: id " + std::to_string(ids[i]) + " at position " +
                    std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
};

/// Per-sample class probabilities, one column per sample. Columns sum to 1.
struct SoftLabels {
    Eigen::MatrixXd probs;  // C x n

    int num_classes() const { return static_cast<int>(probs.rows()); }
    int size() const { return static_cast<int>(probs.cols()); }

    void validate() const {
        if (probs.rows() < 1)
            throw std::invalid_argument("SoftLabels: need at least one class row");
        if ((probs.array() < -1e-12).any() || (probs.array() > 1.0 + 1e-12).any())
            throw std::invalid_argument("SoftLabels: entries must lie in [0, 1]");
        for (int j = 0; j < probs.cols(); ++j) {
            const double s = probs.col(j).sum();
            if (std::abs(s - 1.0) > 1e-9)
                throw std::invalid_argument(
                    "SoftLabels: column " + std::to_string(j) + " sums to " +
                    std::to_string(s) + ", expected 1");
        }
    }
};

/// A labeled source domain plus an unlabeled target domain over a shared
/// feature space. `target_truth` is for evaluation only and never feeds a
/// learning step.
struct DomainPair {
    FeatureMatrix source_features;  // m x n_s
    HardLabels source_labels;
    FeatureMatrix target_features;  // m x n_t
    std::optional<HardLabels> target_truth;
    int num_classes = 0;

    int n_s() const { return static_cast<int>(source_features.cols()); }
    int n_t() const { return static_cast<int>(target_features.cols()); }
    int n_st() const { return n_s() + n_t(); }
    int dim() const { return static_cast<int>(source_features.rows()); }

    /// Source and target samples concatenated column-wise, source first.
    FeatureMatrix all_features() const {
        FeatureMatrix X(dim(), n_st());
        X.leftCols(n_s()) = source_features;
        X.rightCols(n_t()) = target_features;
        return X;
    }

    void validate() const {
        if (num_classes <= 0)
            throw std::invalid_argument("DomainPair: class count must be positive");
        if (source_features.cols() < 1 || target_features.cols() < 1)
            throw std::invalid_argument("DomainPair: both domains need at least one sample");
        if (source_features.rows() != target_features.rows())
            throw std::invalid_argument("DomainPair: feature dimensions differ across domains");
        if (!source_features.allFinite() || !target_features.allFinite())
            throw std::invalid_argument("DomainPair: features must be finite");
        if (source_labels.size() != n_s())
            throw std::invalid_argument("DomainPair: source label count != source sample count");
        if (source_labels.num_classes != num_classes)
            throw std::invalid_argument("DomainPair: source label class count mismatch");
        source_labels.validate();
        if (target_truth) {
            if (target_truth->size() != n_t())
                throw std::invalid_argument("DomainPair: target truth count != target sample count");
            if (target_truth->num_classes != num_classes)
                throw std::invalid_argument("DomainPair: target truth class count mismatch");
            target_truth->validate();
        }
    }
};

/// Exact per-class histogram of a label vector.
inline std::vector<int> class_counts(const HardLabels& labels, int num_classes) {
    if (num_classes <= 0)
        throw std::invalid_argument("class_counts: class count must be positive");
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int id : labels.ids) {
        if (id < 0 || id >= num_classes)
            throw std::invalid_argument("class_counts: label id outside [0, C)");
        ++counts[static_cast<std::size_t>(id)];
    }
    return counts;
}

/// Per-column argmax; ties break toward the lowest class index.
inline HardLabels harden(const SoftLabels& soft) {
    soft.validate();
    HardLabels out;
    out.num_classes = soft.num_classes();
    out.ids.reserve(static_cast<std::size_t>(soft.size()));
    for (int j = 0; j < soft.probs.cols(); ++j) {
        int best = 0;
        double best_p = soft.probs(0, j);
        for (int c = 1; c < soft.probs.rows(); ++c) {
            if (soft.probs(c, j) > best_p) {
                best_p = soft.probs(c, j);
                best = c;
            }
        }
        out.ids.push_back(best);
    }
    return out;
}

/// One-hot encoding of hard labels as soft labels.
inline SoftLabels one_hot(const HardLabels& labels) {
    labels.validate();
    SoftLabels soft;
    soft.probs = Eigen::MatrixXd::Zero(labels.num_classes, labels.size());
    for (int j = 0; j < labels.size(); ++j)
        soft.probs(labels.ids[static_cast<std::size_t>(j)], j) = 1.0;
    return soft;
}

}  // namespace ujmmd
