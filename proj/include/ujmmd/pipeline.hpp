#pragma once

#include "ujmmd/data.hpp"
#include "ujmmd/kernels.hpp"
#include "ujmmd/mmd.hpp"
#include "ujmmd/solver.hpp"
#include "ujmmd/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace ujmmd {

/// Euclidean k-nearest-neighbor majority vote. Neighbors are ranked by
/// (distance, training index); a vote tie goes to the class owning the
/// best-ranked neighbor, then to the lowest class id.
inline HardLabels knn_predict(const FeatureMatrix& train, const HardLabels& train_labels,
                              const FeatureMatrix& test, int k) {
    const int n_train = static_cast<int>(train.cols());
    const int n_test = static_cast<int>(test.cols());
    if (k < 1)
        throw std::invalid_argument("knn_predict: k must be >= 1");
    if (k > n_train)
        throw std::invalid_argument("knn_predict: k=" + std::to_string(k) + " exceeds " +
                                    std::to_string(n_train) + " training samples");
    if (train.rows() != test.rows())
        throw std::invalid_argument("knn_predict: embedding dimensions disagree");
    if (train_labels.size() != n_train)
        throw std::invalid_argument("knn_predict: label count != training sample count");
    train_labels.validate();

    const int C = train_labels.num_classes;
    HardLabels out;
    out.num_classes = C;
    out.ids.reserve(static_cast<std::size_t>(n_test));

    std::vector<int> order(static_cast<std::size_t>(n_train));
    std::vector<double> d2(static_cast<std::size_t>(n_train));
    std::vector<int> votes(static_cast<std::size_t>(C));
    std::vector<int> first_rank(static_cast<std::size_t>(C));

    for (int j = 0; j < n_test; ++j) {
        for (int i = 0; i < n_train; ++i)
            d2[static_cast<std::size_t>(i)] = (train.col(i) - test.col(j)).squaredNorm();
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = d2[static_cast<std::size_t>(a)];
            const double db = d2[static_cast<std::size_t>(b)];
            return da < db || (da == db && a < b);
        });

        std::fill(votes.begin(), votes.end(), 0);
        std::fill(first_rank.begin(), first_rank.end(), n_train);
        for (int r = 0; r < k; ++r) {
            const int c = train_labels.ids[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
            ++votes[static_cast<std::size_t>(c)];
            if (first_rank[static_cast<std::size_t>(c)] == n_train)
                first_rank[static_cast<std::size_t>(c)] = r;
        }
        int best = 0;
        for (int c = 1; c < C; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            const auto bi = static_cast<std::size_t>(best);
            if (votes[ci] > votes[bi] ||
                (votes[ci] == votes[bi] && first_rank[ci] < first_rank[bi]))
                best = c;
        }
        out.ids.push_back(best);
    }
    return out;
}

/// Fraction of matching ids between a prediction and the reference labels.
inline double accuracy(const HardLabels& predicted, const HardLabels& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("accuracy: label counts disagree");
    if (predicted.size() == 0)
        throw std::invalid_argument("accuracy: empty label sets");
    int hits = 0;
    for (std::size_t i = 0; i < predicted.ids.size(); ++i)
        if (predicted.ids[i] == truth.ids[i])
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

enum class MethodMode { KnnBaseline, Pca, Jmmd };

/// Full configuration of one adaptation method: which label kernel weights
/// the alignment, how strongly discriminability is kept (delta), and the
/// solver/classifier settings.
struct MethodSpec {
    std::string name = "WC";
    MethodMode mode = MethodMode::Jmmd;
    int label_kernel_variant = 3;
    double delta = 0.0;
    double lambda = 0.1;
    int dim = 20;
    int iterations = 5;
    KernelSpec kernel;
    int knn_k = 1;
    std::optional<double> ridge;  // unset: relative default from the objective

    void validate() const {
        if (mode == MethodMode::Jmmd &&
            (label_kernel_variant < 1 || label_kernel_variant > 4))
            throw std::invalid_argument("MethodSpec: label kernel variant must be 1..4");
        if (delta < 0.0)
            throw std::invalid_argument("MethodSpec: delta must be nonnegative");
        if (lambda <= 0.0)
            throw std::invalid_argument("MethodSpec: lambda must be positive");
        if (dim < 1)
            throw std::invalid_argument("MethodSpec: dim must be >= 1");
        if (iterations < 1)
            throw std::invalid_argument("MethodSpec: iteration count must be >= 1");
        if (knn_k < 1)
            throw std::invalid_argument("MethodSpec: knn_k must be >= 1");
        if (ridge && *ridge < 0.0)
            throw std::invalid_argument("MethodSpec: ridge must be nonnegative");
        kernel.validate();
    }
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "KNN-baseline", "PCA", "M", "M*", "C", "C*", "WC", "WC*", "WWC", "WWC*"};
    return names;
}

/// Named method presets. The letter names select the label kernel (M
/// marginal, C class-conditional, WC weighted, WWC shift-corrected); a
/// trailing star turns on the within-domain term with delta 0.1.
inline MethodSpec method_preset(const std::string& name) {
    MethodSpec spec;
    spec.name = name;
    if (name == "KNN-baseline") {
        spec.mode = MethodMode::KnnBaseline;
        spec.iterations = 1;
        return spec;
    }
    if (name == "PCA") {
        spec.mode = MethodMode::Pca;
        spec.iterations = 1;
        return spec;
    }
    std::string base = name;
    bool starred = false;
    if (!base.empty() && base.back() == '*') {
        starred = true;
        base.pop_back();
    }
    if (base == "M")
        spec.label_kernel_variant = 1;
    else if (base == "C")
        spec.label_kernel_variant = 2;
    else if (base == "WC")
        spec.label_kernel_variant = 3;
    else if (base == "WWC")
        spec.label_kernel_variant = 4;
    else
        throw std::invalid_argument("unknown preset: '" + name + "'");
    spec.delta = starred ? 0.1 : 0.0;
    return spec;
}

/// Outcome record of one adaptation run.
struct RunResult {
    std::vector<double> per_iteration_accuracy;  // empty when no target truth
    double final_accuracy = std::numeric_limits<double>::quiet_NaN();
    double final_feature_distance = 0.0;
    double final_hsi = 0.0;
};

/// RunResult plus the artifacts needed to evaluate the run further.
struct RunOutcome {
    RunResult result;
    FeatureMatrix embedding;  // final representation, one column per sample
    HardLabels final_pseudo;
    std::vector<HardLabels> pseudo_history;  // one entry per iteration
};

namespace detail {

// Distance and dependence of an embedding under a label assignment, both
// with linear kernels: the aggregate class-conditional discrepancy
// trace((K hadamard K3) M_m) and the within-domain counterpart.
inline std::pair<double, double> embedding_diagnostics(const FeatureMatrix& Z,
                                                       const HardLabels& source_labels,
                                                       const HardLabels& target_labels) {
    const int n_s = source_labels.size();
    const int n_t = target_labels.size();
    const KernelMatrix K_z = feature_kernel(Z, KernelSpec{});
    const KernelMatrix K3 =
        label_kernel(3, source_labels, target_labels, source_labels.num_classes);
    const double dist = jmmd_distance(K_z, K3, mmd_marginal(n_s, n_t));
    const double hsi = hsi_metric(K_z, K3, n_s, n_t);
    return {dist, hsi};
}

}  // namespace detail

/// Iterative adaptation loop: pseudo-label the target, reweight the
/// alignment through the label kernel, solve for the projection, embed,
/// re-classify, repeat. Ground truth never enters the loop; accuracies are
/// scored afterwards from the recorded pseudo-label history.
inline RunOutcome run_da_full(const DomainPair& pair, const MethodSpec& method) {
    pair.validate();
    method.validate();
    const int n_s = pair.n_s();
    const int n_t = pair.n_t();
    const int C = pair.num_classes;

    RunOutcome out;
    HardLabels pseudo = knn_predict(pair.source_features, pair.source_labels,
                                    pair.target_features, method.knn_k);

    if (method.mode == MethodMode::KnnBaseline) {
        out.embedding = pair.all_features();
        out.pseudo_history.push_back(pseudo);
    } else {
        const KernelMatrix K_xx = feature_kernel(pair.all_features(), method.kernel);
        FeatureMatrix Z;
        for (int t = 0; t < method.iterations; ++t) {
            Objective obj;
            if (method.mode == MethodMode::Pca) {
                obj = build_pca_objective(K_xx, method.lambda);
            } else {
                const KernelMatrix K_yy =
                    label_kernel(method.label_kernel_variant, pair.source_labels, pseudo, C);
                if ((method.label_kernel_variant == 2 || method.label_kernel_variant == 4) &&
                    K_yy.values.cwiseAbs().maxCoeff() == 0.0)
                    throw std::runtime_error(
                        "run_da: no class has members in both domains under the current "
                        "pseudo-labels; the label kernel vanished");
                obj = build_objective(K_xx, K_yy, method.delta, method.lambda, n_s, n_t);
            }
            const double ridge = method.ridge ? *method.ridge : default_ridge(obj.Cmat);
            const Projection proj = solve_projection(obj, method.dim, ridge);
            Z = embed(proj, K_xx);
            pseudo = knn_predict(Z.leftCols(n_s), pair.source_labels, Z.rightCols(n_t),
                                 method.knn_k);
            out.pseudo_history.push_back(pseudo);
        }
        out.embedding = std::move(Z);
    }
    out.final_pseudo = pseudo;

    if (pair.target_truth) {
        for (const HardLabels& p : out.pseudo_history)
            out.result.per_iteration_accuracy.push_back(accuracy(p, *pair.target_truth));
        out.result.final_accuracy = out.result.per_iteration_accuracy.back();
    }
    const auto [dist, hsi] =
        detail::embedding_diagnostics(out.embedding, pair.source_labels, out.final_pseudo);
    out.result.final_feature_distance = dist;
    out.result.final_hsi = hsi;
    return out;
}

inline RunResult run_da(const DomainPair& pair, const MethodSpec& method) {
    return run_da_full(pair, method).result;
}

struct AblationMetrics {
    double feature_distance = 0.0;
    double hsi = 0.0;
    double final_accuracy = std::numeric_limits<double>::quiet_NaN();
};

/// Re-measures the final embedding of a run against the ground-truth target
/// labels (measurement only; learning still sees pseudo-labels).
inline AblationMetrics evaluate_ablation(const DomainPair& pair, const MethodSpec& method) {
    if (!pair.target_truth)
        throw std::invalid_argument("evaluate_ablation: target ground truth required");
    const RunOutcome outcome = run_da_full(pair, method);
    const auto [dist, hsi] = detail::embedding_diagnostics(
        outcome.embedding, pair.source_labels, *pair.target_truth);
    return AblationMetrics{dist, hsi, outcome.result.final_accuracy};
}

struct ShiftSummary {
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation
    std::vector<double> per_run;
    std::vector<RunResult> per_run_results;
};

/// Label-shift robustness protocol: `repeats` independent 50%-drop
/// simulations (seeds base_seed, base_seed+1, ...), one adaptation run each.
inline ShiftSummary run_label_shift_experiment(const DomainPair& pair, const MethodSpec& method,
                                               int repeats, std::uint64_t base_seed) {
    if (repeats < 1)
        throw std::invalid_argument("run_label_shift_experiment: repeats must be >= 1");
    ShiftSummary summary;
    summary.per_run.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        const DomainPair shifted = simulate_label_shift(pair, 0.5, base_seed + static_cast<std::uint64_t>(r));
        RunResult res = run_da(shifted, method);
        if (std::isnan(res.final_accuracy))
            throw std::runtime_error("run_label_shift_experiment: run produced no accuracy");
        summary.per_run.push_back(res.final_accuracy);
        summary.per_run_results.push_back(std::move(res));
    }
    const double n = static_cast<double>(summary.per_run.size());
    summary.mean = std::accumulate(summary.per_run.begin(), summary.per_run.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : summary.per_run)
        ss += (v - summary.mean) * (v - summary.mean);
    summary.std_dev = std::sqrt(ss / n);
    return summary;
}

}  // namespace ujmmd
