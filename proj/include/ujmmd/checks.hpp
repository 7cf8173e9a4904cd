#pragma once

#include "ujmmd/config.hpp"
#include "ujmmd/data.hpp"
#include "ujmmd/kernels.hpp"
#include "ujmmd/mmd.hpp"
#include "ujmmd/pipeline.hpp"
#include "ujmmd/solver.hpp"
#include "ujmmd/types.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ujmmd {

struct CheckOptions {
    // Test hook: corrupts the marginal coefficient matrix inside the
    // alignment-identity checks so a broken build is visibly caught.
    bool inject_mm_sign_error = false;
};

namespace checks_detail {

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            M(i, j) = g(rng);
    return M;
}

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
    const Eigen::MatrixXd M = random_matrix(n, n, rng);
    return 0.5 * (M + M.transpose());
}

// Labels with at least one member of every class (so no variant degenerates).
inline HardLabels random_full_labels(int n, int C, std::mt19937_64& rng) {
    if (n < C)
        throw std::invalid_argument("random_full_labels: need n >= C");
    HardLabels L;
    L.num_classes = C;
    L.ids.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < C; ++j)
        L.ids[static_cast<std::size_t>(j)] = j;
    std::uniform_int_distribution<int> pick(0, C - 1);
    for (int j = C; j < n; ++j)
        L.ids[static_cast<std::size_t>(j)] = pick(rng);
    // Shuffle so the guaranteed members are not always the first C samples.
    for (int j = n - 1; j > 0; --j) {
        std::uniform_int_distribution<int> swap_with(0, j);
        std::swap(L.ids[static_cast<std::size_t>(j)],
                  L.ids[static_cast<std::size_t>(swap_with(rng))]);
    }
    return L;
}

inline double trace_product(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M) {
    return (K.array() * M.transpose().array()).sum();
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

}  // namespace checks_detail

/// Self-check suite: executable statements of the library's algebraic
/// contracts on fixed-seed random instances. Prints one PASS/FAIL line per
/// property to `out` and returns the number of failures.
inline int cmd_check(const CheckOptions& options, std::ostream& out) {
    namespace cd = checks_detail;
    int failures = 0;

    const auto report = [&](const std::string& name, const std::optional<std::string>& fail) {
        if (fail) {
            ++failures;
            out << "FAIL " << name << ": " << *fail << "\n";
        } else {
            out << "PASS " << name << "\n";
        }
    };

    // The hook flips the sign of the cross-domain block, which silently
    // breaks every alignment identity that mixes the two domains.
    const auto marginal_for_check = [&](int n_s, int n_t) {
        MmdMatrix M = mmd_marginal(n_s, n_t);
        if (options.inject_mm_sign_error) {
            M.values.topRightCorner(n_s, n_t) *= -1.0;
            M.values.bottomLeftCorner(n_t, n_s) *= -1.0;
        }
        return M;
    };

    report("oracle-equivalence", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1001);
        std::uniform_int_distribution<int> pick_n(2, 30), pick_m(2, 8), pick_C(2, 5);
        for (int trial = 0; trial < 50; ++trial) {
            const int n_s = pick_n(rng), n_t = pick_n(rng), m = pick_m(rng), C = pick_C(rng);
            const Eigen::MatrixXd X = cd::random_matrix(m, n_s + n_t, rng);
            std::uniform_int_distribution<int> pick_c(0, C - 1);
            HardLabels Ls, Lt;
            Ls.num_classes = Lt.num_classes = C;
            for (int j = 0; j < n_s; ++j)
                Ls.ids.push_back(pick_c(rng));
            for (int j = 0; j < n_t; ++j)
                Lt.ids.push_back(pick_c(rng));
            HardLabels all = Ls;
            all.ids.insert(all.ids.end(), Lt.ids.begin(), Lt.ids.end());

            const KernelMatrix K = feature_kernel(X, KernelSpec{});
            const KernelMatrix Kyy = label_kernel(3, Ls, Lt, C);
            const double lhs = jmmd_distance(K, Kyy, marginal_for_check(n_s, n_t));
            const double rhs = brute_force_jmmd(X, one_hot(all), n_s, n_t);
            if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs)))
                return "trial " + std::to_string(trial) + ": trace form " + cd::fmt(lhs) +
                       " vs explicit embeddings " + cd::fmt(rhs);
        }
        return std::nullopt;
    }());

    report("alignment-identity-all-ones", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1002);
        std::uniform_int_distribution<int> pick_n(2, 25);
        for (int trial = 0; trial < 50; ++trial) {
            const int n_s = pick_n(rng), n_t = pick_n(rng);
            const int n = n_s + n_t;
            const Eigen::MatrixXd K = cd::random_symmetric(n, rng);
            const HardLabels Ls = cd::random_full_labels(n_s, 2, rng);
            const HardLabels Lt = cd::random_full_labels(n_t, 2, rng);
            const KernelMatrix Kxx{K, KernelKind::Feature};
            const MmdMatrix Mm = marginal_for_check(n_s, n_t);
            const double lhs = jmmd_distance(Kxx, label_kernel(1, Ls, Lt, 2), Mm);
            const double rhs = cd::trace_product(K, mmd_marginal(n_s, n_t).values);
            if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs)))
                return "trial " + std::to_string(trial) + ": " + cd::fmt(lhs) + " vs " +
                       cd::fmt(rhs);
        }
        return std::nullopt;
    }());

    report("alignment-identity-classwise", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1003);
        std::uniform_int_distribution<int> pick_C(2, 5);
        for (int trial = 0; trial < 50; ++trial) {
            const int C = pick_C(rng);
            std::uniform_int_distribution<int> pick_n(C, 25);
            const int n_s = pick_n(rng), n_t = pick_n(rng);
            const int n = n_s + n_t;
            const Eigen::MatrixXd K = cd::random_symmetric(n, rng);
            const KernelMatrix Kxx{K, KernelKind::Feature};
            const HardLabels Ls = cd::random_full_labels(n_s, C, rng);
            const HardLabels Lt = cd::random_full_labels(n_t, C, rng);
            const double lhs =
                jmmd_distance(Kxx, label_kernel(2, Ls, Lt, C), marginal_for_check(n_s, n_t));
            double rhs = 0.0;
            for (int c = 0; c < C; ++c)
                rhs += cd::trace_product(K, mmd_classwise(Ls, Lt, c).values);
            if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs)))
                return "trial " + std::to_string(trial) + ": " + cd::fmt(lhs) + " vs " +
                       cd::fmt(rhs);
        }
        return std::nullopt;
    }());

    report("alignment-identity-weighted", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1004);
        std::uniform_int_distribution<int> pick_C(2, 5);
        for (int trial = 0; trial < 50; ++trial) {
            const int C = pick_C(rng);
            std::uniform_int_distribution<int> pick_n(C, 25);
            const int n_s = pick_n(rng), n_t = pick_n(rng);
            const int n = n_s + n_t;
            const Eigen::MatrixXd K = cd::random_symmetric(n, rng);
            const KernelMatrix Kxx{K, KernelKind::Feature};
            const HardLabels Ls = cd::random_full_labels(n_s, C, rng);
            const HardLabels Lt = cd::random_full_labels(n_t, C, rng);
            const double lhs =
                jmmd_distance(Kxx, label_kernel(3, Ls, Lt, C), marginal_for_check(n_s, n_t));
            double rhs = 0.0;
            for (int c = 0; c < C; ++c)
                rhs += cd::trace_product(K, mmd_weighted_classwise(Ls, Lt, c).values);
            if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs)))
                return "trial " + std::to_string(trial) + ": " + cd::fmt(lhs) + " vs " +
                       cd::fmt(rhs);
        }
        return std::nullopt;
    }());

    report("projected-form-identity", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1005);
        std::uniform_int_distribution<int> pick_n(2, 20), pick_d(1, 6);
        std::uniform_real_distribution<double> pick_delta(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const int n_s = pick_n(rng), n_t = pick_n(rng);
            const int n = n_s + n_t;
            const int d = pick_d(rng);
            const Eigen::MatrixXd K = cd::random_symmetric(n, rng);
            const Eigen::MatrixXd Ky = cd::random_symmetric(n, rng);
            const Eigen::MatrixXd B = cd::random_matrix(n, d, rng);
            const KernelMatrix Kxx{K, KernelKind::Feature};
            const KernelMatrix Kyy{Ky, KernelKind::Feature};
            const MmdMatrix M = mmd_novel(n_s, n_t, pick_delta(rng));
            const double lhs = projected_jmmd(Kxx, Kyy, M, B);
            const Eigen::MatrixXd inner = K * M.values.cwiseProduct(Ky) * K;
            const double rhs = (B.transpose() * inner * B).trace();
            if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs)))
                return "trial " + std::to_string(trial) + ": " + cd::fmt(lhs) + " vs " +
                       cd::fmt(rhs);
        }
        return std::nullopt;
    }());

    report("label-kernel-psd", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1006);
        std::uniform_int_distribution<int> pick_C(2, 6);
        for (int trial = 0; trial < 100; ++trial) {
            const int C = pick_C(rng);
            std::uniform_int_distribution<int> pick_n(C, 30);
            const HardLabels Ls = cd::random_full_labels(pick_n(rng), C, rng);
            const HardLabels Lt = cd::random_full_labels(pick_n(rng), C, rng);
            for (int variant = 1; variant <= 4; ++variant) {
                const PsdReport rep = psd_report(label_kernel(variant, Ls, Lt, C), 1e-8);
                if (!rep.pass)
                    return "variant " + std::to_string(variant) + " trial " +
                           std::to_string(trial) + ": min eigenvalue " +
                           cd::fmt(rep.min_eigenvalue);
            }
        }
        return std::nullopt;
    }());

    report("shift-kernel-collapse-on-matched-proportions", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1007);
        std::uniform_int_distribution<int> pick_C(2, 5), pick_mult(1, 4);
        for (int trial = 0; trial < 50; ++trial) {
            const int C = pick_C(rng);
            std::uniform_int_distribution<int> pick_cnt(1, 6);
            std::vector<int> base(static_cast<std::size_t>(C));
            for (int c = 0; c < C; ++c)
                base[static_cast<std::size_t>(c)] = pick_cnt(rng);
            const int mult = pick_mult(rng);
            HardLabels Ls, Lt;
            Ls.num_classes = Lt.num_classes = C;
            for (int c = 0; c < C; ++c) {
                for (int k = 0; k < base[static_cast<std::size_t>(c)]; ++k)
                    Ls.ids.push_back(c);
                for (int k = 0; k < mult * base[static_cast<std::size_t>(c)]; ++k)
                    Lt.ids.push_back(c);
            }
            const Eigen::MatrixXd K4 = label_kernel(4, Ls, Lt, C).values;
            const Eigen::MatrixXd K3 = label_kernel(3, Ls, Lt, C).values;
            if ((K4 - K3).cwiseAbs().maxCoeff() != 0.0)
                return "trial " + std::to_string(trial) +
                       ": matched proportions but kernels differ by " +
                       cd::fmt((K4 - K3).cwiseAbs().maxCoeff());
        }
        return std::nullopt;
    }());

    report("eigensolver-contract", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1008);
        std::uniform_int_distribution<int> pick_n(15, 50), pick_m(3, 10), pick_C(2, 5),
            pick_d(1, 10), pick_variant(1, 4);
        std::uniform_real_distribution<double> pick_delta(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const int n_s = pick_n(rng), n_t = pick_n(rng), m = pick_m(rng), C = pick_C(rng);
            const int n = n_s + n_t;
            const Eigen::MatrixXd X = cd::random_matrix(m, n, rng);
            const HardLabels Ls = cd::random_full_labels(n_s, C, rng);
            const HardLabels Lt = cd::random_full_labels(n_t, C, rng);
            const KernelMatrix K = feature_kernel(X, KernelSpec{});
            const KernelMatrix Kyy = label_kernel(pick_variant(rng), Ls, Lt, C);
            const Objective obj = build_objective(K, Kyy, pick_delta(rng), 0.1, n_s, n_t);
            const int d = std::min(pick_d(rng), n - 1);
            // Relative ridge large enough that the conditioning of
            // Cmat + ridge I does not eat the orthonormality budget.
            const double ridge = 1e-6 * obj.Cmat.trace() / n;
            const Projection proj = solve_projection(obj, d, ridge);

            Eigen::MatrixXd Creg = obj.Cmat;
            Creg.diagonal().array() += ridge;
            const double orth = (proj.B.transpose() * Creg * proj.B -
                                 Eigen::MatrixXd::Identity(d, d))
                                    .cwiseAbs()
                                    .maxCoeff();
            if (orth > 1e-8)
                return "trial " + std::to_string(trial) + ": orthonormality error " +
                       cd::fmt(orth);
            const Eigen::MatrixXd R =
                obj.A * proj.B - Creg * proj.B * proj.theta.asDiagonal();
            for (int j = 0; j < d; ++j) {
                const double denom =
                    obj.A.norm() + std::abs(proj.theta(j)) * obj.Cmat.norm();
                if (R.col(j).norm() > 1e-6 * denom)
                    return "trial " + std::to_string(trial) + " column " + std::to_string(j) +
                           ": residual " + cd::fmt(R.col(j).norm() / denom);
            }
            for (int j = 1; j < d; ++j)
                if (proj.theta(j) < proj.theta(j - 1))
                    return "trial " + std::to_string(trial) + ": eigenvalues not ascending";
        }
        return std::nullopt;
    }());

    report("coefficient-matrix-structure", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1009);
        std::uniform_int_distribution<int> pick_n(1, 20);
        std::uniform_real_distribution<double> pick_delta(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const int n_s = pick_n(rng), n_t = pick_n(rng);
            const MmdMatrix Mm = mmd_marginal(n_s, n_t);
            const double row_sum = Mm.values.rowwise().sum().cwiseAbs().maxCoeff();
            if (row_sum > 1e-12)
                return "marginal row sums reach " + cd::fmt(row_sum);
            const MmdMatrix Mh = mmd_hsi(n_s, n_t);
            if (Mh.values.topRightCorner(n_s, n_t).cwiseAbs().maxCoeff() != 0.0)
                return "within-domain matrix has nonzero cross block";
            const double delta = pick_delta(rng);
            const MmdMatrix Mn = mmd_novel(n_s, n_t, delta);
            const double recon =
                (Mn.values - (Mm.values - delta * Mh.values)).cwiseAbs().maxCoeff();
            if (recon != 0.0)
                return "novel matrix is not marginal - delta * within-domain";
        }
        return std::nullopt;
    }());

    report("bandwidth-median", [&]() -> std::optional<std::string> {
        Eigen::MatrixXd two(1, 2);
        two << 0.0, 2.0;
        if (median_bandwidth(two) != 2.0)
            return "two points at distance 2 gave " + cd::fmt(median_bandwidth(two));
        Eigen::MatrixXd three(1, 3);
        three << 0.0, 1.0, 2.0;  // pairwise distances 1, 1, 2
        if (median_bandwidth(three) != 1.0)
            return "collinear triple gave " + cd::fmt(median_bandwidth(three));
        Eigen::MatrixXd same(2, 3);
        same.setConstant(1.5);
        try {
            median_bandwidth(same);
            return std::string("identical points did not raise");
        } catch (const std::runtime_error&) {
        }
        return std::nullopt;
    }());

    report("classifier-tie-rule", [&]() -> std::optional<std::string> {
        Eigen::MatrixXd train(1, 2);
        train << -1.0, 1.0;  // both at distance 1 from the origin
        HardLabels L;
        L.num_classes = 2;
        L.ids = {1, 0};
        Eigen::MatrixXd test(1, 1);
        test << 0.0;
        const HardLabels pred = knn_predict(train, L, test, 2);
        if (pred.ids[0] != 1)
            return "equidistant 2-NN vote went to class " + std::to_string(pred.ids[0]) +
                   ", expected the lower-index neighbor's class 1";
        return std::nullopt;
    }());

    report("file-round-trip", [&]() -> std::optional<std::string> {
        std::mt19937_64 rng(1010);
        const Eigen::MatrixXd X = cd::random_matrix(5, 17, rng);
        const std::string tag = std::to_string(static_cast<long>(::getpid()));
        const std::string fpath = "/tmp/ujmmd_check_features_" + tag + ".csv";
        const std::string lpath = "/tmp/ujmmd_check_labels_" + tag + ".txt";
        save_features(X, fpath);
        const FeatureMatrix X2 = load_features(fpath);
        if (X2.rows() != X.rows() || X2.cols() != X.cols())
            return std::string("feature shape changed across save/load");
        if ((X - X2).cwiseAbs().maxCoeff() != 0.0)
            return "features not bit-identical after save/load, max diff " +
                   cd::fmt((X - X2).cwiseAbs().maxCoeff());
        const HardLabels L = cd::random_full_labels(17, 4, rng);
        save_labels(L, lpath);
        const HardLabels L2 = load_labels(lpath, 4);
        if (L2.ids != L.ids)
            return std::string("labels changed across save/load");
        return std::nullopt;
    }());

    out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
        << "\n";
    return failures;
}

}  // namespace ujmmd
