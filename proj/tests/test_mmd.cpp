#include <catch2/catch_amalgamated.hpp>

#include "ujmmd/kernels.hpp"
#include "ujmmd/mmd.hpp"

#include <random>

using namespace ujmmd;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A(i, j) = gauss(rng);
    return 0.5 * (A + A.transpose().eval());
}

KernelMatrix wrap(Eigen::MatrixXd M) {
    return KernelMatrix{std::move(M), KernelKind::Feature};
}

HardLabels random_labels(int n, int C, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, C - 1);
    HardLabels out;
    out.num_classes = C;
    for (int j = 0; j < n; ++j)
        out.ids.push_back(pick(rng));
    return out;
}

}  // namespace

TEST_CASE("marginal coefficient matrix matches hand values") {
    const MmdMatrix one_one = mmd_marginal(1, 1);
    Eigen::MatrixXd expected(2, 2);
    expected << 1, -1, -1, 1;
    REQUIRE(one_one.values.isApprox(expected, 1e-15));

    const MmdMatrix two_one = mmd_marginal(2, 1);
    Eigen::MatrixXd expected31(3, 3);
    expected31 << 0.25, 0.25, -0.5, 0.25, 0.25, -0.5, -0.5, -0.5, 1.0;
    REQUIRE(two_one.values.isApprox(expected31, 1e-15));

    // Every row sums to zero, so constant embeddings score zero discrepancy.
    const MmdMatrix big = mmd_marginal(7, 4);
    REQUIRE(big.values.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(big.kind == MmdKind::Marginal);
}

TEST_CASE("classwise coefficients touch only the selected class") {
    const HardLabels src({0, 1}, 2);
    const HardLabels tgt({0}, 2);

    const MmdMatrix m0 = mmd_classwise(src, tgt, 0);
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 0, -1, 0, 0, 0, -1, 0, 1;
    REQUIRE(m0.values.isApprox(expected, 1e-15));
    REQUIRE(m0.class_id == 0);

    // Class 1 never shows up in the target, so its matrix vanishes.
    const MmdMatrix m1 = mmd_classwise(src, tgt, 1);
    REQUIRE(m1.values.cwiseAbs().maxCoeff() == 0.0);

    REQUIRE_THROWS_AS(mmd_classwise(src, tgt, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(mmd_classwise(src, tgt, -1), std::invalid_argument);
}

TEST_CASE("weighted classwise restricts the marginal matrix to one class") {
    const HardLabels src({0, 1}, 2);
    const HardLabels tgt({0}, 2);

    const MmdMatrix w0 = mmd_weighted_classwise(src, tgt, 0);
    Eigen::MatrixXd expected(3, 3);
    expected << 0.25, 0, -0.5, 0, 0, 0, -0.5, 0, 1.0;
    REQUIRE(w0.values.isApprox(expected, 1e-15));

    // Unlike the per-class matrix above, the restriction keeps the source
    // block even when the class is missing from the target; that is what
    // makes the masked-form identity exact.
    const MmdMatrix w1 = mmd_weighted_classwise(src, tgt, 1);
    Eigen::MatrixXd expected1 = Eigen::MatrixXd::Zero(3, 3);
    expected1(1, 1) = 0.25;
    REQUIRE(w1.values.isApprox(expected1, 1e-15));
}

TEST_CASE("hsi matrix keeps only the within-domain blocks") {
    REQUIRE(mmd_hsi(1, 1).values.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));

    const MmdMatrix h = mmd_hsi(2, 2);
    Eigen::MatrixXd expected(4, 4);
    expected << 0.25, 0.25, 0, 0, 0.25, 0.25, 0, 0, 0, 0, 0.25, 0.25, 0, 0, 0.25, 0.25;
    REQUIRE(h.values.isApprox(expected, 1e-15));
}

TEST_CASE("novel matrix subtracts scaled within-domain blocks") {
    const MmdMatrix n = mmd_novel(1, 1, 0.1);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.9, -1, -1, 0.9;
    REQUIRE(n.values.isApprox(expected, 1e-15));
    REQUIRE(n.delta == 0.1);

    REQUIRE(mmd_novel(3, 2, 0.0).values.isApprox(mmd_marginal(3, 2).values, 1e-15));
    REQUIRE_THROWS_AS(mmd_novel(1, 1, -0.5), std::invalid_argument);
}

TEST_CASE("lazy distance equals the explicit covariance difference") {
    // Two orthogonal unit samples of the same class: both cross-covariance
    // estimates are unit columns, so the squared distance is exactly 2.
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, 0, 1;
    const HardLabels src({0}, 1);
    const HardLabels tgt({0}, 1);
    const KernelMatrix K = feature_kernel(X, KernelSpec{});
    const KernelMatrix Kyy = label_kernel(3, src, tgt, 1);
    const double lazy = jmmd_distance(K, Kyy, mmd_marginal(1, 1));
    REQUIRE(lazy == Catch::Approx(2.0).margin(1e-14));

    const HardLabels all({0, 0}, 1);
    const double brute = brute_force_jmmd(X, one_hot(all), 1, 1);
    REQUIRE(lazy == Catch::Approx(brute).margin(1e-14));

    // Same agreement on a random instance with several classes.
    std::mt19937_64 rng(42);
    const int n_s = 9, n_t = 7, m = 4, C = 3;
    Eigen::MatrixXd Xr(m, n_s + n_t);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n_s + n_t; ++j)
            Xr(i, j) = gauss(rng);
    HardLabels ls = random_labels(n_s, C, rng);
    HardLabels lt = random_labels(n_t, C, rng);
    HardLabels joint = ls;
    joint.ids.insert(joint.ids.end(), lt.ids.begin(), lt.ids.end());
    const double lhs = jmmd_distance(feature_kernel(Xr, KernelSpec{}),
                                     label_kernel(3, ls, lt, C), mmd_marginal(n_s, n_t));
    const double rhs = brute_force_jmmd(Xr, one_hot(joint), n_s, n_t);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("classwise sums reproduce the masked marginal distance") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n_s = 6, n_t = 5, C = 3;
        const KernelMatrix K = wrap(random_symmetric(n_s + n_t, rng));
        const HardLabels ls = random_labels(n_s, C, rng);
        const HardLabels lt = random_labels(n_t, C, rng);
        const KernelMatrix ones = label_kernel(1, ls, lt, C);
        const MmdMatrix marginal = mmd_marginal(n_s, n_t);

        double by_class = 0.0, by_weighted = 0.0;
        for (int c = 0; c < C; ++c) {
            by_class += jmmd_distance(K, ones, mmd_classwise(ls, lt, c));
            by_weighted += jmmd_distance(K, ones, mmd_weighted_classwise(ls, lt, c));
        }
        const double via_k2 = jmmd_distance(K, label_kernel(2, ls, lt, C), marginal);
        const double via_k3 = jmmd_distance(K, label_kernel(3, ls, lt, C), marginal);
        REQUIRE(by_class == Catch::Approx(via_k2).margin(1e-10));
        REQUIRE(by_weighted == Catch::Approx(via_k3).margin(1e-10));
    }
}

TEST_CASE("projected distance agrees with the quadratic trace form") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    const int n = 10, d = 3;
    const KernelMatrix K = wrap(random_symmetric(n, rng));
    const KernelMatrix Kyy = wrap(random_symmetric(n, rng));
    const Eigen::MatrixXd M = random_symmetric(n, rng);
    Eigen::MatrixXd B(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            B(i, j) = gauss(rng);

    const MmdMatrix Mw{M, MmdKind::Marginal};
    const double lhs = projected_jmmd(K, Kyy, Mw, B);
    const double rhs =
        (B.transpose() * K.values *
         (Kyy.values.array() * M.array()).matrix() * K.values * B)
            .trace();
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("hsi metric is the distance under within-domain coefficients") {
    std::mt19937_64 rng(13);
    const int n_s = 4, n_t = 6;
    const KernelMatrix K = wrap(random_symmetric(n_s + n_t, rng));
    const KernelMatrix Kyy = wrap(random_symmetric(n_s + n_t, rng));
    REQUIRE(hsi_metric(K, Kyy, n_s, n_t) ==
            Catch::Approx(jmmd_distance(K, Kyy, mmd_hsi(n_s, n_t))).epsilon(1e-15));
    REQUIRE_THROWS_AS(hsi_metric(K, Kyy, n_s, n_t + 1), std::invalid_argument);
}

TEST_CASE("distance helpers reject mismatched shapes") {
    std::mt19937_64 rng(17);
    const KernelMatrix K = wrap(random_symmetric(4, rng));
    const KernelMatrix K5 = wrap(random_symmetric(5, rng));
    REQUIRE_THROWS_AS(jmmd_distance(K, K5, mmd_marginal(2, 2)), std::invalid_argument);
    REQUIRE_THROWS_AS(jmmd_distance(K, K, mmd_marginal(2, 3)), std::invalid_argument);
    REQUIRE_THROWS_AS(projected_jmmd(K, K, mmd_marginal(2, 2), Eigen::MatrixXd::Ones(5, 2)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(mmd_marginal(0, 3), std::invalid_argument);
}
