#pragma once

#include "ujmmd/kernels.hpp"
#include "ujmmd/mmd.hpp"
#include "ujmmd/types.hpp"

#include <cmath>
#include <string>

namespace ujmmd {

/// Quadratic objective for the projection search: minimize tr(B^T A B)
/// subject to B^T Cmat B = I_d. A couples alignment and regularization,
/// Cmat is the centered second-moment (variance) matrix.
struct Objective {
    Eigen::MatrixXd A;     // K ((M_m - delta M_h) hadamard K_yy) K + lambda I
    Eigen::MatrixXd Cmat;  // K H K
    double lambda = 0.0;
    double delta = 0.0;

    int size() const { return static_cast<int>(A.rows()); }
};

/// Assembles the objective from the feature kernel, a label kernel, and the
/// alignment/discriminability trade-off. Both matrices are symmetrized
/// explicitly so the eigensolver sees exact symmetry.
inline Objective build_objective(const KernelMatrix& K_xx, const KernelMatrix& K_yy,
                                 double delta, double lambda, int n_s, int n_t) {
    if (lambda <= 0.0)
        throw std::invalid_argument("build_objective: lambda must be positive");
    const Eigen::Index n = K_xx.values.rows();
    if (K_yy.values.rows() != n)
        throw std::invalid_argument("build_objective: kernel sizes disagree");
    if (n_s + n_t != n)
        throw std::invalid_argument("build_objective: n_s + n_t must equal the kernel size");

    const MmdMatrix W = mmd_novel(n_s, n_t, delta);
    Eigen::MatrixXd A =
        K_xx.values * W.values.cwiseProduct(K_yy.values) * K_xx.values;
    A += lambda * Eigen::MatrixXd::Identity(n, n);
    A = 0.5 * (A + A.transpose().eval());

    // H K = K with every column centered; Cmat = K (H K).
    Eigen::MatrixXd centered = K_xx.values;
    centered.array().rowwise() -= K_xx.values.colwise().mean().array();
    Eigen::MatrixXd Cmat = K_xx.values * centered;
    Cmat = 0.5 * (Cmat + Cmat.transpose().eval());

    return Objective{std::move(A), std::move(Cmat), lambda, delta};
}

/// Variance-only control objective: A carries no alignment term, so the
/// constrained minimizer is the kernel principal-component projection.
inline Objective build_pca_objective(const KernelMatrix& K_xx, double lambda) {
    if (lambda <= 0.0)
        throw std::invalid_argument("build_pca_objective: lambda must be positive");
    const Eigen::Index n = K_xx.values.rows();
    Eigen::MatrixXd A = lambda * Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd centered = K_xx.values;
    centered.array().rowwise() -= K_xx.values.colwise().mean().array();
    Eigen::MatrixXd Cmat = K_xx.values * centered;
    Cmat = 0.5 * (Cmat + Cmat.transpose().eval());

    return Objective{std::move(A), std::move(Cmat), lambda, 0.0};
}

/// Cmat is singular (centering annihilates constants); this relative ridge
/// makes the pencil definite by default.
inline double default_ridge(const Eigen::MatrixXd& Cmat) {
    return 1e-9 * Cmat.trace() / static_cast<double>(Cmat.rows());
}

/// Solution of the generalized eigenproblem A B = (Cmat + ridge I) B Theta.
struct Projection {
    Eigen::MatrixXd B;      // n_st x d
    Eigen::VectorXd theta;  // d eigenvalues, ascending
    double ridge = 0.0;     // ridge actually added to Cmat

    int dim() const { return static_cast<int>(B.cols()); }
};

/// Solves for the d smallest eigenpairs of the symmetric-definite pencil
/// (A, Cmat + ridge I) by Cholesky reduction to a standard symmetric
/// problem. Columns are Cmat-orthonormal; each column's sign is fixed by
/// forcing its largest-magnitude entry (first occurrence) positive.
inline Projection solve_projection(const Objective& obj, int d, double ridge) {
    const Eigen::Index n = obj.A.rows();
    if (d < 1 || d >= n)
        throw std::invalid_argument("solve_projection: need 1 <= d < n_st (got d=" +
                                    std::to_string(d) + ", n_st=" + std::to_string(n) + ")");
    if (ridge < 0.0)
        throw std::invalid_argument("solve_projection: ridge must be nonnegative");

    Eigen::MatrixXd Creg = obj.Cmat;
    Creg.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(Creg);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(
            "solve_projection: Cmat + ridge I is not positive definite; increase the ridge");
    const Eigen::MatrixXd L = llt.matrixL();

    // A_tilde = L^{-1} A L^{-T}; same spectrum as the pencil.
    Eigen::MatrixXd A_tilde = L.triangularView<Eigen::Lower>().solve(obj.A);
    A_tilde = L.triangularView<Eigen::Lower>().solve(A_tilde.transpose().eval());
    A_tilde = 0.5 * (A_tilde + A_tilde.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_tilde);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("solve_projection: eigendecomposition failed");

    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(d);
    Eigen::MatrixXd B = L.transpose().triangularView<Eigen::Upper>().solve(Y);

    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        Eigen::Index imax = 0;
        B.col(j).cwiseAbs().maxCoeff(&imax);
        if (B(imax, j) < 0.0)
            B.col(j) = -B.col(j);
    }

    Projection proj;
    proj.B = std::move(B);
    proj.theta = es.eigenvalues().head(d);
    proj.ridge = ridge;
    return proj;
}

inline Projection solve_projection(const Objective& obj, int d) {
    return solve_projection(obj, d, default_ridge(obj.Cmat));
}

/// Embedded representation Z = B^T K_xx; one column per sample, source
/// columns first.
inline FeatureMatrix embed(const Projection& proj, const KernelMatrix& K_xx) {
    if (proj.B.rows() != K_xx.values.rows())
        throw std::invalid_argument("embed: projection and kernel sizes disagree");
    return proj.B.transpose() * K_xx.values;
}

}  // namespace ujmmd
