#include "homocon/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "homocon/error.hpp"

namespace homocon::linalg {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& s) { return 0.5 * (s + s.transpose()); }

}  // namespace

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(s), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double lambda_min(const Eigen::MatrixXd& s) { return sym_eigenvalues(s).minCoeff(); }

double lambda_max(const Eigen::MatrixXd& s) { return sym_eigenvalues(s).maxCoeff(); }

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(s));
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd inv_sqrt_pd(const Eigen::MatrixXd& p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(p));
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw Error(ErrorCode::InvalidArgument, "inverse square root of a matrix that is not positive definite");
    }
    const Eigen::VectorXd inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double min_singular_value(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.transpose()).norm() <= rel_tol * m.norm();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X)
    Eigen::MatrixXd kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            kron.block(i * n, j * n, n, n) = eye(i, j) * a.transpose() + a(j, i) * eye;
        }
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
    const Eigen::VectorXd x = kron.fullPivLu().solve(rhs);
    Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return symmetrized(out);
}

Eigen::MatrixXd clip_spectrum_below(const Eigen::MatrixXd& s, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(s));
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace homocon::linalg
