#include "homocon/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "homocon/error.hpp"
#include "homocon/linalg.hpp"
#include "homocon/protocol.hpp"

namespace homocon {

namespace {

constexpr double kStrictness = 1e-12;

void require_square(const Mat& m, int n, const char* what) {
    if (m.rows() != n || m.cols() != n) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has wrong shape");
}

void check_system(const DilationGenerator& gen, const Mat& a, const Vec& b) {
    require_square(a, gen.dim(), "A");
    if (b.size() != gen.dim()) throw Error(ErrorCode::DimensionMismatch, "B has wrong length");
}

double worst_relative_margin(const CertificateP& c) {
    const double scale = std::max(linalg::spectral_norm(c.p), std::numeric_limits<double>::min());
    return std::min({c.margin_pd, c.margin_monotone, c.margin_decay}) / scale;
}

double worst_relative_margin(const CertificateXY& c) {
    const double scale = std::max(linalg::spectral_norm(c.x), std::numeric_limits<double>::min());
    return std::min({c.margin_pd, c.margin_monotone, c.margin_decay}) / scale;
}

// Basis of symmetric n x n matrices (E_ii, E_ij + E_ji), flattened column-major.
std::vector<Eigen::MatrixXd> symmetric_basis(int n) {
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
            e(i, j) = 1.0;
            e(j, i) = 1.0;
            basis.push_back(std::move(e));
        }
    }
    return basis;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n) { return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n); }

// Von Neumann alternating projections in the product space (theta, S_1..S_m):
// the affine set {S_j = L_j theta} and the cone {S_j >= I}. Each map L_j
// sends the decision vector theta to a flattened symmetric n x n matrix. The
// constraint set is a cone in theta, so the unit shift loses no generality.
std::optional<Eigen::VectorXd> alternating_projections(const std::vector<Eigen::MatrixXd>& maps, int n,
                                                       Eigen::VectorXd theta,
                                                       const std::function<bool(const Eigen::VectorXd&)>& accept,
                                                       int max_iter) {
    const Eigen::Index d = theta.size();
    const Eigen::Index block = static_cast<Eigen::Index>(n) * n;
    Eigen::MatrixXd stacked(d + block * static_cast<Eigen::Index>(maps.size()), d);
    stacked.topRows(d).setIdentity();
    for (std::size_t j = 0; j < maps.size(); ++j) stacked.middleRows(d + j * block, block) = maps[j];
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);

    Eigen::VectorXd target(stacked.rows());
    for (int iter = 0; iter < max_iter; ++iter) {
        target.head(d) = theta;
        for (std::size_t j = 0; j < maps.size(); ++j) {
            const Eigen::MatrixXd s = unflatten(maps[j] * theta, n);
            target.segment(d + j * block, block) = flatten(linalg::clip_spectrum_below(s, 1.0));
        }
        theta = qr.solve(target);
        if (accept(theta)) return theta;
    }
    return std::nullopt;
}

std::vector<Eigen::VectorXd> diagonal_weight_grid(int n) {
    // q = diag(10^c_1, ..., 10^c_{n-1}, 1); a full grid for small n, a
    // geometric family q_k = beta^{n-k} otherwise.
    std::vector<double> exponents;
    for (int c = -8; c <= 8; ++c) exponents.push_back(0.5 * c);
    std::vector<Eigen::VectorXd> grid;
    if (n <= 4) {
        const int free = n - 1;
        std::vector<int> idx(free, 0);
        while (true) {
            Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
            for (int k = 0; k < free; ++k) q(k) = std::pow(10.0, exponents[idx[k]]);
            grid.push_back(q);
            int k = 0;
            while (k < free && ++idx[k] == static_cast<int>(exponents.size())) idx[k++] = 0;
            if (k == free) break;
        }
    } else {
        for (double c : exponents) {
            Eigen::VectorXd q(n);
            for (int k = 0; k < n; ++k) q(k) = std::pow(10.0, c * (n - 1 - k) / 2.0);
            grid.push_back(q);
        }
    }
    return grid;
}

Mat normalized(const Mat& m) { return m / linalg::spectral_norm(m); }

}  // namespace

CertificateP verify_lmi_P(const Mat& p, const DilationGenerator& gen, const Mat& a, const Vec& b, const RowVec& k_lin) {
    const int n = gen.dim();
    check_system(gen, a, b);
    require_square(p, n, "P");
    if (k_lin.size() != n) throw Error(ErrorCode::DimensionMismatch, "gain has wrong length");
    if (!linalg::is_symmetric(p, kStrictness) && p.norm() > 0.0) {
        throw Error(ErrorCode::NotSymmetric, "P is not symmetric");
    }
    const Mat g = gen.matrix();
    const Mat a_cl = a - b * k_lin;
    CertificateP c;
    c.p = p;
    c.margin_pd = linalg::lambda_min(p);
    c.margin_monotone = linalg::lambda_min(p * g + g * p);
    c.margin_decay = -linalg::lambda_max(p * a_cl + a_cl.transpose() * p);
    const double gap = kStrictness * linalg::spectral_norm(p);
    c.feasible = c.margin_pd > gap && c.margin_monotone > gap && c.margin_decay > gap;
    return c;
}

CertificateXY verify_lmi_XY(const Mat& x, const RowVec& y, const DilationGenerator& gen, const Mat& a, const Vec& b) {
    const int n = gen.dim();
    check_system(gen, a, b);
    require_square(x, n, "X");
    if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "Y has wrong length");
    if (!linalg::is_symmetric(x, kStrictness) && x.norm() > 0.0) {
        throw Error(ErrorCode::NotSymmetric, "X is not symmetric");
    }
    const double scale = linalg::spectral_norm(x);
    if (!(linalg::min_singular_value(x) > kStrictness * scale)) {
        throw Error(ErrorCode::SingularX, "X is not invertible");
    }
    const Mat g = gen.matrix();
    CertificateXY c;
    c.x = x;
    c.y = y;
    c.p = x.inverse();
    c.p = 0.5 * (c.p + c.p.transpose());
    c.k = y * c.p;
    c.margin_pd = linalg::lambda_min(x);
    c.margin_monotone = linalg::lambda_min(g * x + x * g);
    const Mat by = b * y;
    c.margin_decay = -linalg::lambda_max(a * x + x * a.transpose() - by - by.transpose());
    const double gap = kStrictness * scale;
    c.feasible = c.margin_pd > gap && c.margin_monotone > gap && c.margin_decay > gap;
    return c;
}

CertificateP solve_lmi_P(const DilationGenerator& gen, const Mat& a, const Vec& b, const RowVec& k_lin) {
    const int n = gen.dim();
    check_system(gen, a, b);
    const Mat a_cl = a - b * k_lin;

    std::optional<CertificateP> best;
    for (const auto& q : diagonal_weight_grid(n)) {
        const Eigen::MatrixXd p = linalg::solve_lyapunov(a_cl, q.asDiagonal());
        if (!p.allFinite()) continue;
        auto cert = verify_lmi_P(normalized(p), gen, a, b, k_lin);
        if (cert.feasible && (!best || worst_relative_margin(cert) > worst_relative_margin(*best))) best = cert;
    }
    if (best) return *best;

    // Affine structure of the three conditions in the entries of P.
    const auto basis = symmetric_basis(n);
    const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
    const Eigen::MatrixXd g = gen.matrix();
    const Eigen::MatrixXd acl = a_cl;
    std::vector<Eigen::MatrixXd> maps(3, Eigen::MatrixXd(n * n, d));
    for (Eigen::Index m = 0; m < d; ++m) {
        const auto& e = basis[m];
        maps[0].col(m) = flatten(e);
        maps[1].col(m) = flatten(e * g + g * e);
        maps[2].col(m) = flatten(-(e * acl + acl.transpose() * e));
    }
    auto to_matrix = [&](const Eigen::VectorXd& theta) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index m = 0; m < d; ++m) p += theta(m) * basis[m];
        return p;
    };
    // Seed: Lyapunov solution for q = 1, expressed in the symmetric basis.
    const Eigen::MatrixXd seed = linalg::solve_lyapunov(acl, Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd theta(d);
    {
        Eigen::Index m = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) theta(m++) = seed(i, j);
    }
    auto accept = [&](const Eigen::VectorXd& t) {
        return verify_lmi_P(to_matrix(t), gen, a, b, k_lin).feasible;
    };
    if (auto found = alternating_projections(maps, n, theta, accept, 5000)) {
        return verify_lmi_P(normalized(to_matrix(*found)), gen, a, b, k_lin);
    }
    throw Error(ErrorCode::Infeasible, "no certificate P found within the iteration budget");
}

CertificateXY solve_lmi_XY(const DilationGenerator& gen, const Mat& a, const Vec& b) {
    const int n = gen.dim();
    check_system(gen, a, b);

    std::optional<CertificateXY> best;
    const double lambdas[] = {1.0, 0.5, 2.0, 0.25, 4.0};
    for (double lambda : lambdas) {
        const RowVec k_lin = linear_gain(n, lambda);
        const Mat a_cl = a - b * k_lin;
        for (const auto& q : diagonal_weight_grid(n)) {
            // A_cl X + X A_cl^T = -Q
            const Eigen::MatrixXd x = linalg::solve_lyapunov(a_cl.transpose(), q.asDiagonal());
            if (!x.allFinite()) continue;
            const double s = linalg::spectral_norm(x);
            const Mat xn = x / s;
            auto cert = verify_lmi_XY(xn, k_lin * xn, gen, a, b);
            if (cert.feasible && (!best || worst_relative_margin(cert) > worst_relative_margin(*best))) best = cert;
        }
        if (best) return *best;
    }

    // Decision vector: symmetric entries of X followed by Y.
    const auto basis = symmetric_basis(n);
    const Eigen::Index ds = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index d = ds + n;
    const Eigen::MatrixXd g = gen.matrix();
    const Eigen::MatrixXd am = a;
    const Eigen::VectorXd bv = b;
    std::vector<Eigen::MatrixXd> maps(3, Eigen::MatrixXd::Zero(n * n, d));
    for (Eigen::Index m = 0; m < ds; ++m) {
        const auto& e = basis[m];
        maps[0].col(m) = flatten(e);
        maps[1].col(m) = flatten(g * e + e * g);
        maps[2].col(m) = flatten(-(am * e + e * am.transpose()));
    }
    for (int k = 0; k < n; ++k) {
        Eigen::RowVectorXd unit = Eigen::RowVectorXd::Zero(n);
        unit(k) = 1.0;
        const Eigen::MatrixXd by = bv * unit;
        maps[2].col(ds + k) = flatten(by + by.transpose());
    }
    auto split = [&](const Eigen::VectorXd& t) {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index m = 0; m < ds; ++m) x += t(m) * basis[m];
        return std::pair<Mat, RowVec>{x, t.tail(n).transpose()};
    };
    auto accept = [&](const Eigen::VectorXd& t) {
        const auto [x, y] = split(t);
        if (!(linalg::min_singular_value(x) > kStrictness * linalg::spectral_norm(x))) return false;
        return verify_lmi_XY(x, y, gen, a, b).feasible;
    };
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    {
        Eigen::Index m = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j, ++m) theta(m) = i == j ? 0.5 : 0.0;
    }
    if (auto found = alternating_projections(maps, n, theta, accept, 5000)) {
        auto [x, y] = split(*found);
        const double s = linalg::spectral_norm(x);
        return verify_lmi_XY(x / s, y / s, gen, a, b);
    }
    throw Error(ErrorCode::Infeasible, "no certificate (X, Y) found within the iteration budget");
}

double compute_rho(const Mat& p, const Mat& a_cl) {
    if (p.rows() != a_cl.rows() || p.cols() != a_cl.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "P and A_cl shapes differ");
    }
    const Eigen::MatrixXd w = linalg::inv_sqrt_pd(p);
    const Eigen::MatrixXd lyap = p * a_cl + a_cl.transpose() * p;
    const double rho_star = -linalg::lambda_max(w * lyap * w);
    if (!(rho_star > 0.0)) throw Error(ErrorCode::NonPositiveRho, "P A_cl + A_cl^T P is not negative definite");
    return 0.99 * rho_star;
}

double compute_theta(const Mat& p, const DilationGenerator& gen, double rho) {
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    const Eigen::MatrixXd w = linalg::inv_sqrt_pd(p);
    const Mat g = gen.matrix();
    const Eigen::MatrixXd mono = p * g + g * p;
    if (!(linalg::lambda_min(mono) > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "P G_d + G_d P must be positive definite");
    }
    return rho / (2.0 * linalg::lambda_max(w * mono * w));
}

double disturbance_bound(const Mat& p, const Mat& h, double lambda, double rho, double theta) {
    const Eigen::Index n = p.rows();
    const Eigen::MatrixXd w = linalg::inv_sqrt_pd(p);
    const double root_norm = linalg::spectral_norm(linalg::sqrt_psd(p));
    const Eigen::MatrixXd hth = h.transpose() * h;
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
    e1(0) = 1.0;
    const Eigen::MatrixXd first = e1 * e1.transpose();
    const double lyapunov_branch = rho / (2.0 * root_norm);
    const double cone_branch =
        lambda * theta * linalg::lambda_min(w * hth * w) / std::sqrt(linalg::lambda_max(w * first * w));
    return std::min(lyapunov_branch, cone_branch);
}

RobustnessConstants robustness_constants(const Mat& p, const DilationGenerator& gen, const Mat& a_cl, const Mat& h,
                                         double lambda) {
    RobustnessConstants out;
    out.rho = compute_rho(p, a_cl);
    out.theta = compute_theta(p, gen, out.rho);
    out.q_bound = disturbance_bound(p, h, lambda, out.rho, out.theta);
    return out;
}

}  // namespace homocon
