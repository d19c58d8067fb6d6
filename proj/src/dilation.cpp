#include "homocon/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "homocon/error.hpp"
#include "homocon/linalg.hpp"

namespace homocon {

DilationGenerator::DilationGenerator(int n, double mu) : n_(n), mu_(mu) {
    if (n < 1 || n > kMaxDim) {
        throw Error(ErrorCode::InvalidArgument, "state dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    if (!std::isfinite(mu) || (n > 1 && !(mu < 1.0 / (n - 1)))) {
        throw Error(ErrorCode::InvalidArgument, "homogeneity degree must satisfy mu < 1/(n-1)");
    }
    weights_.resize(n);
    for (int k = 1; k <= n; ++k) weights_(k - 1) = 1.0 - mu * (n - k);
}

Mat DilationGenerator::matrix() const { return weights_.asDiagonal(); }

Mat dilation_matrix(const DilationGenerator& gen, double s) {
    return (s * gen.weights().array()).exp().matrix().asDiagonal();
}

Vec dilate(const DilationGenerator& gen, double s, const Vec& x) {
    Vec out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        out(k) = x(k) == 0.0 ? 0.0 : std::copysign(std::exp(s * gen.weights()(k) + std::log(std::abs(x(k)))), x(k));
    }
    return out;
}

GeneratorResiduals check_generator_relations(const DilationGenerator& gen, const Mat& a, const Vec& b) {
    const int n = gen.dim();
    if (a.rows() != n || a.cols() != n || b.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "(A, B) does not match the generator dimension");
    }
    const Mat g = gen.matrix();
    const Mat eye = Mat::Identity(n, n);
    return {(a * g - (gen.mu() * eye + g) * a).norm(), (g * b - b).norm()};
}

HomogeneousNormContext::HomogeneousNormContext(DilationGenerator gen, Mat p) : gen_(std::move(gen)), p_(std::move(p)) {
    const int n = gen_.dim();
    if (p_.rows() != n || p_.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "shape matrix does not match the generator dimension");
    }
    if (!linalg::is_symmetric(p_)) throw Error(ErrorCode::NotSymmetric, "shape matrix P must be symmetric");
    p_ = 0.5 * (p_ + p_.transpose());
    if (!(linalg::lambda_min(p_) > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "shape matrix P must be positive definite");
    }
    const Mat g = gen_.matrix();
    if (!(linalg::lambda_min(p_ * g + g * p_) > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "P G_d + G_d P must be positive definite (monotone dilation)");
    }
}

double HomogeneousNormContext::weighted_norm(const Vec& x) const { return std::sqrt(x.dot(p_ * x)); }

namespace {

// psi(s) = ln ||d(-s) x||_P^2 and its derivative, computed with a common
// log-scale factor pulled out of d(-s) x.
struct LogNormEval {
    double value;
    double slope;
};

LogNormEval log_norm_sq(const HomogeneousNormContext& ctx, const Vec& x, double s) {
    const Vec& r = ctx.generator().weights();
    const Eigen::Index n = x.size();
    Vec log_abs(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
        log_abs(k) = x(k) == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(x(k))) - s * r(k);
        peak = std::max(peak, log_abs(k));
    }
    Vec y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        y(k) = x(k) == 0.0 ? 0.0 : std::copysign(std::exp(log_abs(k) - peak), x(k));
    }
    const Vec py = ctx.shape() * y;
    const double quad = y.dot(py);
    const double graded = py.dot(r.cwiseProduct(y));  // y^T P G_d y
    return {2.0 * peak + std::log(quad), -2.0 * graded / quad};
}

}  // namespace

double canonical_norm(const HomogeneousNormContext& ctx, const Vec& x) {
    if (x.size() != ctx.dim()) throw Error(ErrorCode::DimensionMismatch, "vector does not match norm dimension");
    if (x.isZero(0.0)) return 0.0;
    const double base = ctx.weighted_norm(x);
    if (std::isfinite(base) && base < kOriginGuard) return 0.0;

    double s = std::isfinite(base) && base > 0.0 ? std::log(base) : 0.0;
    LogNormEval at = log_norm_sq(ctx, x, s);
    if (at.value == 0.0) return std::exp(s);

    // Bracket [lo, hi] with psi(lo) > 0 > psi(hi); psi is strictly decreasing.
    double lo = s, hi = s;
    double step = 1.0;
    if (at.value > 0.0) {
        while (log_norm_sq(ctx, x, hi).value > 0.0) {
            lo = hi;
            hi += step;
            step *= 2.0;
        }
    } else {
        while (log_norm_sq(ctx, x, lo).value < 0.0) {
            hi = lo;
            lo -= step;
            step *= 2.0;
        }
    }

    s = std::clamp(s, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        at = log_norm_sq(ctx, x, s);
        if (at.value == 0.0) break;
        if (at.value > 0.0) lo = s; else hi = s;
        double next = s - at.value / at.slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double delta = std::abs(next - s);
        s = next;
        if (delta <= 1e-15 * std::max(1.0, std::abs(s)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(s))) break;
    }
    return std::exp(s);
}

RowVec norm_gradient(const HomogeneousNormContext& ctx, const Vec& x) {
    const double r = canonical_norm(ctx, x);
    if (r == 0.0) throw Error(ErrorCode::OriginNotDifferentiable, "canonical homogeneous norm has no gradient at 0");
    const double s = -std::log(r);
    const Vec y = dilate(ctx.generator(), s, x);  // d(-ln r) x, on the P-unit sphere
    const Vec py = ctx.shape() * y;
    const double denom = py.dot(ctx.generator().weights().cwiseProduct(y));
    RowVec grad(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        grad(k) = r * py(k) * std::exp(s * ctx.generator().weights()(k)) / denom;
    }
    return grad;
}

}  // namespace homocon
