#include "homocon/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homocon/error.hpp"
#include "homocon/linalg.hpp"
#include "homocon/simulation.hpp"

namespace homocon {

Mat barrier_matrix(int n, double lambda) {
    if (n < 1 || n > kMaxDim) throw Error(ErrorCode::InvalidArgument, "cone dimension out of range");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    Mat shift = lambda * Mat::Identity(n, n);
    for (int k = 0; k + 1 < n; ++k) shift(k, k + 1) = 1.0;
    Mat h(n, n);
    RowVec row = RowVec::Zero(n);
    row(0) = -1.0;
    for (int k = 0; k < n; ++k) {
        h.row(k) = row;
        row = row * shift;
    }
    return h;
}

Mat gamma_matrix(const DilationGenerator& gen, double lambda) {
    const int n = gen.dim();
    Mat g = gen.matrix();
    // diag{-mu(k-1)} A^T puts lambda * (-mu (k-1)) at (k, k-1).
    for (int k = 1; k < n; ++k) g(k, k - 1) += lambda * (-gen.mu() * k);
    return g;
}

ConeSpec::ConeSpec(int n, double lambda, std::optional<double> mu)
    : lambda_(lambda), mu_(mu), h_(barrier_matrix(n, lambda)) {
    if (!(linalg::min_singular_value(h_) > 1e-12 * linalg::spectral_norm(h_))) {
        throw Error(ErrorCode::InvalidArgument, "barrier matrix is singular");
    }
    if (mu) gamma_ = gamma_matrix(DilationGenerator(n, *mu), lambda);
}

Vec linear_barrier(const ConeSpec& spec, const Vec& e) {
    if (e.size() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "error has wrong length");
    return spec.h() * e;
}

Vec homogeneous_barrier(const ConeSpec& spec, const HomogeneousNormContext& ctx, const Vec& e) {
    if (e.size() != spec.dim() || ctx.dim() != spec.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "error has wrong length");
    }
    const double r = canonical_norm(ctx, e);
    if (r == 0.0) return Vec::Zero(e.size());
    return spec.h() * dilate(ctx.generator(), -std::log(r), e);
}

AdmissibilityReport check_initial_admissible(const std::vector<Vec>& e0, const ConeSpec& spec,
                                             const HomogeneousNormContext& ctx) {
    const int n = spec.dim();
    const double lambda = spec.lambda();
    AdmissibilityReport report;
    for (const auto& e : e0) {
        if (e.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial error has wrong length");
        FollowerAdmissibility f;
        for (int k = 2; k <= n; ++k) {
            double sum = 0.0;
            double binom = 1.0;  // C(k-1, z)
            for (int z = 0; z <= k - 1; ++z) {
                sum += binom * std::pow(lambda, z) * e(k - z - 1);
                binom = binom * (k - 1 - z) / (z + 1);
            }
            f.binomial_sums.push_back(sum);
            f.binomial_ok = f.binomial_ok && sum <= 0.0;
        }
        f.behind_leader = e(0) <= 0.0;
        f.in_linear_cone = (spec.h() * e).minCoeff() >= 0.0;
        f.in_unit_ball = ctx.weighted_norm(e) <= 1.0;
        report.admissible = report.admissible && f.in_linear_cone && f.in_unit_ball;
        report.followers.push_back(std::move(f));
    }
    return report;
}

bool metzler_check(const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) < -1e-12) return false;
    return true;
}

InvarianceReport invariance_monitor(const Trajectory& traj, int axis, const ConeSpec& spec,
                                    const HomogeneousNormContext* ctx, BarrierMode mode) {
    if (mode == BarrierMode::Homogeneous && ctx == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "homogeneous monitoring needs a norm context");
    }
    const int n = traj.dim();
    const int followers = traj.num_followers();
    InvarianceReport report;
    report.min_barrier = std::numeric_limits<double>::infinity();
    report.samples.reserve(traj.num_samples());
    for (std::size_t k = 0; k < traj.num_samples(); ++k) {
        BarrierSample sample;
        sample.time = traj.times()[k];
        sample.phi.resize(static_cast<Eigen::Index>(followers) * n);
        for (int i = 1; i <= followers; ++i) {
            const Vec e = traj.error(axis, k, i);
            sample.phi.segment((i - 1) * n, n) =
                mode == BarrierMode::Linear ? linear_barrier(spec, e) : homogeneous_barrier(spec, *ctx, e);
        }
        sample.min_component = sample.phi.minCoeff();
        report.min_barrier = std::min(report.min_barrier, sample.min_component);
        if (!report.first_violation_time && sample.min_component < kViolationThreshold) {
            report.first_violation_time = sample.time;
        }
        report.samples.push_back(std::move(sample));
    }
    return report;
}

}  // namespace homocon
