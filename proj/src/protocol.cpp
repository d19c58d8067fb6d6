#include "homocon/protocol.hpp"

#include <cmath>
#include <string>

#include "homocon/error.hpp"

namespace homocon {

IntegratorChain::IntegratorChain(int dim) : n(dim) {
    if (dim < 1 || dim > kMaxDim) throw Error(ErrorCode::InvalidArgument, "chain dimension out of range");
    a = Mat::Zero(dim, dim);
    for (int k = 0; k + 1 < dim; ++k) a(k, k + 1) = 1.0;
    b = Vec::Zero(dim);
    b(dim - 1) = 1.0;
}

RowVec linear_gain(int n, double lambda) {
    if (n < 1 || n > kMaxDim) throw Error(ErrorCode::InvalidArgument, "chain dimension out of range");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    // Row 1 of (A + lambda I)^n: A^k shifts e_1^T to e_{k+1}^T, so entry k+1
    // is C(n, k) lambda^{n-k}.
    RowVec k(n);
    double binom = 1.0;
    for (int j = 0; j < n; ++j) {
        k(j) = binom * std::pow(lambda, n - j);
        binom = binom * (n - j) / (j + 1);
    }
    return k;
}

std::string_view to_string(ProtocolKind kind) noexcept {
    switch (kind) {
        case ProtocolKind::Linear: return "linear";
        case ProtocolKind::HomogeneousConsensus: return "homogeneous_consensus";
        case ProtocolKind::HomogeneousNonOvershooting: return "homogeneous_non_overshooting";
    }
    return "unknown";
}

ProtocolSpec ProtocolSpec::linear(int n, double lambda) {
    return ProtocolSpec(ProtocolKind::Linear, lambda, 0.0, linear_gain(n, lambda), std::nullopt);
}

ProtocolSpec ProtocolSpec::homogeneous_consensus(const DilationGenerator& gen, const CertificateXY& cert) {
    if (gen.mu() < -1.0) throw Error(ErrorCode::InvalidArgument, "homogeneous consensus needs mu >= -1");
    const IntegratorChain chain(gen.dim());
    const auto check = verify_lmi_XY(cert.x, cert.y, gen, chain.a, chain.b);
    if (!check.feasible) throw Error(ErrorCode::CertificateMissing, "(X, Y) is not a feasible certificate for this mu");
    return ProtocolSpec(ProtocolKind::HomogeneousConsensus, 0.0, gen.mu(), check.k, HomogeneousNormContext(gen, check.p));
}

ProtocolSpec ProtocolSpec::homogeneous_non_overshooting(const DilationGenerator& gen, double lambda,
                                                        const CertificateP& cert) {
    if (!(gen.mu() >= -1.0 && gen.mu() < 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "non-overshooting protocol needs mu in [-1, 0)");
    }
    const IntegratorChain chain(gen.dim());
    const RowVec k_lin = linear_gain(gen.dim(), lambda);
    const auto check = verify_lmi_P(cert.p, gen, chain.a, chain.b, k_lin);
    if (!check.feasible) throw Error(ErrorCode::CertificateMissing, "P is not a feasible certificate for this mu/lambda");
    return ProtocolSpec(ProtocolKind::HomogeneousNonOvershooting, lambda, gen.mu(), k_lin,
                        HomogeneousNormContext(gen, cert.p));
}

double control_input(const ProtocolSpec& spec, const Vec& v) {
    if (v.size() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "transmitted vector has wrong length");
    if (spec.kind() == ProtocolKind::Linear) return -spec.gain().dot(v);

    const auto& ctx = *spec.norm_context();
    const double r = canonical_norm(ctx, v);
    if (r == 0.0) return 0.0;
    const double log_r = std::log(r);
    // r^{1+mu} K d(-ln r) v, folded into one exponent per entry.
    const Vec& w = ctx.generator().weights();
    double u = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (v(k) == 0.0) continue;
        u += spec.gain()(k) * std::copysign(std::exp((1.0 + spec.mu() - w(k)) * log_r + std::log(std::abs(v(k)))), v(k));
    }
    return -u;
}

Eigen::VectorXd error_field(const IntegratorChain& system, std::span<const ProtocolSpec> specs,
                            const Eigen::VectorXd& e, const Eigen::VectorXd& q) {
    const int n = system.n;
    if (e.size() % n != 0 || q.size() != e.size() || specs.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "error and disturbance stacks must be N*n long");
    }
    const auto followers = e.size() / n;
    if (specs.size() != 1 && static_cast<Eigen::Index>(specs.size()) != followers) {
        throw Error(ErrorCode::DimensionMismatch, "need one shared spec or one per follower");
    }
    Eigen::VectorXd out(e.size());
    for (Eigen::Index i = 0; i < followers; ++i) {
        const auto& spec = specs[specs.size() == 1 ? 0 : i];
        if (spec.dim() != n) throw Error(ErrorCode::DimensionMismatch, "protocol dimension differs from system");
        const Vec ei = e.segment(i * n, n);
        const Vec block = system.a * ei + system.b * control_input(spec, ei);
        out.segment(i * n, n) = block + q.segment(i * n, n);
    }
    return out;
}

}  // namespace homocon
