#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "homocon/dilation.hpp"
#include "homocon/lmi.hpp"
#include "homocon/types.hpp"

namespace homocon {

/// Canonical integrator chain x' = A x + B u: A is the upper shift matrix and
/// B the last basis vector.
struct IntegratorChain {
    explicit IntegratorChain(int n);

    int n;
    Mat a;
    Vec b;
};

/// K_lin = e_1^T (A + lambda I)^n, i.e. the binomial row (C(n,k) lambda^{n-k}).
/// Places every closed-loop eigenvalue of A - B K_lin at -lambda.
RowVec linear_gain(int n, double lambda);

enum class ProtocolKind { Linear, HomogeneousConsensus, HomogeneousNonOvershooting };

std::string_view to_string(ProtocolKind kind) noexcept;

/// Immutable controller description. Gains are fixed at construction and
/// checked against their certificate once; control_input() never re-verifies.
class ProtocolSpec {
public:
    /// u = -K_lin v.
    static ProtocolSpec linear(int n, double lambda);

    /// u = -||v||_d^{1+mu} K d(-ln ||v||_d) v with K = Y X^{-1} and the norm
    /// induced by P = X^{-1}. Requires mu in [-1, 1/(n-1)) and a feasible
    /// certificate for this generator.
    static ProtocolSpec homogeneous_consensus(const DilationGenerator& gen, const CertificateXY& cert);

    /// Same law with K_lin(lambda) and the norm induced by a feasible P
    /// certificate. Requires mu in [-1, 0).
    static ProtocolSpec homogeneous_non_overshooting(const DilationGenerator& gen, double lambda,
                                                     const CertificateP& cert);

    ProtocolKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return static_cast<int>(gain_.size()); }
    double lambda() const noexcept { return lambda_; }
    double mu() const noexcept { return mu_; }
    const RowVec& gain() const noexcept { return gain_; }
    /// Present for the homogeneous kinds only.
    const std::optional<HomogeneousNormContext>& norm_context() const noexcept { return norm_; }

private:
    ProtocolSpec(ProtocolKind kind, double lambda, double mu, RowVec gain, std::optional<HomogeneousNormContext> norm)
        : kind_(kind), lambda_(lambda), mu_(mu), gain_(std::move(gain)), norm_(std::move(norm)) {}

    ProtocolKind kind_;
    double lambda_;
    double mu_;
    RowVec gain_;
    std::optional<HomogeneousNormContext> norm_;
};

/// Scalar control for one follower from its transmitted vector v. Zero at
/// v = 0 for every kind.
double control_input(const ProtocolSpec& spec, const Vec& v);

/// Stacked consensus-error field for N followers: block i is
///   A e_i + B u(e_i) + q_i.
/// `specs` holds either one shared spec or one per follower.
Eigen::VectorXd error_field(const IntegratorChain& system, std::span<const ProtocolSpec> specs,
                            const Eigen::VectorXd& e, const Eigen::VectorXd& q);

}  // namespace homocon
