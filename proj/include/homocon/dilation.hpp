#pragma once

#include "homocon/types.hpp"

namespace homocon {

/// Diagonal generator G_d = diag{1 - mu (n - k)}, k = 1..n, of the weighted
/// dilation d(s) = exp(s G_d) associated with the n-dimensional integrator
/// chain and homogeneity degree mu.
class DilationGenerator {
public:
    /// Requires n in [1, kMaxDim] and mu < 1/(n-1) (any mu when n == 1).
    DilationGenerator(int n, double mu);

    int dim() const noexcept { return n_; }
    double mu() const noexcept { return mu_; }
    /// Weights r_1..r_n; r_n == 1 and all are positive.
    const Vec& weights() const noexcept { return weights_; }
    Mat matrix() const;

private:
    int n_;
    double mu_;
    Vec weights_;
};

/// d(s) = diag{exp(s r_k)}.
Mat dilation_matrix(const DilationGenerator& gen, double s);

/// d(s) x evaluated entrywise in log space, so extreme s with tiny or huge x
/// does not overflow the intermediate exp(s r_k).
Vec dilate(const DilationGenerator& gen, double s, const Vec& x);

struct GeneratorResiduals {
    double commutation;  // ||A G_d - (mu I + G_d) A||
    double input;        // ||G_d B - B||
};

GeneratorResiduals check_generator_relations(const DilationGenerator& gen, const Mat& a, const Vec& b);

/// Dilation generator plus the shape matrix P of the weighted Euclidean norm
/// ||x||_P = sqrt(x^T P x) that induces the canonical homogeneous norm.
class HomogeneousNormContext {
public:
    /// Throws Error{InvalidArgument} unless P is symmetric, P > 0 and
    /// P G_d + G_d P > 0 (monotone dilation).
    HomogeneousNormContext(DilationGenerator gen, Mat p);

    const DilationGenerator& generator() const noexcept { return gen_; }
    const Mat& shape() const noexcept { return p_; }
    int dim() const noexcept { return gen_.dim(); }

    double weighted_norm(const Vec& x) const;

private:
    DilationGenerator gen_;
    Mat p_;
};

/// Canonical homogeneous norm: 0 at the origin, otherwise exp(s) with s the
/// unique root of ||d(-s) x||_P = 1. Safeguarded Newton on
/// s -> ln ||d(-s) x||_P^2, seeded at ln ||x||_P with a bisection fallback.
double canonical_norm(const HomogeneousNormContext& ctx, const Vec& x);

/// Gradient of the canonical homogeneous norm,
///   r x^T d(-ln r)^T P d(-ln r) / (x^T d(-ln r)^T P G_d d(-ln r) x),  r = ||x||_d.
/// Throws Error{OriginNotDifferentiable} at x = 0.
RowVec norm_gradient(const HomogeneousNormContext& ctx, const Vec& x);

/// Below this weighted norm a vector is treated as the origin.
inline constexpr double kOriginGuard = 1e-300;

}  // namespace homocon
