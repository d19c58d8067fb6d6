#pragma once

#include "homocon/dilation.hpp"
#include "homocon/types.hpp"

namespace homocon {

/// Certificate for the non-overshooting design:
///   P > 0,  P G_d + G_d P > 0,  P A_cl + A_cl^T P < 0,  A_cl = A - B K_lin.
struct CertificateP {
    Mat p;
    double margin_pd = 0.0;        // lambda_min(P)
    double margin_monotone = 0.0;  // lambda_min(P G_d + G_d P)
    double margin_decay = 0.0;     // -lambda_max(P A_cl + A_cl^T P)
    bool feasible = false;
};

/// Certificate for the distributed homogeneous consensus design:
///   X > 0,  G_d X + X G_d > 0,  A X + X A^T - B Y - Y^T B^T < 0,
/// with derived P = X^{-1} and K = Y X^{-1}.
struct CertificateXY {
    Mat x;
    RowVec y;
    Mat p;
    RowVec k;
    double margin_pd = 0.0;
    double margin_monotone = 0.0;
    double margin_decay = 0.0;
    bool feasible = false;
};

struct RobustnessConstants {
    double rho = 0.0;
    double theta = 0.0;
    double q_bound = 0.0;
};

/// Throws Error{NotSymmetric} when ||P - P^T|| > 1e-12 ||P||. Feasibility
/// requires each margin above 1e-12 times the norm of P.
CertificateP verify_lmi_P(const Mat& p, const DilationGenerator& gen, const Mat& a, const Vec& b, const RowVec& k_lin);

/// Throws Error{NotSymmetric} or Error{SingularX}.
CertificateXY verify_lmi_XY(const Mat& x, const RowVec& y, const DilationGenerator& gen, const Mat& a, const Vec& b);

/// Finds some feasible P. Lyapunov solutions A_cl^T P + P A_cl = -diag(q) are
/// scanned over a deterministic grid of q; if none is monotone, alternating
/// projections between the LMI's affine structure and the shifted PSD cones
/// take over. Throws Error{Infeasible} when both fail.
CertificateP solve_lmi_P(const DilationGenerator& gen, const Mat& a, const Vec& b, const RowVec& k_lin);

/// Same strategy for (X, Y), seeded by Lyapunov solutions of the closed loop
/// under K_lin(lambda) with Y = K_lin X.
CertificateXY solve_lmi_XY(const DilationGenerator& gen, const Mat& a, const Vec& b);

/// 0.99 * rho*, rho* = -lambda_max(P^{-1/2}(P A_cl + A_cl^T P)P^{-1/2}).
/// Throws Error{NonPositiveRho} when rho* <= 0.
double compute_rho(const Mat& p, const Mat& a_cl);

/// rho / (2 lambda_max(P^{-1/2}(P G_d + G_d P)P^{-1/2})).
double compute_theta(const Mat& p, const DilationGenerator& gen, double rho);

/// Admissible matched-disturbance amplitude for n = 2, mu = -1:
///   min{ rho / (2 |P^{1/2}|),
///        lambda theta lambda_min(P^{-1/2} H^T H P^{-1/2})
///          / lambda_max^{1/2}(P^{-1/2} e1 e1^T P^{-1/2}) },
/// with |P^{1/2}| the spectral norm of the symmetric square root.
double disturbance_bound(const Mat& p, const Mat& h, double lambda, double rho, double theta);

/// rho, theta and the disturbance bound for a feasible P certificate.
RobustnessConstants robustness_constants(const Mat& p, const DilationGenerator& gen, const Mat& a_cl, const Mat& h,
                                         double lambda);

}  // namespace homocon
