#pragma once

#include <optional>
#include <vector>

#include "homocon/dilation.hpp"
#include "homocon/types.hpp"

namespace homocon {

class Trajectory;

/// Barrier matrix H with rows h_k = -e_1^T (A + lambda I)^{k-1}, plus
/// Gamma = G_d + lambda diag{-mu(k-1)} A^T when a degree is supplied.
///
/// The linear cone is {e : H e_i >= 0 for all i}; the homogeneous cone is
/// {e : H d(-ln ||e_i||_d) e_i >= 0 for all i}. Both sit inside the safe
/// half-space {e_{i,1} <= 0}.
class ConeSpec {
public:
    ConeSpec(int n, double lambda, std::optional<double> mu = std::nullopt);

    int dim() const noexcept { return static_cast<int>(h_.rows()); }
    double lambda() const noexcept { return lambda_; }
    const std::optional<double>& mu() const noexcept { return mu_; }
    const Mat& h() const noexcept { return h_; }
    /// Present when mu was supplied.
    const std::optional<Mat>& gamma() const noexcept { return gamma_; }

private:
    double lambda_;
    std::optional<double> mu_;
    Mat h_;
    std::optional<Mat> gamma_;
};

Mat barrier_matrix(int n, double lambda);

/// H e_i.
Vec linear_barrier(const ConeSpec& spec, const Vec& e);

/// H d(-ln ||e_i||_d) e_i; zero at the origin.
Vec homogeneous_barrier(const ConeSpec& spec, const HomogeneousNormContext& ctx, const Vec& e);

struct FollowerAdmissibility {
    std::vector<double> binomial_sums;  // k = 2..n, pass when <= 0
    bool binomial_ok = true;
    bool behind_leader = true;  // e_{i,1}(0) <= 0
    bool in_linear_cone = true; // H e_i(0) >= 0
    bool in_unit_ball = true;   // ||e_i(0)||_P <= 1
};

struct AdmissibilityReport {
    std::vector<FollowerAdmissibility> followers;
    /// Initial error lies in the homogeneous cone by the linear-cone plus
    /// unit-ball test for every follower.
    bool admissible = true;
};

/// Per-follower initial-condition checks: the binomial lambda-sums
/// sum_{z=0}^{k-1} C(k-1, z) lambda^z e_{i,k-z}(0) <= 0, the sign of the
/// leading component, linear-cone membership and ||e_i(0)||_P <= 1.
AdmissibilityReport check_initial_admissible(const std::vector<Vec>& e0, const ConeSpec& spec,
                                             const HomogeneousNormContext& ctx);

/// Gamma = G_d + lambda diag{-mu(k-1)} A^T; satisfies H G_d = Gamma H.
Mat gamma_matrix(const DilationGenerator& gen, double lambda);

/// True iff every off-diagonal entry is >= -1e-12.
bool metzler_check(const Mat& m);

enum class BarrierMode { Linear, Homogeneous };

struct BarrierSample {
    double time = 0.0;
    Eigen::VectorXd phi;  // stacked N*n barrier values
    double min_component = 0.0;
};

struct InvarianceReport {
    std::vector<BarrierSample> samples;
    double min_barrier = 0.0;
    std::optional<double> first_violation_time;
};

/// Barrier values below this count as leaving the cone.
inline constexpr double kViolationThreshold = -1e-6;

/// Evaluates the chosen barrier on every follower of `axis` at every grid
/// time. `ctx` is required for BarrierMode::Homogeneous.
InvarianceReport invariance_monitor(const Trajectory& traj, int axis, const ConeSpec& spec,
                                    const HomogeneousNormContext* ctx, BarrierMode mode);

}  // namespace homocon
