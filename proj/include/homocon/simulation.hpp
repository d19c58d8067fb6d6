#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "homocon/cone.hpp"
#include "homocon/graph.hpp"
#include "homocon/protocol.hpp"
#include "homocon/types.hpp"

namespace homocon {

enum class Integrator { ImplicitEuler, ExplicitRK4 };

/// Matched disturbance q_i = B qhat_i with qhat_i uniform on [-a_i, a_i],
/// redrawn once per integration step and held over it.
struct DisturbanceSpec {
    std::vector<std::vector<double>> amplitude;  // [axis][agent 0..N], >= 0
    std::uint64_t seed = 0;
};

/// One decoupled coordinate of the multi-agent system (e.g. the X or Y axis
/// of planar robots) with its own protocol.
struct AxisConfig {
    std::string name;
    ProtocolSpec protocol;
    std::vector<Vec> initial;  // x_0..x_N
    /// Cone used for the recorded barrier values; defaults to lambda = 1 (or
    /// the protocol's lambda) when absent.
    std::optional<ConeSpec> cone;
    /// Norm used for recorded hnorm / homogeneous barrier when the protocol
    /// itself is linear. Without either, hnorm is ||e_i|| and the barrier is
    /// the linear one.
    std::optional<HomogeneousNormContext> monitor_norm;
};

struct ScenarioConfig {
    DirectedGraph graph;
    int n = 2;
    std::vector<AxisConfig> axes;
    std::optional<DisturbanceSpec> disturbance;
    double dt = 1e-3;
    double horizon = 20.0;
    Integrator integrator = Integrator::ImplicitEuler;
};

/// Every recorded series of one axis, flattened as [step][agent][component]
/// (vectors) or [step][agent] (scalars). The leader's error, hnorm and barrier
/// are zero.
struct AxisTrace {
    std::string name;
    BarrierMode barrier_mode = BarrierMode::Linear;
    std::vector<double> states;
    std::vector<double> errors;
    std::vector<double> barriers;
    std::vector<double> controls;
    std::vector<double> hnorms;
    std::vector<double> disturbances;
};

class Trajectory {
public:
    Trajectory(int num_agents, int dim, std::vector<std::string> axis_names);

    int num_agents() const noexcept { return num_agents_; }
    int num_followers() const noexcept { return num_agents_ - 1; }
    int dim() const noexcept { return dim_; }
    std::size_t num_samples() const noexcept { return times_.size(); }
    int num_axes() const noexcept { return static_cast<int>(axes_.size()); }
    const std::vector<double>& times() const noexcept { return times_; }
    const AxisTrace& axis(int a) const { return axes_.at(a); }
    AxisTrace& axis(int a) { return axes_.at(a); }
    int axis_index(const std::string& name) const;

    Vec state(int axis, std::size_t k, int agent) const;
    Vec error(int axis, std::size_t k, int agent) const;
    Vec barrier(int axis, std::size_t k, int agent) const;
    double control(int axis, std::size_t k, int agent) const;
    double hnorm(int axis, std::size_t k, int agent) const;
    double disturbance(int axis, std::size_t k, int agent) const;

    /// Starts a new sample; the caller then fills every axis via record().
    void push_time(double t) { times_.push_back(t); }
    void record(int axis, int agent, const Vec& state, const Vec& error, const Vec& barrier, double control,
                double hnorm, double disturbance);

    /// Header `t,agent,axis,x1..xn,u,e1..en,hnorm,phi1..phin,q`, one row per
    /// (time, agent, axis), 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    int num_agents_;
    int dim_;
    std::vector<double> times_;
    std::vector<AxisTrace> axes_;
};

/// Cone used for an axis' recorded barrier values.
ConeSpec effective_cone(const AxisConfig& axis, int n);

/// Norm used for an axis' hnorm and homogeneous barrier: the protocol's own,
/// else the monitor norm, else none (Euclidean hnorm, linear barrier).
const HomogeneousNormContext* effective_norm(const AxisConfig& axis);

/// Generic implicit Euler step x+ = x + dt f(x+) by fixed-point iteration
/// seeded at the explicit predictor (tolerance 1e-12, 100 iterations).
/// Throws Error{NonConvergentStep} when the iteration does not settle.
Eigen::VectorXd step_implicit_euler(const Eigen::VectorXd& x,
                                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field, double dt);

/// Exact implicit Euler step of one follower's error dynamics
///   e+ = e + dt (A e+ + B u(e+) + w).
/// Linear protocols use a linear solve. Homogeneous protocols write
/// e+ = d(ln r) z with ||z||_P = 1, which turns the step into a scalar
/// root-finding problem in ln r; when no positive root exists (the
/// set-valued origin at mu = -1) the step lands on e+ = 0.
/// Throws Error{NonConvergentStep} if the bracket cannot be established.
Vec implicit_follower_step(const IntegratorChain& chain, const ProtocolSpec& spec, const Vec& e, const Vec& w,
                           double dt);

/// Closed-loop integration of leader and followers on a shared grid.
/// Deterministic: the same config and seed give bit-identical output.
Trajectory simulate(const ScenarioConfig& cfg);

/// Earliest grid time after which the stacked error (all axes) stays <= tol.
std::optional<double> settling_time(const Trajectory& traj, double tol);

/// Same, restricted to one axis.
std::optional<double> settling_time(const Trajectory& traj, int axis, double tol);

/// max over time and followers of e_{i,1} on the axis; <= 0 means the
/// followers never passed the leader.
double overshoot_metric(const Trajectory& traj, int axis);

}  // namespace homocon
