#include "homocon/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "homocon/error.hpp"

namespace homocon {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void validate(const ScenarioConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (!(cfg.horizon >= cfg.dt) || !std::isfinite(cfg.horizon)) {
        throw Error(ErrorCode::InvalidArgument, "horizon must be at least dt");
    }
    if (cfg.axes.empty()) throw Error(ErrorCode::InvalidArgument, "scenario has no axes");
    const auto agents = static_cast<std::size_t>(cfg.graph.num_agents());
    for (const auto& axis : cfg.axes) {
        if (axis.protocol.dim() != cfg.n) throw Error(ErrorCode::DimensionMismatch, "protocol dimension differs from n");
        if (axis.initial.size() != agents) {
            throw Error(ErrorCode::DimensionMismatch, "axis '" + axis.name + "' needs one initial state per agent");
        }
        for (const auto& x : axis.initial) {
            if (x.size() != cfg.n || !x.allFinite()) {
                throw Error(ErrorCode::DimensionMismatch, "initial state has wrong length or is not finite");
            }
        }
        if (axis.cone && axis.cone->dim() != cfg.n) throw Error(ErrorCode::DimensionMismatch, "cone dimension differs");
        if (axis.monitor_norm && axis.monitor_norm->dim() != cfg.n) {
            throw Error(ErrorCode::DimensionMismatch, "monitor norm dimension differs");
        }
    }
    if (cfg.disturbance) {
        const auto& amp = cfg.disturbance->amplitude;
        if (amp.size() != cfg.axes.size()) throw Error(ErrorCode::DimensionMismatch, "one amplitude row per axis");
        for (const auto& row : amp) {
            if (row.size() != agents) throw Error(ErrorCode::DimensionMismatch, "one amplitude per agent");
            for (double a : row)
                if (!(a >= 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "amplitudes must be >= 0");
        }
    }
}

// Residual of the scaled implicit step in the unknown tau = ln ||e+||_d.
struct ScaledStep {
    const HomogeneousNormContext& ctx;
    const RowVec& k;
    const Mat& a;
    const Vec& b_in;
    const Vec& rhs;
    double dt;
    double mu;

    Vec solve(double tau) const {
        const int n = ctx.dim();
        const Vec& w = ctx.generator().weights();
        Mat m = -dt * a;
        m.diagonal().array() += 1.0;
        for (int j = 0; j < n; ++j) m.col(j) *= std::exp(tau * w(j));
        m.noalias() += (dt * std::exp(tau * (1.0 + mu))) * b_in * k;
        Eigen::FullPivLU<Mat> lu(m);
        if (!lu.isInvertible()) return Vec::Constant(n, std::numeric_limits<double>::infinity());
        return lu.solve(rhs);
    }

    double operator()(double tau) const {
        const Vec z = solve(tau);
        const double q = z.dot(ctx.shape() * z);
        if (!std::isfinite(q)) return std::numeric_limits<double>::infinity();
        return std::log(q);
    }
};

}  // namespace

ConeSpec effective_cone(const AxisConfig& axis, int n) {
    if (axis.cone) return *axis.cone;
    const double lambda = axis.protocol.lambda() > 0.0 ? axis.protocol.lambda() : 1.0;
    return ConeSpec(n, lambda);
}

const HomogeneousNormContext* effective_norm(const AxisConfig& axis) {
    if (axis.protocol.norm_context()) return &*axis.protocol.norm_context();
    if (axis.monitor_norm) return &*axis.monitor_norm;
    return nullptr;
}

Trajectory::Trajectory(int num_agents, int dim, std::vector<std::string> axis_names)
    : num_agents_(num_agents), dim_(dim) {
    for (auto& name : axis_names) {
        AxisTrace trace;
        trace.name = std::move(name);
        axes_.push_back(std::move(trace));
    }
}

int Trajectory::axis_index(const std::string& name) const {
    for (std::size_t a = 0; a < axes_.size(); ++a)
        if (axes_[a].name == name) return static_cast<int>(a);
    throw Error(ErrorCode::InvalidArgument, "no axis named '" + name + "'");
}

namespace {
Vec slice(const std::vector<double>& data, std::size_t offset, int n) {
    return Eigen::Map<const Eigen::VectorXd>(data.data() + offset, n);
}
}  // namespace

Vec Trajectory::state(int axis, std::size_t k, int agent) const {
    return slice(axes_.at(axis).states, (k * num_agents_ + agent) * dim_, dim_);
}
Vec Trajectory::error(int axis, std::size_t k, int agent) const {
    return slice(axes_.at(axis).errors, (k * num_agents_ + agent) * dim_, dim_);
}
Vec Trajectory::barrier(int axis, std::size_t k, int agent) const {
    return slice(axes_.at(axis).barriers, (k * num_agents_ + agent) * dim_, dim_);
}
double Trajectory::control(int axis, std::size_t k, int agent) const {
    return axes_.at(axis).controls.at(k * num_agents_ + agent);
}
double Trajectory::hnorm(int axis, std::size_t k, int agent) const {
    return axes_.at(axis).hnorms.at(k * num_agents_ + agent);
}
double Trajectory::disturbance(int axis, std::size_t k, int agent) const {
    return axes_.at(axis).disturbances.at(k * num_agents_ + agent);
}

void Trajectory::record(int axis, int /*agent*/, const Vec& state, const Vec& error, const Vec& barrier, double control,
                        double hnorm, double disturbance) {
    auto& tr = axes_.at(axis);
    tr.states.insert(tr.states.end(), state.data(), state.data() + dim_);
    tr.errors.insert(tr.errors.end(), error.data(), error.data() + dim_);
    tr.barriers.insert(tr.barriers.end(), barrier.data(), barrier.data() + dim_);
    tr.controls.push_back(control);
    tr.hnorms.push_back(hnorm);
    tr.disturbances.push_back(disturbance);
}

void Trajectory::write_csv(std::ostream& os) const {
    os << "t,agent,axis";
    for (int j = 1; j <= dim_; ++j) os << ",x" << j;
    os << ",u";
    for (int j = 1; j <= dim_; ++j) os << ",e" << j;
    os << ",hnorm";
    for (int j = 1; j <= dim_; ++j) os << ",phi" << j;
    os << ",q\n";

    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    };
    for (std::size_t k = 0; k < times_.size(); ++k) {
        for (int i = 0; i < num_agents_; ++i) {
            for (const auto& tr : axes_) {
                std::snprintf(buf, sizeof buf, "%.17g", times_[k]);
                os << buf << ',' << i << ',' << tr.name;
                const std::size_t vec = (k * num_agents_ + i) * dim_;
                const std::size_t sc = k * num_agents_ + i;
                for (int j = 0; j < dim_; ++j) put(tr.states[vec + j]);
                put(tr.controls[sc]);
                for (int j = 0; j < dim_; ++j) put(tr.errors[vec + j]);
                put(tr.hnorms[sc]);
                for (int j = 0; j < dim_; ++j) put(tr.barriers[vec + j]);
                put(tr.disturbances[sc]);
                os << '\n';
            }
        }
    }
}

Eigen::VectorXd step_implicit_euler(const Eigen::VectorXd& x,
                                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    constexpr int kMaxIter = 100;
    constexpr double kTol = 1e-12;
    Eigen::VectorXd y = x + dt * field(x);
    Eigen::VectorXd best = y;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxIter; ++it) {
        Eigen::VectorXd next = x + dt * field(y);
        if (!next.allFinite()) break;
        const double change = (next - y).stableNorm();
        if (!std::isfinite(change)) break;
        if (change < best_residual) {
            best_residual = change;
            best = next;
        }
        y = std::move(next);
        if (change <= kTol * std::max(1.0, y.stableNorm())) return y;
    }
    // Oscillation around a discontinuity: keep the iterate with the smallest
    // residual if it is within a loose band, otherwise give up.
    if (best_residual <= std::sqrt(kTol) * std::max(1.0, best.stableNorm())) return best;
    throw Error(ErrorCode::NonConvergentStep, "implicit Euler iteration did not converge; reduce dt");
}

Vec implicit_follower_step(const IntegratorChain& chain, const ProtocolSpec& spec, const Vec& e, const Vec& w,
                           double dt) {
    const int n = chain.n;
    if (e.size() != n || w.size() != n || spec.dim() != n) {
        throw Error(ErrorCode::DimensionMismatch, "step inputs have inconsistent lengths");
    }
    const Vec rhs = e + dt * w;
    if (spec.kind() == ProtocolKind::Linear) {
        Mat m = -dt * (chain.a - chain.b * spec.gain());
        m.diagonal().array() += 1.0;
        return m.partialPivLu().solve(rhs);
    }

    const auto& ctx = *spec.norm_context();
    if (ctx.weighted_norm(rhs) < kOriginGuard) return Vec::Zero(n);
    // Rescale to ||rhs||_d = 1; homogeneity maps the step onto the same
    // problem with time step dt * exp(mu * tau0).
    const double tau0 = std::log(canonical_norm(ctx, rhs));
    const Vec scaled = dilate(ctx.generator(), -tau0, rhs);
    const double dt_scaled = dt * std::exp(spec.mu() * tau0);
    const ScaledStep f{ctx, spec.gain(), chain.a, chain.b, scaled, dt_scaled, spec.mu()};

    constexpr double kFloor = -60.0;
    constexpr double kCeil = 60.0;
    double lo = -1.0;
    double hi = 1.0;
    double f_lo = f(lo);
    while (!(f_lo > 0.0)) {
        hi = lo;
        lo *= 2.0;
        if (lo < kFloor) return Vec::Zero(n);  // the set-valued origin absorbs the step
        f_lo = f(lo);
    }
    double f_hi = f(hi);
    while (!(f_hi < 0.0)) {
        if (f_hi == 0.0) break;
        lo = hi;
        f_lo = f_hi;
        hi = hi <= 0.0 ? 1.0 : 2.0 * hi;
        if (hi > kCeil) throw Error(ErrorCode::NonConvergentStep, "implicit step bracket failed; reduce dt");
        f_hi = f(hi);
    }
    double tau = hi;
    if (f_hi != 0.0) {
        std::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                            boost::math::tools::eps_tolerance<double>(52), iters);
        tau = 0.5 * (root.first + root.second);
    }
    const Vec z = f.solve(tau);
    if (!z.allFinite()) throw Error(ErrorCode::NonConvergentStep, "implicit step produced a non-finite state");
    return dilate(ctx.generator(), tau0 + tau, z);
}

Trajectory simulate(const ScenarioConfig& cfg) {
    validate(cfg);
    const int n = cfg.n;
    const int agents = cfg.graph.num_agents();
    const int num_axes = static_cast<int>(cfg.axes.size());
    const IntegratorChain chain(n);
    const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));

    std::vector<std::string> names;
    std::vector<ConeSpec> cones;
    std::vector<const HomogeneousNormContext*> norms;
    for (const auto& axis : cfg.axes) {
        names.push_back(axis.name);
        cones.push_back(effective_cone(axis, n));
        norms.push_back(effective_norm(axis));
    }
    Trajectory traj(agents, n, names);
    for (int a = 0; a < num_axes; ++a) {
        auto& tr = traj.axis(a);
        tr.barrier_mode = norms[a] ? BarrierMode::Homogeneous : BarrierMode::Linear;
        tr.states.reserve((steps + 1) * agents * n);
        tr.errors.reserve((steps + 1) * agents * n);
        tr.barriers.reserve((steps + 1) * agents * n);
        tr.controls.reserve((steps + 1) * agents);
        tr.hnorms.reserve((steps + 1) * agents);
        tr.disturbances.reserve((steps + 1) * agents);
    }

    // x[a][i] agent states, err[a][i] follower errors (err[a][0] unused).
    std::vector<std::vector<Eigen::VectorXd>> x(num_axes);
    std::vector<std::vector<Vec>> err(num_axes);
    for (int a = 0; a < num_axes; ++a) {
        for (const auto& xi : cfg.axes[a].initial) x[a].push_back(xi);
        err[a].assign(agents, Vec::Zero(n));
        for (int i = 1; i < agents; ++i) err[a][i] = cfg.axes[a].initial[i] - cfg.axes[a].initial[0];
    }

    std::mt19937_64 rng(cfg.disturbance ? cfg.disturbance->seed : 0);
    std::vector<std::vector<double>> qhat(num_axes, std::vector<double>(agents, 0.0));
    auto draw = [&] {
        if (!cfg.disturbance) return;
        for (int a = 0; a < num_axes; ++a)
            for (int i = 0; i < agents; ++i) {
                const double amp = cfg.disturbance->amplitude[a][i];
                const double u = uniform01(rng);
                qhat[a][i] = amp * (2.0 * u - 1.0);
            }
    };

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    auto controls_for = [&](int a, const std::vector<Eigen::VectorXd>& states) {
        const auto v = solve_transmitted(cfg.graph, identity, states);
        std::vector<double> u(agents, 0.0);
        for (int i = 1; i < agents; ++i) u[i] = control_input(cfg.axes[a].protocol, Vec(v[i - 1]));
        return u;
    };

    auto record = [&](std::size_t k) {
        traj.push_time(static_cast<double>(k) * cfg.dt);
        for (int a = 0; a < num_axes; ++a) {
            const auto u = controls_for(a, x[a]);
            const Vec zero = Vec::Zero(n);
            traj.record(a, 0, x[a][0], zero, zero, 0.0, 0.0, qhat[a][0]);
            for (int i = 1; i < agents; ++i) {
                const Vec& e = err[a][i];
                double hn;
                Vec phi;
                if (norms[a]) {
                    hn = canonical_norm(*norms[a], e);
                    phi = hn == 0.0 ? zero : Vec(cones[a].h() * dilate(norms[a]->generator(), -std::log(hn), e));
                } else {
                    hn = e.norm();
                    phi = cones[a].h() * e;
                }
                traj.record(a, i, x[a][i], e, phi, u[i], hn, qhat[a][i]);
            }
        }
    };

    draw();
    record(0);

    if (cfg.integrator == Integrator::ImplicitEuler) {
        Mat leader = -cfg.dt * chain.a;
        leader.diagonal().array() += 1.0;
        const auto leader_lu = leader.partialPivLu();
        for (std::size_t k = 1; k <= steps; ++k) {
            for (int a = 0; a < num_axes; ++a) {
                const Vec x0 = x[a][0];
                const Vec x0_next = leader_lu.solve(Vec(x0 + cfg.dt * chain.b * qhat[a][0]));
                for (int i = 1; i < agents; ++i) {
                    const Vec w = chain.b * (qhat[a][i] - qhat[a][0]);
                    err[a][i] = implicit_follower_step(chain, cfg.axes[a].protocol, err[a][i], w, cfg.dt);
                    x[a][i] = x0_next + err[a][i];
                }
                x[a][0] = x0_next;
            }
            draw();
            record(k);
        }
    } else {
        const double h = cfg.dt;
        auto deriv = [&](int a, const std::vector<Eigen::VectorXd>& states) {
            const auto u = controls_for(a, states);
            std::vector<Eigen::VectorXd> out(agents);
            for (int i = 0; i < agents; ++i) out[i] = chain.a * states[i] + chain.b * (u[i] + qhat[a][i]);
            return out;
        };
        auto axpy = [&](const std::vector<Eigen::VectorXd>& base, double s, const std::vector<Eigen::VectorXd>& d) {
            std::vector<Eigen::VectorXd> out(agents);
            for (int i = 0; i < agents; ++i) out[i] = base[i] + s * d[i];
            return out;
        };
        for (std::size_t k = 1; k <= steps; ++k) {
            for (int a = 0; a < num_axes; ++a) {
                const auto& s = x[a];
                const auto k1 = deriv(a, s);
                const auto k2 = deriv(a, axpy(s, h / 2, k1));
                const auto k3 = deriv(a, axpy(s, h / 2, k2));
                const auto k4 = deriv(a, axpy(s, h, k3));
                for (int i = 0; i < agents; ++i) x[a][i] += (h / 6) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
                for (int i = 1; i < agents; ++i) {
                    if (!x[a][i].allFinite()) throw Error(ErrorCode::NonConvergentStep, "explicit step diverged; reduce dt");
                    err[a][i] = x[a][i] - x[a][0];
                }
            }
            draw();
            record(k);
        }
    }
    return traj;
}

namespace {
std::optional<double> settle_scan(const Trajectory& traj, double tol, int first_axis, int last_axis) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    const auto samples = traj.num_samples();
    if (samples == 0) return std::nullopt;
    const double tol2 = tol * tol;
    for (std::size_t k = samples; k-- > 0;) {
        double sq = 0.0;
        for (int a = first_axis; a <= last_axis; ++a)
            for (int i = 1; i < traj.num_agents(); ++i) sq += traj.error(a, k, i).squaredNorm();
        if (!(sq <= tol2)) {
            if (k + 1 == samples) return std::nullopt;
            return traj.times()[k + 1];
        }
    }
    return traj.times()[0];
}
}  // namespace

std::optional<double> settling_time(const Trajectory& traj, double tol) {
    return settle_scan(traj, tol, 0, traj.num_axes() - 1);
}

std::optional<double> settling_time(const Trajectory& traj, int axis, double tol) {
    if (axis < 0 || axis >= traj.num_axes()) throw Error(ErrorCode::InvalidArgument, "axis out of range");
    return settle_scan(traj, tol, axis, axis);
}

double overshoot_metric(const Trajectory& traj, int axis) {
    const auto& errors = traj.axis(axis).errors;
    const int n = traj.dim();
    const int agents = traj.num_agents();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.num_samples(); ++k)
        for (int i = 1; i < agents; ++i) worst = std::max(worst, errors[(k * agents + i) * n]);
    return worst;
}

}  // namespace homocon
