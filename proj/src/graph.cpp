#include "homocon/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "homocon/error.hpp"
#include "homocon/linalg.hpp"

namespace homocon {

DirectedGraph::DirectedGraph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    const auto size = weights_.rows();
    if (size < 2 || weights_.cols() != size) {
        throw Error(ErrorCode::InvalidArgument, "graph needs a square weight matrix with a leader and >= 1 follower");
    }
    if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
        throw Error(ErrorCode::InvalidArgument, "edge weights must be finite and nonnegative");
    }
    for (Eigen::Index i = 0; i < size; ++i) {
        if (weights_(i, i) != 0.0) {
            throw Error(ErrorCode::InvalidArgument, "self-loop at agent " + std::to_string(i));
        }
    }
    if (weights_.row(0).sum() != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "the leader must not receive information");
    }
    for (Eigen::Index i = 1; i < size; ++i) {
        if (!(weights_.row(i).sum() > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "follower " + std::to_string(i) + " has no incoming edge");
        }
    }
}

DirectedGraph DirectedGraph::from_edges(int num_followers, const std::vector<Edge>& edges) {
    if (num_followers < 1) throw Error(ErrorCode::InvalidArgument, "need at least one follower");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(num_followers + 1, num_followers + 1);
    for (const auto& e : edges) {
        if (e.to < 0 || e.to > num_followers || e.from < 0 || e.from > num_followers) {
            throw Error(ErrorCode::InvalidArgument,
                        "edge (" + std::to_string(e.to) + ", " + std::to_string(e.from) + ") out of range");
        }
        w(e.to, e.from) = e.weight;
    }
    return DirectedGraph(std::move(w));
}

LaplacianDecomposition laplacian(const DirectedGraph& g) {
    const auto& w = g.weights();
    const int size = g.num_agents();
    Eigen::MatrixXd l = -w;
    for (int i = 0; i < size; ++i) l(i, i) = w.row(i).sum();

    LaplacianDecomposition out{l, l.bottomRightCorner(size - 1, size - 1)};
    const double scale = linalg::spectral_norm(out.follower_block);
    if (!(linalg::min_singular_value(out.follower_block) > 1e-9 * scale)) {
        throw Error(ErrorCode::SingularFollowerBlock, "follower Laplacian block is singular; graph is not leader-rooted");
    }
    return out;
}

namespace {

// BFS from the leader along j -> i information flow; returns hop distance,
// or -1 for unreachable agents.
std::vector<int> leader_distances(const DirectedGraph& g) {
    const int size = g.num_agents();
    std::vector<int> dist(size, -1);
    dist[0] = 0;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        const int j = queue.front();
        queue.pop_front();
        for (int i = 1; i < size; ++i) {
            if (g.weight(i, j) > 0.0 && dist[i] < 0) {
                dist[i] = dist[j] + 1;
                queue.push_back(i);
            }
        }
    }
    return dist;
}

// Kahn ordering of followers using follower->follower edges only. Empty when
// the follower subgraph has a cycle.
std::vector<int> follower_topological_order(const DirectedGraph& g) {
    const int n = g.num_followers();
    std::vector<int> indegree(n + 1, 0);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (g.weight(i, j) > 0.0) ++indegree[i];

    std::vector<int> order;
    std::deque<int> ready;
    for (int i = 1; i <= n; ++i)
        if (indegree[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        const int j = ready.front();
        ready.pop_front();
        order.push_back(j);
        for (int i = 1; i <= n; ++i) {
            if (g.weight(i, j) > 0.0 && --indegree[i] == 0) ready.push_back(i);
        }
    }
    if (static_cast<int>(order.size()) != n) order.clear();
    return order;
}

}  // namespace

bool is_leader_rooted(const DirectedGraph& g) {
    const auto dist = leader_distances(g);
    return std::all_of(dist.begin(), dist.end(), [](int d) { return d >= 0; });
}

int transmitted_iteration_cap(int num_followers, int state_dim) noexcept {
    return std::max(10 * num_followers * state_dim, 1000);
}

std::vector<Eigen::VectorXd> solve_transmitted(const DirectedGraph& g, const Eigen::MatrixXd& m,
                                               const std::vector<Eigen::VectorXd>& states) {
    const int size = g.num_agents();
    const int followers = g.num_followers();
    if (static_cast<int>(states.size()) != size) {
        throw Error(ErrorCode::DimensionMismatch, "expected one state per agent");
    }
    const auto n = m.cols();
    for (const auto& x : states) {
        if (x.size() != n) throw Error(ErrorCode::DimensionMismatch, "state dimension does not match M");
    }

    // omega_i = c_i + sum_j a_ij omega_j with a_ij = w_ij / sum_k w_ik.
    std::vector<Eigen::VectorXd> offset(size, Eigen::VectorXd::Zero(m.rows()));
    std::vector<double> degree(size, 0.0);
    for (int i = 1; i < size; ++i) {
        degree[i] = g.weights().row(i).sum();
        for (int j = 0; j < size; ++j) {
            const double w = g.weight(i, j);
            if (w > 0.0) offset[i] += (w / degree[i]) * (m * (states[i] - states[j]));
        }
    }

    std::vector<Eigen::VectorXd> omega(size, Eigen::VectorXd::Zero(m.rows()));
    auto update = [&](int i) {
        Eigen::VectorXd next = offset[i];
        for (int j = 1; j < size; ++j) {
            const double w = g.weight(i, j);
            if (w > 0.0) next += (w / degree[i]) * omega[j];
        }
        return next;
    };

    const auto order = follower_topological_order(g);
    if (!order.empty()) {
        for (int i : order) omega[i] = update(i);
        return {omega.begin() + 1, omega.end()};
    }

    if (!is_leader_rooted(g)) {
        throw Error(ErrorCode::SingularFollowerBlock, "transmitted vectors need a leader-rooted graph");
    }
    const auto dist = leader_distances(g);
    std::vector<int> sweep(followers);
    for (int i = 0; i < followers; ++i) sweep[i] = i + 1;
    std::stable_sort(sweep.begin(), sweep.end(), [&](int a, int b) { return dist[a] < dist[b]; });

    double scale = 1.0;
    for (int i = 1; i < size; ++i) scale = std::max(scale, offset[i].lpNorm<Eigen::Infinity>());

    // Stop on the a-posteriori bound change * rho / (1 - rho) for the
    // distance to the fixed point, rho estimated from successive sweeps; a
    // small per-sweep change alone understates the error on slow cycles.
    const double tol = 1e-12 * scale;
    const double noise_floor = 64 * std::numeric_limits<double>::epsilon() * scale;
    const int cap = transmitted_iteration_cap(followers, static_cast<int>(n));
    double prev_change = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cap; ++iter) {
        double change = 0.0;
        for (int i : sweep) {
            Eigen::VectorXd next = update(i);
            change = std::max(change, (next - omega[i]).lpNorm<Eigen::Infinity>());
            omega[i] = std::move(next);
        }
        const double rho = change / prev_change;
        prev_change = change;
        const bool settled = change <= noise_floor || (rho < 1.0 && change * rho / (1.0 - rho) <= tol);
        if (settled && change <= tol) {
            double residual = 0.0;
            for (int i = 1; i < size; ++i)
                residual = std::max(residual, (update(i) - omega[i]).lpNorm<Eigen::Infinity>());
            if (residual <= tol) return {omega.begin() + 1, omega.end()};
        }
    }
    throw Error(ErrorCode::NoConvergence,
                "transmitted-vector iteration did not converge in " + std::to_string(cap) + " sweeps");
}

}  // namespace homocon
