#pragma once

#include <cstddef>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "homocon/types.hpp"

namespace homocon {

/// Weighted directed communication graph over the leader (vertex 0) and
/// followers 1..N.
///
/// Edge convention: weight(i, j) > 0 means agent j transmits to agent i
/// ("j informs i"). Row i therefore lists everything agent i listens to.
/// The constructor enforces: no self-loops, nothing flows into the leader,
/// nonnegative weights, and every follower has at least one incoming edge.
/// Reachability from the leader is *not* enforced here; see is_leader_rooted().
class DirectedGraph {
public:
    struct Edge {
        int to;    // receiving agent i
        int from;  // transmitting agent j
        double weight;
    };

    explicit DirectedGraph(Eigen::MatrixXd weights);

    /// Builds an (N+1)x(N+1) graph from (i, j, w) triples, i.e. j informs i.
    static DirectedGraph from_edges(int num_followers, const std::vector<Edge>& edges);

    int num_followers() const noexcept { return static_cast<int>(weights_.rows()) - 1; }
    int num_agents() const noexcept { return static_cast<int>(weights_.rows()); }
    double weight(int i, int j) const { return weights_(i, j); }
    const Eigen::MatrixXd& weights() const noexcept { return weights_; }

private:
    Eigen::MatrixXd weights_;
};

struct LaplacianDecomposition {
    Eigen::MatrixXd full_laplacian;  // (N+1)x(N+1), zero row sums
    Eigen::MatrixXd follower_block;  // NxN, invertible for rooted graphs
};

/// Throws Error{SingularFollowerBlock} when the follower block fails the
/// scale-aware invertibility test sigma_min > 1e-9 * ||L~||.
LaplacianDecomposition laplacian(const DirectedGraph& g);

bool is_leader_rooted(const DirectedGraph& g);

/// Unique fixed point of the distributed transmitted-vector equation
///
///   w_0 = 0,  w_i = (sum_j w_ij (M (x_i - x_j) + w_j)) / sum_j w_ij,
///
/// for i = 1..N. `states` holds x_0..x_N. Acyclic follower subgraphs are
/// resolved exactly by forward substitution; otherwise Gauss-Seidel sweeps
/// (leader-distance order) run until the estimated distance to the fixed
/// point is below 1e-12 relative to the input scale.
/// Throws Error{NoConvergence} when the sweep cap is exhausted.
std::vector<Eigen::VectorXd> solve_transmitted(const DirectedGraph& g, const Eigen::MatrixXd& m,
                                               const std::vector<Eigen::VectorXd>& states);

/// Sweep cap used by solve_transmitted for cyclic graphs.
int transmitted_iteration_cap(int num_followers, int state_dim) noexcept;

}  // namespace homocon
