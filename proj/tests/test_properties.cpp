#include <doctest.h>

#include <cmath>
#include <random>

#include "homocon/cone.hpp"
#include "homocon/lmi.hpp"
#include "homocon/protocol.hpp"
#include "homocon/simulation.hpp"
#include "oracles.hpp"

using namespace homocon;

namespace {

Mat ref_p() {
    Mat p(2, 2);
    p << 0.0020, 0.0005, 0.0005, 0.0012;
    return p;
}
Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
DirectedGraph mrs_graph() { return DirectedGraph::from_edges(3, {{1, 0, 1}, {2, 1, 1}, {3, 2, 1}, {2, 3, 1}}); }

ProtocolSpec non_overshooting(double mu) {
    CertificateP cert;
    cert.p = ref_p();
    return ProtocolSpec::homogeneous_non_overshooting(DilationGenerator(2, mu), 1.0, cert);
}

}  // namespace

TEST_CASE("canonical norm vanishes only at the origin and is continuous there") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal;
    for (double mu : {-1.0, -0.5, -0.2}) {
        const HomogeneousNormContext ctx(DilationGenerator(2, mu), ref_p());
        for (int k = 0; k < 100; ++k) {
            Vec x = v2(normal(rng), normal(rng));
            CHECK(canonical_norm(ctx, x) > 0.0);
            double last = canonical_norm(ctx, x);
            for (int j = 0; j < 12; ++j) {
                x *= 0.1;
                const double r = canonical_norm(ctx, x);
                CHECK(r < last);
                last = r;
            }
            CHECK(last < 1e-2);
        }
    }
}

TEST_CASE("P certificates are scale covariant") {
    const IntegratorChain chain(2);
    const RowVec k = linear_gain(2, 1.0);
    for (double mu : {-1.0, -0.5, -0.2}) {
        const DilationGenerator gen(2, mu);
        for (double c : {1e-3, 0.5, 7.0, 1e4}) {
            CHECK(verify_lmi_P(Mat(c * ref_p()), gen, chain.a, chain.b, k).feasible);
            CHECK_FALSE(verify_lmi_P(Mat(-c * ref_p()), gen, chain.a, chain.b, k).feasible);
        }
        Mat shear(2, 2);
        shear << 1.0, 0.999, 0.999, 1.0;
        for (double c : {1e-3, 1.0, 1e3})
            CHECK(verify_lmi_P(Mat(c * shear), gen, chain.a, chain.b, k).feasible ==
                  verify_lmi_P(shear, gen, chain.a, chain.b, k).feasible);
    }
}

TEST_CASE("linear barrier obeys its own linear dynamics along implicit Euler steps") {
    // One implicit step gives phi+ - phi = dt (A - lambda I) phi+ exactly.
    for (double lambda : {0.5, 1.0, 2.0}) {
        const auto g = DirectedGraph::from_edges(1, {{1, 0, 1}});
        ScenarioConfig cfg{g, 2, {}, std::nullopt, 0.01, 3.0, Integrator::ImplicitEuler};
        cfg.axes.push_back({"x", ProtocolSpec::linear(2, lambda), {v2(0, 1), v2(-2, 0.5)}, std::nullopt, std::nullopt});
        const auto traj = simulate(cfg);
        const ConeSpec cone(2, lambda);
        Mat shifted = IntegratorChain(2).a;
        shifted.diagonal().array() -= lambda;
        for (std::size_t k = 0; k + 1 < traj.num_samples(); ++k) {
            const Vec phi = linear_barrier(cone, traj.error(0, k, 1));
            const Vec next = linear_barrier(cone, traj.error(0, k + 1, 1));
            CHECK((next - phi - 0.01 * shifted * next).norm() <= 1e-12 * (1 + phi.norm()));
            CHECK(next.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("nominal homogeneous runs decrease the norm strictly") {
    for (double mu : {-1.0, -0.5, -0.2}) {
        CAPTURE(mu);
        ScenarioConfig cfg{mrs_graph(), 2, {}, std::nullopt, 1e-3, 12.0, Integrator::ImplicitEuler};
        cfg.axes.push_back(
            {"x", non_overshooting(mu), {v2(0, 1), v2(-3, 1), v2(-5, 0.5), v2(-7, 2)}, std::nullopt, std::nullopt});
        const auto traj = simulate(cfg);
        for (int i = 1; i <= 3; ++i)
            for (std::size_t k = 0; k + 1 < traj.num_samples(); ++k) {
                const double now = traj.hnorm(0, k, i);
                if (now == 0.0) break;
                const double next = traj.hnorm(0, k + 1, i);
                if (!(next < now)) {
                    CHECK(next < now);
                    break;
                }
            }
    }
}

TEST_CASE("finite-time designs reach the origin and stay there") {
    ScenarioConfig cfg{mrs_graph(), 2, {}, std::nullopt, 1e-3, 20.0, Integrator::ImplicitEuler};
    cfg.axes.push_back({"x", non_overshooting(-1.0), {v2(0, 1), v2(-3, 1), v2(-5, 0.5), v2(-7, 2)}, std::nullopt,
                        std::nullopt});
    const auto traj = simulate(cfg);
    const auto last = traj.num_samples() - 1;
    for (int i = 1; i <= 3; ++i) CHECK(traj.error(0, last, i).norm() == 0.0);
    const auto t = settling_time(traj, 1e-9);
    REQUIRE(t);
    CHECK(*t < 20.0);
}

TEST_CASE("bounded disturbances keep the mu = -0.5 error bounded") {
    ScenarioConfig cfg{mrs_graph(), 2, {}, DisturbanceSpec{{{0.03, 0.43, 0.53, 0.44}}, 5}, 1e-3, 20.0,
                       Integrator::ImplicitEuler};
    cfg.axes.push_back({"x", non_overshooting(-0.5), {v2(0, 1), v2(-3, 1), v2(-5, 0.5), v2(-7, 2)}, std::nullopt,
                        std::nullopt});
    const auto traj = simulate(cfg);
    double sup = 0.0, tail = 0.0;
    for (std::size_t k = 0; k < traj.num_samples(); ++k)
        for (int i = 1; i <= 3; ++i) {
            const double n = traj.error(0, k, i).norm();
            sup = std::max(sup, n);
            if (traj.times()[k] >= 15.0) tail = std::max(tail, n);
        }
    CHECK(std::isfinite(sup));
    CHECK(sup <= 2 * v2(-7, 1).norm());
    CHECK(tail < 1.0);
}

TEST_CASE("consensus design tolerates heterogeneous weights") {
    // Weighted graphs are exposed without a theorem claim; check the
    // transmitted-vector scheme still yields per-follower convergence.
    const auto g = DirectedGraph::from_edges(3, {{1, 0, 2.5}, {2, 1, 0.3}, {2, 0, 0.1}, {3, 2, 4.0}, {2, 3, 0.7}});
    CertificateXY cert;
    cert.x = Mat(2, 2);
    cert.x << 0.8281, -0.3107, -0.3107, 0.9377;
    cert.y = RowVec(2);
    cert.y << 0.7502, 0.5000;
    ScenarioConfig cfg{g, 2, {}, std::nullopt, 1e-3, 20.0, Integrator::ImplicitEuler};
    cfg.axes.push_back({"y", ProtocolSpec::homogeneous_consensus(DilationGenerator(2, -0.2), cert),
                        {v2(0, 1), v2(2, 1), v2(-2, 1), v2(4, 1)}, std::nullopt, std::nullopt});
    const auto traj = simulate(cfg);
    CHECK(settling_time(traj, 1e-3));
}
