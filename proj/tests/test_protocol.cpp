#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "homocon/error.hpp"
#include "homocon/protocol.hpp"
#include "oracles.hpp"

using namespace homocon;

namespace {
Mat ref_p() {
    Mat p(2, 2);
    p << 0.0020, 0.0005, 0.0005, 0.0012;
    return p;
}
ProtocolSpec ref_non_overshooting(double mu) {
    CertificateP cert;
    cert.p = ref_p();
    return ProtocolSpec::homogeneous_non_overshooting(DilationGenerator(2, mu), 1.0, cert);
}
ProtocolSpec ref_consensus(double mu) {
    CertificateXY cert;
    cert.x = Mat(2, 2);
    cert.x << 0.8281, -0.3107, -0.3107, 0.9377;
    cert.y = RowVec(2);
    cert.y << 0.7502, 0.5000;
    return ProtocolSpec::homogeneous_consensus(DilationGenerator(2, mu), cert);
}
}  // namespace

TEST_CASE("linear gain examples against the matrix-power oracle") {
    const RowVec k2 = linear_gain(2, 1.0);
    CHECK(k2(0) == 1.0);
    CHECK(k2(1) == 2.0);
    CHECK(linear_gain(1, 3.0)(0) == 3.0);
    const RowVec k3 = linear_gain(3, 1.0);
    CHECK(k3(0) == 1.0);
    CHECK(k3(1) == 3.0);
    CHECK(k3(2) == 3.0);
    for (int n = 1; n <= 6; ++n)
        for (double lambda : {0.5, 1.0, 2.0, 3.7}) {
            const Eigen::RowVectorXd ref = oracle::matrix_power_gain(n, lambda);
            CHECK((linear_gain(n, lambda) - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
        }
    CHECK_THROWS_AS(linear_gain(2, 0.0), Error);
    CHECK_THROWS_AS(linear_gain(0, 1.0), Error);
}

TEST_CASE("closed loop under K_lin has every eigenvalue at -lambda") {
    // A root of multiplicity n is only resolved to ~eps^(1/n) by an
    // eigensolver, so check the equivalent nilpotency (A - B K + lambda I)^n = 0.
    for (int n = 1; n <= 5; ++n)
        for (double lambda : {0.5, 1.0, 2.0}) {
            const IntegratorChain chain(n);
            Mat shifted = chain.a - chain.b * linear_gain(n, lambda);
            shifted.diagonal().array() += lambda;
            Mat power = Mat::Identity(n, n);
            for (int k = 0; k < n; ++k) power = power * shifted;
            CHECK(power.cwiseAbs().maxCoeff() <= 1e-8);
        }
}

TEST_CASE("control is zero at the origin for every kind") {
    CHECK(control_input(ProtocolSpec::linear(2, 1.0), Vec::Zero(2)) == 0.0);
    CHECK(control_input(ref_non_overshooting(-0.2), Vec::Zero(2)) == 0.0);
    CHECK(control_input(ref_non_overshooting(-1.0), Vec::Zero(2)) == 0.0);
    CHECK(control_input(ref_consensus(-0.2), Vec::Zero(2)) == 0.0);
}

TEST_CASE("homogeneous law at mu = 0 is the linear law for any shape") {
    // d(-ln r) = I / r at mu = 0, so r^{1+mu} K d(-ln r) v = K v whatever P is.
    // (X = I admits no Y satisfying the decay condition, so the reference X is used.)
    const auto spec = ref_consensus(0.0);
    const RowVec k = spec.gain();
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 50; ++i) {
        Vec v(2);
        v << normal(rng), normal(rng);
        CHECK(control_input(spec, v) == doctest::Approx(-k.dot(v)).epsilon(1e-12));
    }
}

TEST_CASE("homogeneous control against the composed oracle") {
    const auto spec = ref_non_overshooting(-0.2);
    Vec v(2);
    v << -1.0, 0.0;
    CHECK(control_input(spec, v) == doctest::Approx(2.8172691138478407).epsilon(1e-12));

    // Norm by bisection, then the formula term by term.
    Vec w(2);
    w << 0.3, -2.0;
    const double r = oracle::canonical_norm(ref_p(), -0.2, w);
    const double u = -std::pow(r, 0.8) * (1.0 * std::pow(r, -1.2) * w(0) + 2.0 * std::pow(r, -1.0) * w(1));
    CHECK(control_input(spec, w) == doctest::Approx(u).epsilon(1e-10));
}

TEST_CASE("mu = -1 control is bounded and discontinuous at the origin") {
    const auto spec = ref_non_overshooting(-1.0);
    Vec v(2);
    v << -1.0, 0.5;
    const double u1 = control_input(spec, v);
    const double u2 = control_input(spec, Vec(1e-8 * v));
    CHECK(std::isfinite(u1));
    CHECK(std::abs(u2) > 0.0);
    CHECK(std::abs(u2) < 1e3);
}

TEST_CASE("control is homogeneous of degree 1 + mu") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    for (double mu : {-1.0, -0.5, -0.2}) {
        const auto spec = ref_non_overshooting(mu);
        const auto& gen = spec.norm_context()->generator();
        for (int k = 0; k < 100; ++k) {
            Vec v(2);
            v << normal(rng), normal(rng);
            const double s = 3 * normal(rng);
            const double lhs = control_input(spec, dilate(gen, s, v));
            const double rhs = std::exp((1 + mu) * s) * control_input(spec, v);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
}

TEST_CASE("error field examples") {
    const IntegratorChain chain(2);
    const std::vector<ProtocolSpec> lin = {ProtocolSpec::linear(2, 1.0)};
    Eigen::VectorXd e(2), q = Eigen::VectorXd::Zero(2);
    e << 1.0, 0.0;
    const Eigen::VectorXd f = error_field(chain, lin, e, q);
    CHECK(f(0) == 0.0);
    CHECK(f(1) == -1.0);
    CHECK(error_field(chain, lin, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)).norm() == 0.0);
    CHECK_THROWS_AS(error_field(chain, lin, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), Error);
    const std::vector<ProtocolSpec> two = {lin[0], lin[0]};
    CHECK_THROWS_AS(error_field(chain, two, Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6)), Error);
}

TEST_CASE("closed-loop field is homogeneous of degree mu") {
    const IntegratorChain chain(2);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    for (double mu : {-1.0, -0.5, -0.2}) {
        const std::vector<ProtocolSpec> specs = {ref_consensus(mu)};
        const auto& gen = specs[0].norm_context()->generator();
        for (int k = 0; k < 100; ++k) {
            Vec e(2);
            e << normal(rng), normal(rng);
            const double s = 2 * normal(rng);
            const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
            const Eigen::VectorXd lhs = error_field(chain, specs, Eigen::VectorXd(dilate(gen, s, e)), zero);
            const Eigen::VectorXd base = error_field(chain, specs, Eigen::VectorXd(e), zero);
            const Eigen::VectorXd rhs = std::exp(mu * s) * dilate(gen, s, Vec(base));
            CHECK((lhs - rhs).norm() <= 1e-9 * rhs.norm() + 1e-300);
        }
    }
}

TEST_CASE("protocol factories validate their inputs") {
    CHECK_THROWS_AS(ref_non_overshooting(0.0), Error);
    CHECK_THROWS_AS(ProtocolSpec::homogeneous_non_overshooting(DilationGenerator(2, -1.5), 1.0, CertificateP{}), Error);
    CertificateP bad;
    bad.p = Mat::Identity(2, 2);
    try {
        (void)ProtocolSpec::homogeneous_non_overshooting(DilationGenerator(2, -0.2), 1.0, bad);
        FAIL("expected CertificateMissing");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CertificateMissing);
    }
    CHECK(to_string(ProtocolKind::Linear) == "linear");
    const auto spec = ref_consensus(-0.2);
    CHECK(spec.kind() == ProtocolKind::HomogeneousConsensus);
    CHECK(spec.gain()(0) == doctest::Approx(1.2630).epsilon(1e-3));
}
