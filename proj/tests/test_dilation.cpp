#include <doctest.h>

#include <cmath>
#include <random>

#include "homocon/dilation.hpp"
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
}  // namespace

TEST_CASE("generator weights and validity range") {
    const DilationGenerator g(2, -0.2);
    CHECK(g.weights()(0) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(g.weights()(1) == 1.0);
    const DilationGenerator g4(4, -1.0);
    CHECK(g4.weights()(0) == 4.0);
    CHECK(g4.weights()(3) == 1.0);
    CHECK_THROWS_AS(DilationGenerator(3, 0.5), Error);
    CHECK_THROWS_AS(DilationGenerator(0, 0.0), Error);
    CHECK_NOTHROW(DilationGenerator(1, 5.0));
}

TEST_CASE("dilation matrix examples and group property") {
    const DilationGenerator g(2, -0.2);
    CHECK((dilation_matrix(g, 0.0) - Mat::Identity(2, 2)).norm() == 0.0);
    const Mat d1 = dilation_matrix(g, 1.0);
    CHECK(d1(0, 0) == doctest::Approx(std::exp(1.2)).epsilon(1e-15));
    CHECK(d1(1, 1) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(d1(0, 1) == 0.0);
    const Mat prod = dilation_matrix(g, 2.0) * dilation_matrix(g, 3.0);
    const Mat d5 = dilation_matrix(g, 5.0);
    CHECK(((prod - d5).array() / d5.array().max(1e-300)).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("dilate stays finite for extreme arguments") {
    const DilationGenerator g(2, -1.0);
    Vec x(2);
    x << 1e-200, 1e-150;
    const Vec y = dilate(g, 300.0, x);
    CHECK(y.allFinite());
    CHECK(y(1) == doctest::Approx(1e-150 * std::exp(300.0)).epsilon(1e-12));
}

TEST_CASE("generator relations vanish for the integrator chain") {
    for (auto [n, mu] : {std::pair{2, -0.2}, std::pair{4, 0.3}, std::pair{2, 0.0}, std::pair{3, -1.0}}) {
        const IntegratorChain chain(n);
        const auto r = check_generator_relations(DilationGenerator(n, mu), chain.a, chain.b);
        CHECK(r.commutation <= 1e-12);
        CHECK(r.input <= 1e-12);
    }
    const DilationGenerator lin(2, 0.0);
    CHECK((lin.matrix() - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("norm context rejects bad shape matrices") {
    const DilationGenerator g(2, -0.2);
    CHECK_THROWS_AS(HomogeneousNormContext(g, Mat(-Mat::Identity(2, 2))), Error);
    Mat asym(2, 2);
    asym << 1, 0.1, 0, 1;
    CHECK_THROWS_AS(HomogeneousNormContext(g, asym), Error);
    // Positive definite, but P G + G P is not: strong coupling with unequal weights.
    const DilationGenerator steep(2, -1.0);
    Mat skew(2, 2);
    skew << 1.0, 0.999, 0.999, 1.0;
    CHECK_THROWS_AS(HomogeneousNormContext(steep, skew), Error);
}

TEST_CASE("canonical norm examples") {
    const DilationGenerator g(2, -0.2);
    const HomogeneousNormContext eye(g, Mat::Identity(2, 2));
    Vec x(2);
    x << 2, 0;
    CHECK(canonical_norm(eye, x) == doctest::Approx(1.7817974362806786).epsilon(1e-12));
    CHECK(canonical_norm(eye, x) == doctest::Approx(oracle::canonical_norm(Mat::Identity(2, 2), -0.2, x)).epsilon(1e-12));

    const HomogeneousNormContext shaped(g, ref_p());
    Vec unit(2);
    unit << 1.0, 2.0;
    unit /= std::sqrt(unit.dot(ref_p() * unit));
    CHECK(canonical_norm(shaped, unit) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(canonical_norm(shaped, Vec::Zero(2)) == 0.0);
    Vec tiny(2);
    tiny << 1e-310, 0;
    CHECK(canonical_norm(shaped, tiny) == 0.0);
}

TEST_CASE("canonical norm hits the unit sphere of the shape norm") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (double mu : {-1.0, -0.5, -0.2, 0.3}) {
        const int n = mu > 0 ? 3 : 4;
        const DilationGenerator g(n, mu);
        Mat p;
        do {
            p = oracle::random_spd(rng, n, 0.2, 3.0);
        } while (oracle::lambda_min(p * g.matrix() + g.matrix() * p) <= 1e-3);
        const HomogeneousNormContext ctx(g, p);
        for (int k = 0; k < 200; ++k) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x(i) = normal(rng) * std::exp(3 * normal(rng));
            const double r = canonical_norm(ctx, x);
            const Vec y = dilate(g, -std::log(r), x);
            CHECK(std::sqrt(y.dot(p * y)) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(r == doctest::Approx(oracle::canonical_norm(p, mu, x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("norm gradient reduces to the Euclidean gradient at mu = 0") {
    const HomogeneousNormContext ctx(DilationGenerator(2, 0.0), Mat::Identity(2, 2));
    Vec x(2);
    x << 3.0, -4.0;
    const RowVec grad = norm_gradient(ctx, x);
    CHECK(grad(0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(grad(1) == doctest::Approx(-0.8).epsilon(1e-12));
    try {
        (void)norm_gradient(ctx, Vec::Zero(2));
        FAIL("expected OriginNotDifferentiable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OriginNotDifferentiable);
    }
}

TEST_CASE("norm gradient transforms under dilation") {
    const DilationGenerator g(3, -0.4);
    Mat p(3, 3);
    p << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    const HomogeneousNormContext ctx(g, p);
    Vec x(3);
    x << 0.7, -1.1, 0.4;
    for (double s : {-2.0, -0.5, 0.7, 2.5}) {
        const RowVec lhs = norm_gradient(ctx, dilate(g, s, x));
        const RowVec rhs = std::exp(s) * norm_gradient(ctx, x) * dilation_matrix(g, -s);
        CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }
}
