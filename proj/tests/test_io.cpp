#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "obliq/json_io.hpp"
#include "test_util.hpp"

using namespace obliq;
using nlohmann::json;
using Catch::Approx;

TEST_CASE("JSON round trips preserve every field") {
    testutil::Rng rng(3);

    SECTION("CanonicalParams") {
        for (int i = 0; i < 20; ++i) {
            const CanonicalParams p = testutil::random_params(rng);
            const auto q = json(p).get<CanonicalParams>();
            REQUIRE(q.theta == p.theta);
            REQUIRE(q.phi == p.phi);
            REQUIRE(q.lambda == p.lambda);
        }
    }
    SECTION("Sl2Matrix") {
        for (int i = 0; i < 20; ++i) {
            const Sl2Matrix m = testutil::random_matrix(rng);
            const auto n = json(m).get<Sl2Matrix>();
            REQUIRE(n.m11 == m.m11);
            REQUIRE(n.m12 == m.m12);
            REQUIRE(n.m21 == m.m21);
            REQUIRE(n.m22 == m.m22);
        }
    }
    SECTION("MetricTensor") {
        const MetricTensor g = metric_of(testutil::random_matrix(rng));
        const auto h = json(g).get<MetricTensor>();
        REQUIRE(h.a == g.a);
        REQUIRE(h.b == g.b);
        REQUIRE(h.c == g.c);
    }
    SECTION("GaussianState") {
        const GaussianState s(0.5, -1.25, 0.75, 0.1, 0.5);
        const auto t = json(s).get<GaussianState>();
        REQUIRE(t.mean_x == s.mean_x);
        REQUIRE(t.cov_xp == s.cov_xp);
        REQUIRE(t.cov_pp == s.cov_pp);
    }
}

TEST_CASE("JSON field names follow the interface") {
    const json jp = json(CanonicalParams(0.25, 0.125, 2.0));
    CHECK(jp.at("theta") == 0.25);
    CHECK(jp.at("phi") == 0.125);
    CHECK(jp.at("lambda") == 2.0);

    const json jm = json(Sl2Matrix::resolution(2.0));
    CHECK(jm.at("m").at(0).at(0) == 0.5);
    CHECK(jm.at("m").at(1).at(1) == 2.0);

    const json jg = json(MetricTensor(4.0, 0.25, 0.0));
    CHECK(jg.at("a") == 4.0);
    CHECK(jg.at("b") == 0.25);
    CHECK(jg.at("c") == 0.0);
}

TEST_CASE("Fock JSON uses interleaved real/imag arrays") {
    SECTION("vector round trip") {
        const FockVector v = squeezed_state(MetricTensor::identity(), 1.0, -0.5, 24);
        const json j = json(v);
        CHECK(j.at("dim") == 24);
        CHECK(j.at("coeffs").size() == 48);
        const auto w = j.get<FockVector>();
        REQUIRE((w.coeffs - v.coeffs).norm() == 0.0);
    }
    SECTION("density round trip") {
        const FockDensity rho =
            FockDensity::pure(squeezed_state(MetricTensor::identity(), 0.5, 0.5, 12));
        const json j = json(rho);
        CHECK(j.at("dim") == 12);
        CHECK(j.at("matrix").size() == 2 * 12 * 12);
        const auto sigma = j.get<FockDensity>();
        REQUIRE((sigma.rho - rho.rho).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("dimension mismatch is rejected") {
        json j = {{"dim", 3}, {"coeffs", {1.0, 0.0}}};
        CHECK_THROWS_AS(j.get<FockVector>(), std::invalid_argument);
    }
}

TEST_CASE("deserialization enforces the type invariants") {
    json bad_params = {{"theta", 0.0}, {"phi", 1.0}, {"lambda", 1.0}};
    CHECK_THROWS_AS(bad_params.get<CanonicalParams>(), std::invalid_argument);

    json bad_matrix = {{"m", {{1.0, 0.0}, {0.0, 2.0}}}};
    CHECK_THROWS_AS(bad_matrix.get<Sl2Matrix>(), std::invalid_argument);

    json bad_metric = {{"a", 1.0}, {"b", 1.0}, {"c", 0.7}};
    CHECK_THROWS_AS(bad_metric.get<MetricTensor>(), std::invalid_argument);
}

TEST_CASE("husimi sidecar carries metric, method, and diagnostics") {
    PhaseSpaceGrid layout(-6.0, 6.0, 61, -6.0, 6.0, 61);
    const HusimiResult r = husimi_closed_grid(vacuum(), MetricTensor::identity(), layout);
    const json j = husimi_sidecar(r);
    CHECK(j.at("method") == "closed_form");
    CHECK(j.at("metric").at("a") == 1.0);
    CHECK(j.at("integral").get<double>() == Approx(1.0).margin(1e-3));
    CHECK(j.at("min_value").get<double>() >= 0.0);
}
