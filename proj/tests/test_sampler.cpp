#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "obliq/fock.hpp"
#include "obliq/sampler.hpp"
#include "test_util.hpp"

using namespace obliq;
using Catch::Approx;

TEST_CASE("sample_gaussian determinism") {
    const OutcomeBatch b1 = sample_gaussian(vacuum(), MetricTensor::identity(), 500, 42);
    const OutcomeBatch b2 = sample_gaussian(vacuum(), MetricTensor::identity(), 500, 42);
    REQUIRE(b1.samples == b2.samples);  // bit-identical
    const OutcomeBatch b3 = sample_gaussian(vacuum(), MetricTensor::identity(), 500, 43);
    REQUIRE(b1.samples != b3.samples);
    CHECK(b1.count() == 500);

    const OutcomeBatch one = sample_gaussian(vacuum(), MetricTensor::identity(), 1, 7);
    const OutcomeBatch one2 = sample_gaussian(vacuum(), MetricTensor::identity(), 1, 7);
    CHECK(one.samples[0] == one2.samples[0]);
}

TEST_CASE("sample_gaussian follows the closed-form law") {
    const int n = 100000;
    SECTION("vacuum under the identity metric has unit covariance") {
        const OutcomeBatch b = sample_gaussian(vacuum(), MetricTensor::identity(), n, 1234);
        const SampleStats s = outcome_stats(b);
        const double se_var = 3.0 * std::sqrt(2.0 / n);   // var(s^2) ~ 2 sigma^4 / n
        const double se_cov = 3.0 * std::sqrt(1.0 / n);
        CHECK(std::abs(s.cov_xx - 1.0) < se_var);
        CHECK(std::abs(s.cov_pp - 1.0) < se_var);
        CHECK(std::abs(s.cov_xp) < se_cov);
        CHECK(std::abs(s.mean_x) < 3.0 / std::sqrt(double(n)));
        CHECK(std::abs(s.mean_p) < 3.0 / std::sqrt(double(n)));
    }
    SECTION("displaced state recovers its mean") {
        const GaussianState st(1.5, -0.75, 0.5, 0.0, 0.5);
        const OutcomeBatch b = sample_gaussian(st, MetricTensor::identity(), n, 77);
        const SampleStats s = outcome_stats(b);
        CHECK(std::abs(s.mean_x - 1.5) < 3.0 * std::sqrt(1.0 / n));
        CHECK(std::abs(s.mean_p + 0.75) < 3.0 * std::sqrt(1.0 / n));
    }
    SECTION("anisotropic metric shapes the outcome covariance") {
        const MetricTensor g = metric_of(matrix_from_params({0.0, 0.0, 1.5}));
        const OutcomeBatch b = sample_gaussian(vacuum(), g, n, 911);
        const SampleStats s = outcome_stats(b);
        const GaussianState law = husimi_gaussian_closed(vacuum(), g);
        CHECK(std::abs(s.cov_xx - law.cov_xx) < 3.0 * law.cov_xx * std::sqrt(2.0 / n));
        CHECK(std::abs(s.cov_pp - law.cov_pp) < 3.0 * law.cov_pp * std::sqrt(2.0 / n));
    }
    CHECK_THROWS_AS(sample_gaussian(vacuum(), MetricTensor::identity(), 0, 1),
                    std::invalid_argument);
}

TEST_CASE("balanced accuracy law on samples") {
    // in M-coordinates the outcome covariance is the state covariance + I/2
    const int n = 100000;
    testutil::Rng rng(113);
    const Sl2Matrix m = matrix_from_params({0.5, 0.12, 1.3});
    const GaussianState st(0.2, -0.4, 0.65, 0.1, 0.45);
    const OutcomeBatch b = sample_gaussian(st, metric_of(m), n, 555);
    // push samples into M-coordinates
    double sxx = 0, sxp = 0, spp = 0, mx = 0, mp = 0;
    std::vector<std::array<double, 2>> mapped(b.samples.size());
    for (size_t i = 0; i < b.samples.size(); ++i) {
        double xm, pm;
        m.apply(b.samples[i][0], b.samples[i][1], xm, pm);
        mapped[i] = {xm, pm};
        mx += xm;
        mp += pm;
    }
    mx /= n;
    mp /= n;
    for (const auto& s : mapped) {
        sxx += (s[0] - mx) * (s[0] - mx);
        sxp += (s[0] - mx) * (s[1] - mp);
        spp += (s[1] - mp) * (s[1] - mp);
    }
    sxx /= n - 1;
    sxp /= n - 1;
    spp /= n - 1;
    // state covariance in M-coordinates
    const double cxx = m.m11 * (m.m11 * st.cov_xx + m.m12 * st.cov_xp) +
                       m.m12 * (m.m11 * st.cov_xp + m.m12 * st.cov_pp);
    const double cpp = m.m21 * (m.m21 * st.cov_xx + m.m22 * st.cov_xp) +
                       m.m22 * (m.m21 * st.cov_xp + m.m22 * st.cov_pp);
    CHECK(std::abs(sxx - (cxx + 0.5)) < 3.0 * (cxx + 0.5) * std::sqrt(2.0 / n));
    CHECK(std::abs(spp - (cpp + 0.5)) < 3.0 * (cpp + 0.5) * std::sqrt(2.0 / n));
    (void)sxp;
}

TEST_CASE("sample_fock") {
    SECTION("vacuum density matches the Gaussian sampler statistically") {
        const int n = 30000;
        const OutcomeBatch bf =
            sample_fock(fock_number_density(0, 24), Sl2Matrix::identity(), n, 2024);
        const OutcomeBatch bg = sample_gaussian(vacuum(), MetricTensor::identity(), n, 4048);
        const SampleStats sf = outcome_stats(bf);
        const SampleStats sg = outcome_stats(bg);
        const double band = 3.0 * std::sqrt(2.0 / n) * std::sqrt(2.0);  // two-sample
        CHECK(std::abs(sf.cov_xx - sg.cov_xx) < band);
        CHECK(std::abs(sf.cov_pp - sg.cov_pp) < band);
        CHECK(std::abs(sf.cov_xp - sg.cov_xp) < band);
        CHECK(std::abs(sf.mean_x - sg.mean_x) < 3.0 * std::sqrt(2.0 / n));
    }
    SECTION("single photon: empty core and the right radial shape") {
        const int n = 30000;
        const OutcomeBatch b =
            sample_fock(fock_number_density(1, 24), Sl2Matrix::identity(), n, 31337);
        // radial density g(r) = (r^3/2) e^{-r^2/2}; origin bin nearly empty
        int core = 0;
        std::array<int, 6> bins{};  // edges at 0, 0.6, 1.2, ..., 3.6
        for (const auto& s : b.samples) {
            const double r = std::hypot(s[0], s[1]);
            if (r < 0.15) ++core;
            const int k = static_cast<int>(r / 0.6);
            if (k < 6) ++bins[k];
        }
        const auto mass = [](double r0, double r1) {
            // int (r^3/2) e^{-r^2/2} dr = -(r^2/2 + 1) e^{-r^2/2}
            const auto F = [](double r) { return -(0.5 * r * r + 1.0) * std::exp(-0.5 * r * r); };
            return F(r1) - F(r0);
        };
        const double core_expect = n * mass(0.0, 0.15);
        CHECK(core <= core_expect + 5.0 * std::sqrt(core_expect + 1.0));
        for (int k = 0; k < 6; ++k) {
            const double expect = n * mass(0.6 * k, 0.6 * (k + 1));
            REQUIRE(std::abs(bins[k] - expect) < 5.0 * std::sqrt(expect + 1.0));
        }
    }
    SECTION("deterministic under a fixed seed") {
        const OutcomeBatch b1 =
            sample_fock(fock_number_density(1, 16), Sl2Matrix::identity(), 200, 5);
        const OutcomeBatch b2 =
            sample_fock(fock_number_density(1, 16), Sl2Matrix::identity(), 200, 5);
        REQUIRE(b1.samples == b2.samples);
    }
    SECTION("equivalent matrices draw from the same law") {
        const int n = 20000;
        const Sl2Matrix m = matrix_from_params({0.4, 0.15, 1.2});
        const Sl2Matrix m2 = Sl2Matrix::rotation(1.1) * m;
        const OutcomeBatch b1 = sample_fock(fock_number_density(0, 24), m, n, 61);
        const OutcomeBatch b2 = sample_fock(fock_number_density(0, 24), m2, n, 62);
        const SampleStats s1 = outcome_stats(b1);
        const SampleStats s2 = outcome_stats(b2);
        const double band = 5.0 * std::sqrt(2.0 / n) * 2.0;
        CHECK(std::abs(s1.cov_xx - s2.cov_xx) < band);
        CHECK(std::abs(s1.cov_pp - s2.cov_pp) < band);
        CHECK(std::abs(s1.cov_xp - s2.cov_xp) < band);
    }
}

TEST_CASE("outcome_stats") {
    SECTION("two symmetric points") {
        OutcomeBatch b{{{1.0, 0.0}, {-1.0, 0.0}}, MetricTensor::identity(), 0};
        const SampleStats s = outcome_stats(b);
        CHECK(s.mean_x == Approx(0.0));
        CHECK(s.mean_p == Approx(0.0));
        CHECK(s.cov_xx == Approx(2.0));  // unbiased: (1 + 1)/(2 - 1)
        CHECK(s.cov_pp == Approx(0.0));
        CHECK(s.cov_xp == Approx(0.0));
    }
    SECTION("single point is an error") {
        OutcomeBatch b{{{1.0, 2.0}}, MetricTensor::identity(), 0};
        CHECK_THROWS_AS(outcome_stats(b), std::invalid_argument);
    }
}

TEST_CASE("outcome batch CSV") {
    OutcomeBatch b{{{0.25, -1.5}, {3.0, 0.125}}, MetricTensor(2.0, 1.0, 1.0), 99};
    std::stringstream ss;
    b.write_csv(ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "# 99 2 2 1 1");
    double x, p;
    ss >> x >> p;
    CHECK(x == 0.25);
    CHECK(p == -1.5);
    ss >> x >> p;
    CHECK(x == 3.0);
    CHECK(p == 0.125);
}
