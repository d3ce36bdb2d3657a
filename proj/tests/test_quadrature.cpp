#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "hetreg/quadrature.hpp"

using namespace hetreg;
using Catch::Approx;

TEST_CASE("gauss-legendre rules integrate polynomials exactly", "[quadrature]") {
    const auto& r8 = GaussLegendre<8>::get();
    double wsum = 0.0;
    for (double w : r8.weights) wsum += w;
    CHECK(wsum == Approx(2.0).epsilon(1e-14));
    // degree 15 is exact for 8 nodes
    CHECK(r8.integrate([](double x) { return std::pow(x, 14); }, -1.0, 1.0) == Approx(2.0 / 15.0).epsilon(1e-13));
    const auto& r16 = GaussLegendre<16>::get();
    CHECK(r16.integrate([](double x) { return std::pow(x, 30); }, -1.0, 1.0) == Approx(2.0 / 31.0).epsilon(1e-12));
}

TEST_CASE("integrate_01 closed forms", "[quadrature]") {
    CHECK(integrate_01([](double) { return 1.0; }) == Approx(1.0).epsilon(1e-14));
    CHECK(integrate_01([](double x) { return x; }) == Approx(0.5).epsilon(1e-14));
    const double s = integrate_01([](double x) {
        const double v = std::sin(2.0 * std::numbers::pi * x);
        return v * v;
    });
    CHECK(std::abs(s - 0.5) <= 1e-12);
    // cancels to zero: convergence is judged against the integral of |f|
    CHECK(std::abs(integrate_01([](double x) { return std::sin(2.0 * std::numbers::pi * x); })) <= 1e-14);
}

TEST_CASE("integrate_01 rejects non-finite integrands", "[quadrature]") {
    CHECK_THROWS_AS(integrate_01([](double) { return std::numeric_limits<double>::quiet_NaN(); }), numeric_error);
    CHECK_THROWS_AS(integrate_01([](double x) { return 1.0 / (x - x); }), numeric_error);
}

TEST_CASE("non-convergence is reported", "[quadrature]") {
    QuadratureOptions opts;
    opts.max_doublings = 2;
    opts.rel_tol = 1e-15;
    // x^{-1/2} has an integrable singularity at 0: composite GL converges slowly
    CHECK_THROWS_WITH(integrate_01([](double x) { return 1.0 / std::sqrt(x); }, opts),
                      Catch::Matchers::ContainsSubstring("did not converge"));
}

TEMPLATE_TEST_CASE_SIG("Gauss-Hermite gaussian moments", "[quadrature]", ((std::size_t O), O), 40, 100) {
    const auto& rule = GaussHermite<O>::get();
    double w = 0.0;
    for (double v : rule.weights) w += v;
    CHECK(w == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    for (double t : {0.3, 1.0, 2.5}) {
        CHECK(rule.expect([](double) { return 1.0; }, t) == Approx(1.0).epsilon(1e-13));
        CHECK(rule.expect([](double z) { return z * z; }, t) == Approx(t * t).epsilon(1e-12));
        CHECK(rule.expect([](double z) { return z * z * z * z; }, t) == Approx(3 * t * t * t * t).epsilon(1e-12));
        CHECK(std::abs(rule.expect([](double z) { return z * z * z; }, t)) <= 1e-12);
        // E cos(z) = exp(-t^2/2)
        CHECK(rule.expect([](double z) { return std::cos(z); }, t) == Approx(std::exp(-0.5 * t * t)).epsilon(1e-12));
    }
}
