#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "hetreg/scale_model.hpp"

using namespace hetreg;
using Catch::Approx;

namespace {

const RealFn zero = [](double) { return 0.0; };

RealFn constant(double c) {
    return [c](double) { return c; };
}

// A general-kind spec with all derivative handles, for finite-difference checks.
ScaleSpec general_spec() {
    return ScaleSpec::general([](double x, double y) { return 0.5 + x * x + std::log1p(y * y); },
                              [](double y) { return 0.3 * y * y + 0.1 * std::sin(y); }, 0.5,
                              ScaleSpec::LocalFn([](double, double y) { return 2.0 * y / (1.0 + y * y); }),
                              ScaleSpec::AggregateFn([](double y) { return 0.6 * y + 0.1 * std::cos(y); }));
}

double g2(const ScaleSpec& spec, double x, const RealFn& S) {
    const double g = eval_scale(spec, x, S);
    return g * g;
}

}  // namespace

TEST_CASE("econometric scale values", "[scale]") {
    CHECK(eval_scale(ScaleSpec::econometric(1, 0, 0, 0), 0.5, [](double x) { return std::sin(x); }) ==
          Approx(1.0).epsilon(1e-14));
    CHECK(eval_scale(ScaleSpec::econometric(1, 1, 1, 0), 0.5, zero) == Approx(std::sqrt(1.5)).epsilon(1e-14));
    for (double x : {0.0, 0.3, 1.0})
        CHECK(eval_scale(ScaleSpec::econometric(1, 0, 0, 1), x, constant(2.0)) == Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("scale spec validation", "[scale]") {
    CHECK_THROWS_AS(ScaleSpec::econometric(0.0), config_error);
    CHECK_THROWS_AS(ScaleSpec::econometric(1.0, -1.0), config_error);
    const auto tiny = ScaleSpec::econometric(1e-12, 0, 0, 0);
    CHECK(tiny.degenerate());
    CHECK_FALSE(ScaleSpec::econometric(1.0).degenerate());
    CHECK_THROWS_AS(ScaleSpec::general(nullptr, [](double) { return 0.0; }, 1.0), config_error);
}

TEST_CASE("varsigma", "[scale]") {
    const auto S = as_function(TrigSeries::from_terms({{2, 0.7}, {5, -0.2}}));
    const double s2 = 0.7 * 0.7 + 0.2 * 0.2;
    const double c0 = 0.8, c1 = 0.6, c2 = 1.3, c3 = 0.4;
    CHECK(varsigma(ScaleSpec::econometric(c0, c1, c2, c3), S) == Approx(c0 + c1 / 2 + (c2 + c3) * s2).epsilon(1e-11));
    CHECK(varsigma(ScaleSpec::econometric(1, 0, 0, 0), S) == Approx(1.0).epsilon(1e-13));
    CHECK(varsigma(ScaleSpec::econometric(1, 1, 0, 0), S) == Approx(1.5).epsilon(1e-13));
}

TEST_CASE("frechet derivative closed forms", "[scale]") {
    const auto spec = ScaleSpec::econometric(1, 0, 1, 1);
    const RealFn f = [](double x) { return 1.0 + x; };
    for (double x : {0.1, 0.5, 0.9}) CHECK(frechet_derivative(spec, x, zero, f) == Approx(0.0).margin(1e-15));
    CHECK(frechet_derivative(ScaleSpec::econometric(1, 0, 1, 0), 0.3, constant(1.0), constant(1.0)) ==
          Approx(2.0).epsilon(1e-14));

    const auto no_derivative = ScaleSpec::general([](double, double) { return 1.0; }, [](double) { return 0.0; }, 1.0);
    CHECK_THROWS_AS(frechet_derivative(no_derivative, 0.5, zero, f), config_error);
}

TEST_CASE("frechet derivative matches central differences", "[scale][property]") {
    const RealFn S = as_function(TrigSeries::from_terms({{1, 0.3}, {2, 0.8}, {7, -0.4}}));
    const RealFn f = as_function(TrigSeries::from_terms({{3, 1.0}, {4, 0.5}}));
    for (const auto& spec : {ScaleSpec::econometric(1.0, 0.5, 1.0, 1.0), general_spec()}) {
        for (double x : {0.13, 0.5, 0.77}) {
            const double exact = frechet_derivative(spec, x, S, f);
            std::vector<double> errors;
            for (double h : {1e-3, 1e-4, 1e-5}) {
                const RealFn plus = [&](double t) { return S(t) + h * f(t); };
                const RealFn minus = [&](double t) { return S(t) - h * f(t); };
                const double fd = (g2(spec, x, plus) - g2(spec, x, minus)) / (2.0 * h);
                errors.push_back(std::abs(fd - exact));
            }
            // second-order agreement, until rounding takes over
            CHECK(errors[0] <= 1e-5);
            CHECK(errors[1] <= 1e-7);
            CHECK(errors[2] <= 1e-7);
            if (errors[0] > 1e-9) CHECK(errors[1] <= errors[0] / 20.0);
        }
    }
}

TEST_CASE("simulate is deterministic and validates n", "[scale]") {
    const auto spec = ScaleSpec::econometric(1, 1, 1, 0);
    const RealFn S = as_function(TrigSeries::from_terms({{2, 0.5}}));
    const auto a = simulate(S, spec, NoiseLaw::gaussian(), 51, 1234);
    const auto b = simulate(S, spec, NoiseLaw::gaussian(), 51, 1234);
    const auto c = simulate(S, spec, NoiseLaw::gaussian(), 51, 1235);
    CHECK(a.y == b.y);
    CHECK(a.y != c.y);
    CHECK(a.sigma.has_value());
    CHECK_THROWS_AS(simulate(S, spec, NoiseLaw::gaussian(), 50, 1), config_error);
    // a tiny variance floor is accepted and flagged
    CHECK_NOTHROW(simulate(S, ScaleSpec::econometric(1e-12), NoiseLaw::uniform(), 11, 3));
}

TEST_CASE("simulated pure noise is centered", "[scale]") {
    const auto spec = ScaleSpec::econometric(1, 0, 0, 0);
    const SimulationPlan plan(zero, spec, 101);
    const double bound = 4.0 / std::sqrt(101.0);
    int inside = 0;
    std::vector<double> y(101);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        plan.draw(NoiseLaw::gaussian(), derive_seed(99, "clt", seed), y);
        double m = 0.0;
        for (double v : y) m += v;
        m /= 101.0;
        if (std::abs(m) <= bound) ++inside;
    }
    // P(|N(0,1)| > 4) is about 6e-5
    CHECK(inside >= 999);
}

TEST_CASE("noise law moments", "[scale][property]") {
    constexpr std::size_t N = 100000;
    struct Expect {
        NoiseLaw law;
        double m4, m8;
    };
    // E xi^8: gaussian 105, uniform on [-sqrt3, sqrt3] 3^4/9, two-point 1
    for (const auto& e : {Expect{NoiseLaw::gaussian(), 3.0, 105.0}, Expect{NoiseLaw::uniform(), 1.8, 9.0},
                          Expect{NoiseLaw::two_point(), 1.0, 1.0}}) {
        CHECK(e.law.fourth_moment() == e.m4);
        Rng rng = make_rng(derive_seed(5, e.law.name()));
        std::vector<double> xi(N);
        e.law.sample(rng, xi);
        double m1 = 0, m2 = 0, m4 = 0;
        for (double v : xi) {
            m1 += v;
            m2 += v * v;
            m4 += v * v * v * v;
        }
        m1 /= N;
        m2 /= N;
        m4 /= N;
        const double dn = static_cast<double>(N);
        CHECK(std::abs(m1) <= 5.0 / std::sqrt(dn));
        CHECK(std::abs(m2 - 1.0) <= 5.0 * std::sqrt((e.m4 - 1.0) / dn) + 1e-12);
        CHECK(std::abs(m4 - e.m4) <= 5.0 * std::sqrt((e.m8 - e.m4 * e.m4) / dn) + 1e-12);
    }
}

TEST_CASE("catalogue membership is exact", "[scale]") {
    const double theta = 0.5;
    for (int k : {1, 2, 3}) {
        double a2 = 0.0;
        for (int i = 0; i <= k; ++i) a2 += std::pow(2.0 * std::numbers::pi, 2 * i);
        const auto single = TrigSeries::from_terms({{2, theta}});
        const double needed = theta * theta * a2;
        CHECK(SobolevClass(k, needed * 1.0000001).contains(single));
        CHECK_FALSE(SobolevClass(k, needed * 0.9999999).contains(single));
        CHECK(single.sobolev_norm(k) == Approx(needed).epsilon(1e-13));
    }
    CHECK(sobolev_weight(1, 3) == 1.0);
    for (int k : {1, 2})
        for (double r : {1e-6, 1.0, 50.0}) {
            const auto cat = test_functions(k, r);
            bool saw_zero = false;
            for (const auto& e : cat) {
                if (e.name == "zero") {
                    saw_zero = true;
                    CHECK(e.member);
                }
                if (e.name.ends_with("@50%")) {
                    CHECK(e.member);
                    CHECK(e.sobolev_norm == Approx(0.5 * r).epsilon(1e-12));
                }
                CHECK(e.member == (e.signal.sobolev_norm(k) <= r));
            }
            CHECK(saw_zero);
        }
    CHECK_THROWS_AS(SobolevClass(0, 1.0), config_error);
    CHECK_THROWS_AS(SobolevClass(1, 0.0), config_error);
}

TEST_CASE("variance floor holds across the catalogue", "[scale][property]") {
    const std::vector<ScaleSpec> specs = {ScaleSpec::econometric(1, 1, 1, 0), ScaleSpec::econometric(0.5, 0, 2, 1),
                                          general_spec()};
    for (const auto& spec : specs)
        for (const auto& e : test_functions(1, 10.0)) {
            const BoundScale bound(spec, as_function(e.signal));
            double lowest = 1e300;
            for (int i = 0; i <= 1000; ++i) lowest = std::min(lowest, bound.g2(i / 1000.0));
            CHECK(lowest >= spec.floor());
        }
}

TEST_CASE("riemann sums of g^2 converge at rate 1/n", "[scale][property]") {
    const auto spec = ScaleSpec::econometric(1, 1, 1, 0);
    for (const auto& e : test_functions(1, 4.0)) {
        const RealFn S = as_function(e.signal);
        const double target = varsigma(spec, S);
        const BoundScale bound(spec, S);
        auto error = [&](std::size_t n) {
            double s = 0.0;
            for (std::size_t j = 1; j <= n; ++j) s += bound.g2(static_cast<double>(j) / static_cast<double>(n));
            return std::abs(s / static_cast<double>(n) - target);
        };
        const double e1 = error(101), e2 = error(201), e3 = error(401);
        CHECK(e1 * 101 <= 1.0);
        CHECK(e1 / e2 == Approx(2.0).margin(0.1));
        CHECK(e2 / e3 == Approx(2.0).margin(0.1));
    }
}
