#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "hetreg/risk_lab.hpp"

using namespace hetreg;
using Catch::Approx;

namespace {

// Exact fixed-weight risk with direct basis calls and direct scale evaluation.
double direct_exact_risk(const std::vector<double>& lambda, const TrigSeries& S, const ScaleSpec& spec, std::size_t n) {
    const auto Sf = as_function(S);
    std::vector<double> s2(n);
    for (std::size_t l = 1; l <= n; ++l) {
        const double g = eval_scale(spec, static_cast<double>(l) / n, Sf);
        s2[l - 1] = g * g;
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        double th = 0.0, vs = 0.0;
        for (std::size_t l = 1; l <= n; ++l) {
            const double x = static_cast<double>(l) / n;
            th += S(x) * phi(j, x);
            vs += s2[l - 1] * phi(j, x) * phi(j, x);
        }
        th /= n;
        vs /= n;
        const double lj = lambda[j - 1];
        total += (1 - lj) * (1 - lj) * th * th + lj * lj * vs / n;
    }
    return total;
}

const TrigSeries wave = TrigSeries::from_terms({{2, 0.6}, {3, -0.3}, {6, 0.2}, {9, 0.05}});

}  // namespace

TEST_CASE("exact risk agrees with a direct computation", "[risk]") {
    const std::size_t n = 21;
    const auto spec = ScaleSpec::econometric(0.7, 1.0, 1.0, 0.5);
    const TruthModel m("wave", wave, spec, n);
    for (const auto& w : {WeightVector::constant(n, 1.0), WeightVector::constant(n, 0.0), weights_from_omega(2, 7.3, 0.3, n),
                          weights_from_omega(1, 40.0, 0.1, n)})
        CHECK(exact_risk(w, m) == Approx(direct_exact_risk(w.lambda, wave, spec, n)).epsilon(1e-12));
    CHECK_THROWS_AS(exact_risk(WeightVector::constant(5, 1.0), m), dimension_error);
}

TEST_CASE("fixed-weight Monte Carlo risk matches the exact risk", "[risk]") {
    const std::size_t n = 101;
    const TruthModel m("wave", wave, ScaleSpec::econometric(1, 1, 1, 0), n);
    const auto grid = build_grid(n);
    for (std::size_t pos : {std::size_t{0}, grid.size() / 2, grid.size() - 1}) {
        const auto est = mc_risk(m, NoiseLaw::gaussian(), Estimator::fixed(grid[pos]), 2000, 31 + pos);
        CHECK(std::abs(est.R - exact_risk(grid[pos], m)) <= 3.0 * est.R_se);
        CHECK(est.identity_gap <= 1e-9);
        CHECK(est.u1_violations == 0);
    }
    CHECK_THROWS_AS(mc_risk(m, NoiseLaw::gaussian(), Estimator::adaptive(), 1, 1), config_error);
    CHECK_THROWS_AS(mc_risk(m, NoiseLaw::gaussian(), Estimator{EstimatorKind::fixed, std::nullopt}, 5, 1), config_error);
}

TEST_CASE("zero estimator risk is the signal norm", "[risk]") {
    const std::size_t n = 51;
    const TruthModel m("wave", wave, ScaleSpec::econometric(1.0), n);
    const auto est = mc_risk(m, NoiseLaw::uniform(), Estimator::zero(), 3, 1);
    double norm = 0.0;
    for (double v : m.plan().s_values) norm += v * v;
    CHECK(est.R == Approx(norm / n).epsilon(1e-12));
    CHECK(est.R_se == 0.0);
    CHECK(est.T == Approx(wave.l2_norm_sq()).epsilon(1e-10));
}

TEST_CASE("near-noiseless adaptive risk is negligible", "[risk]") {
    const std::size_t n = 10001;
    const auto spec = ScaleSpec::econometric(1e-12);
    for (const auto& e : test_functions(1, 1.0)) {
        if (e.signal.size() > 3) continue;  // modes inside the widest plateau of the grid
        const TruthModel m(e.name, e.signal, spec, n);
        const auto est = mc_risk(m, NoiseLaw::gaussian(), Estimator::adaptive(), 2, 5);
        CHECK(est.R <= 1e-6);
    }
}

TEST_CASE("per-replication identities", "[risk][property]") {
    for (std::size_t n : {11u, 101u, 301u}) {
        const TruthModel m("wave", wave, ScaleSpec::econometric(0.5, 1, 2, 1), n);
        for (const auto& law : NoiseLaw::catalogue()) {
            const auto est = mc_risk(m, law, Estimator::adaptive(), 40, n);
            CHECK(est.identity_gap <= 1e-9);
            CHECK(est.u1_violations == 0);
            CHECK(est.R >= 0.0);
            CHECK(est.T >= 0.0);
        }
    }
}

TEST_CASE("risk report sup", "[risk]") {
    const TruthModel m("wave", wave, ScaleSpec::econometric(1, 1, 1, 0), 101);
    const auto rep = risk_report(m, Estimator::adaptive(), NoiseLaw::catalogue(), 50, 3);
    REQUIRE(rep.per_law.size() == 3);
    for (const auto& e : rep.per_law) CHECK(rep.sup().R >= e.R);
    CHECK(rep.sup().R >= rep.per_law[0].R);  // gaussian first
    CHECK(rep.per_law[0].law == "gaussian");
    RiskReport empty;
    CHECK_THROWS_AS(empty.sup(), config_error);
}

TEST_CASE("Pinsker constant", "[risk]") {
    CHECK(pinsker_Gamma(1) == Approx(0.4235654288).epsilon(1e-9));
    CHECK(pinsker_constant(1, 1.0, 1.0) == Approx(std::cbrt(3.0) * std::pow(1.0 / (2.0 * std::numbers::pi), 2.0 / 3.0)).epsilon(1e-14));
    for (int k : {1, 2, 3}) {
        const double g = pinsker_constant(k, 1.3, 0.8);
        CHECK(pinsker_constant(k, 2.6, 0.8) / g == Approx(std::pow(2.0, 1.0 / (2 * k + 1))).epsilon(1e-14));
    }
    CHECK(pinsker_constant(1, 1.0, 1e-30) < 1e-19);
    CHECK_THROWS_AS(pinsker_constant(1, 1.0, 0.0), domain_error);
    CHECK_THROWS_AS(pinsker_constant(0, 1.0, 1.0), config_error);

    for (int k : {1, 2})
        for (int i = 1; i < 30; ++i) {
            const double a = 0.1 * i, b = 0.1 * (i + 1);
            CHECK(pinsker_constant(k, b, 1.0) > pinsker_constant(k, a, 1.0));
            CHECK(pinsker_constant(k, 1.0, b) > pinsker_constant(k, 1.0, a));
        }
}

TEST_CASE("oracle factor", "[risk]") {
    CHECK(oracle_factor(0.0) == 1.0);
    CHECK(oracle_factor(1e-9) == Approx(1.0).epsilon(1e-8));
    CHECK(oracle_factor(0.1) == Approx(1.8285714285714286).epsilon(1e-14));
    CHECK_THROWS_AS(oracle_factor(1.0 / 3.0), domain_error);
}

TEST_CASE("oracle inequality check", "[risk]") {
    const auto b = default_benchmark();
    const TruthModel m(b.name, b.signal, b.spec, 101);
    const auto oc = oracle_inequality_check(m, 100, 11);
    const auto grid = build_grid(101);
    double brute = 1e300;
    for (const auto& w : grid) brute = std::min(brute, exact_risk(w, m));
    CHECK(oc.min_risk == brute);
    CHECK(oc.grid_size == grid.size());
    CHECK(oc.C == Approx(oracle_factor(grid.procedure().rho)).epsilon(1e-15));
    CHECK(oc.delta == Approx(oc.R_star - oc.C * oc.min_risk).epsilon(1e-14));
    // the adaptive estimator cannot beat the best fixed weight beyond noise
    CHECK(oc.R_star >= oc.min_risk - 3.0 * oc.R_star_se);
}

TEST_CASE("efficiency sweep", "[risk]") {
    const auto b = default_benchmark(1, 20.0);
    const auto recs = efficiency_sweep(b, {101, 201}, 30, 4);
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) {
        CHECK(r.ratio > 0.0);
        CHECK(std::isfinite(r.ratio));
        CHECK(r.oracle_ratio == Approx(oracle_ratio(b, r.n)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(default_benchmark(1, 1.0, "zero"), config_error);
}

TEST_CASE("appendix lemma bounds", "[risk]") {
    // m = 0, N = 3, x = 0 by hand: (2 - 1) + (0 - 1) = 0
    double s = 0.0;
    for (std::size_t l = 2; l <= 3; ++l) s += phi(l, 0.0) * phi(l, 0.0) - 1.0;
    CHECK(std::abs(s) <= 1e-15);

    for (int k : {1, 2}) {
        const auto rep = lemma_checks(k, 5.0, {3, 5, 11, 51, 101}, 4, 101);
        CHECK(rep.violations() == 0);
        CHECK(rep.tail.checks > 0);
        CHECK(rep.basis_sum.checks > 0);
        CHECK(rep.aliasing.checks > 0);
        CHECK(rep.aliasing.worst_ratio < 1.0);
    }

    // j = n: the bound 2 pi sqrt(r) is looser than 2 sup|S|
    const auto S = TrigSeries::from_terms({{2, 0.1}});
    const double r1 = S.sobolev_norm(1);
    CHECK(2.0 * std::numbers::pi * std::sqrt(r1) >= 2.0 * S.sup_norm_bound());
}
