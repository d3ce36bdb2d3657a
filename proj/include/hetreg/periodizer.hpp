#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hetreg/adaptive.hpp"
#include "hetreg/errors.hpp"
#include "hetreg/lower_bound.hpp"
#include "hetreg/quadrature.hpp"
#include "hetreg/risk_lab.hpp"
#include "hetreg/rng.hpp"
#include "hetreg/scale_model.hpp"

namespace hetreg {

/// Smooth cutoff equal to 1 on [a, b] and vanishing with all derivatives at
/// 0 and 1: the bump-smoothed indicator of [a', b'], a' = a/2, b' = b/2 + 1/2,
/// with width eta = min(a, 1 - b)/4.
class CutoffSpec {
public:
    CutoffSpec(double a, double b, double eps_aux) : a_(a), b_(b), eps_(eps_aux) {
        if (!(a > 0.0 && a < b && b < 1.0)) throw config_error("cutoff needs 0 < a < b < 1");
        if (!(eps_aux > 0.0)) throw config_error("cutoff needs auxiliary noise level eps > 0");
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double eps() const noexcept { return eps_; }
    double a_prime() const noexcept { return 0.5 * a_; }
    double b_prime() const noexcept { return 0.5 * b_ + 0.5; }
    double eta() const noexcept { return 0.25 * std::min(a_, 1.0 - b_); }

    double operator()(double x) const {
        const double e = eta();
        return std::clamp(bump_cdf((x - a_prime()) / e) - bump_cdf((x - b_prime()) / e), 0.0, 1.0);
    }

private:
    double a_, b_, eps_;
};

inline double cutoff_eval(const CutoffSpec& spec, double x) { return spec(x); }

/// 0.05 sqrt(c0), small against the variance floor.
inline double default_aux_noise(const ScaleSpec& spec) { return 0.05 * std::sqrt(spec.floor()); }

/// y~_j = chi(x_j) y_j + eps zeta_j, zeta i.i.d. standard gaussian from the
/// stream derive_seed(seed, "periodize"). Known truth and scale carry over as
/// S chi and sqrt(sigma^2 chi^2 + eps^2).
inline Observations periodize_with(const Observations& obs, const RealFn& chi, double eps, std::uint64_t seed) {
    if (!(eps >= 0.0)) throw config_error("auxiliary noise level must be nonnegative");
    const std::size_t n = obs.grid.size();
    std::vector<double> c(n);
    for (std::size_t l = 1; l <= n; ++l) c[l - 1] = chi(obs.grid.x(l));
    std::vector<double> zeta(n, 0.0);
    if (eps > 0.0) {
        Rng rng = make_rng(derive_seed(seed, "periodize"));
        NoiseLaw::gaussian().sample(rng, zeta);
    }
    std::vector<double> y(n);
    for (std::size_t l = 0; l < n; ++l) y[l] = c[l] * obs.y[l] + eps * zeta[l];
    Observations out(obs.grid, std::move(y));
    out.seed = seed;
    if (obs.truth) {
        const RealFn S = *obs.truth;
        out.truth = RealFn([S, chi](double x) { return S(x) * chi(x); });
    }
    if (obs.sigma) {
        std::vector<double> s(n);
        for (std::size_t l = 0; l < n; ++l) {
            const double v = (*obs.sigma)[l] * c[l];
            s[l] = std::sqrt(v * v + eps * eps);
        }
        out.sigma = std::move(s);
    }
    return out;
}

inline Observations periodize(const Observations& obs, const CutoffSpec& spec, std::uint64_t seed) {
    return periodize_with(obs, [spec](double x) { return spec(x); }, spec.eps(), seed);
}

/// Monte Carlo risk on [a, b] of the adaptive estimate of S chi, for a
/// signal S that need not be periodic.
inline MonteCarloValue interval_risk_mc(const RealFn& S, const ScaleSpec& scale, const CutoffSpec& spec, std::size_t n,
                                        std::size_t reps, std::uint64_t seed, const NoiseLaw& law = NoiseLaw::gaussian(),
                                        const ProcedureConfig& cfg = {}) {
    if (reps < 2) throw config_error("interval risk needs at least 2 replications");
    const SimulationPlan plan(S, scale, n);
    const AdaptiveProcedure proc(n, cfg);
    detail::Moments mom;
    for (std::size_t i = 0; i < reps; ++i) {
        const Observations obs = plan.observe(law, derive_seed(seed, "interval", i));
        const Observations p = periodize(obs, spec, derive_seed(seed, "interval-aux", i));
        const auto fit = proc.fit(p.y);
        const TrigSeries& est = fit.estimate.series;
        QuadratureOptions o;
        o.rel_tol = 1e-8;
        const double err = integrate([&](double x) { const double d = est(x) - S(x); return d * d; }, spec.a(), spec.b(), o);
        mom.add(err);
    }
    return {mom.mean(), mom.stderr_(), reps};
}

}  // namespace hetreg
