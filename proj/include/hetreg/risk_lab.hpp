#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetreg/adaptive.hpp"
#include "hetreg/errors.hpp"
#include "hetreg/grid_basis.hpp"
#include "hetreg/quadrature.hpp"
#include "hetreg/rng.hpp"
#include "hetreg/scale_model.hpp"
#include "hetreg/trig_series.hpp"

namespace hetreg {

/// Everything about one (S, g, n) triple that the risk computations need,
/// precomputed once: S and sigma on the grid, the grid coefficients
/// theta_{j,n}, the per-frequency noise levels varsigma_{j,n}, and S at the
/// cell-wise quadrature nodes used for the integral norm.
class TruthModel {
public:
    TruthModel(std::string name, TrigSeries signal, ScaleSpec spec, std::size_t n)
        : name_(std::move(name)),
          signal_(std::move(signal)),
          spec_(std::move(spec)),
          plan_(as_function(signal_), spec_, n),
          basis_(plan_.grid) {
        theta_n_ = basis_.analyze(plan_.s_values, n);
        varsigma_S_ = varsigma(spec_, as_function(signal_));

        std::vector<double> s2(n);
        double mean = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            s2[l] = plan_.sigma[l] * plan_.sigma[l];
            mean += s2[l];
        }
        varsigma_n_ = mean / static_cast<double>(n);
        varsigma_jn_.assign(n, 0.0);
        for (std::size_t j = 1; j <= n; ++j) {
            double s = 0.0;
            for (std::size_t l = 1; l <= n; ++l) {
                const double p = basis_(j, l);
                s += s2[l - 1] * p * p;
            }
            varsigma_jn_[j - 1] = s / static_cast<double>(n);
        }

        const auto& rule = GaussLegendre<8>::get();
        const double h = 1.0 / static_cast<double>(n);
        node_s_.resize(8 * n);
        node_w_.resize(8);
        for (std::size_t q = 0; q < 8; ++q) node_w_[q] = 0.5 * h * rule.weights[q];
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t q = 0; q < 8; ++q)
                node_s_[8 * k + q] = signal_(h * (static_cast<double>(k) + 0.5 * (rule.nodes[q] + 1.0)));
    }

    const std::string& name() const noexcept { return name_; }
    const TrigSeries& signal() const noexcept { return signal_; }
    const ScaleSpec& spec() const noexcept { return spec_; }
    const SimulationPlan& plan() const noexcept { return plan_; }
    const GridBasis& basis() const noexcept { return basis_; }
    const DesignGrid& grid() const noexcept { return plan_.grid; }
    std::size_t n() const noexcept { return plan_.grid.size(); }

    // (S, phi_j)_n
    const std::vector<double>& theta_n() const noexcept { return theta_n_; }
    // (1/n) sum_l sigma_l^2 phi_j^2(x_l)
    const std::vector<double>& varsigma_jn() const noexcept { return varsigma_jn_; }
    // (1/n) sum_l sigma_l^2
    double varsigma_n() const noexcept { return varsigma_n_; }
    // integral of g^2(x, S)
    double varsigma_S() const noexcept { return varsigma_S_; }

    /// ||T(values) - S||^2 for grid values, exact up to the 8-point rule per cell.
    double integral_error_sq(std::span<const double> values) const {
        double total = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            double cell = 0.0;
            for (std::size_t q = 0; q < 8; ++q) {
                const double d = values[k] - node_s_[8 * k + q];
                cell += node_w_[q] * d * d;
            }
            total += cell;
        }
        return total;
    }

private:
    std::string name_;
    TrigSeries signal_;
    ScaleSpec spec_;
    SimulationPlan plan_;
    GridBasis basis_;
    std::vector<double> theta_n_;
    std::vector<double> varsigma_jn_;
    double varsigma_n_ = 0.0;
    double varsigma_S_ = 0.0;
    std::vector<double> node_s_;
    std::vector<double> node_w_;
};

/// E ||S_lambda - S||_n^2 for a fixed weight, exact:
///   sum_j (1 - lambda_j)^2 theta_{j,n}^2 + (1/n) sum_j lambda_j^2 varsigma_{j,n}.
/// Depends on the noise law only through its variance.
inline double exact_risk(const WeightVector& w, const TruthModel& m) {
    if (w.size() != m.n()) throw dimension_error("exact_risk: weight length differs from n");
    const auto& th = m.theta_n();
    const auto& vs = m.varsigma_jn();
    double bias = 0.0, var = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double l = w.lambda[j];
        bias += (1.0 - l) * (1.0 - l) * th[j] * th[j];
        var += l * l * vs[j];
    }
    return bias + var / static_cast<double>(m.n());
}

// ---------------------------------------------------------------------------
// Estimators

enum class EstimatorKind { adaptive, fixed, oracle, zero };

struct Estimator {
    EstimatorKind kind = EstimatorKind::adaptive;
    std::optional<WeightVector> weights;  // fixed and oracle kinds

    static Estimator adaptive() { return {EstimatorKind::adaptive, std::nullopt}; }
    static Estimator zero() { return {EstimatorKind::zero, std::nullopt}; }
    static Estimator fixed(WeightVector w) { return {EstimatorKind::fixed, std::move(w)}; }

    /// lambda_{(k, t~)} computed from the true varsigma(S).
    static Estimator oracle(int k, double r, const TruthModel& m, const ProcedureConfig& cfg = {}) {
        return {EstimatorKind::oracle, oracle_weight(k, r, m.varsigma_S(), m.n(), cfg)};
    }

    std::string name() const {
        switch (kind) {
            case EstimatorKind::adaptive: return "adaptive";
            case EstimatorKind::fixed: return "fixed";
            case EstimatorKind::oracle: return "oracle";
            case EstimatorKind::zero: return "zero";
        }
        return "?";
    }
};

inline EstimatorKind parse_estimator(const std::string& s) {
    if (s == "adaptive") return EstimatorKind::adaptive;
    if (s == "fixed") return EstimatorKind::fixed;
    if (s == "oracle") return EstimatorKind::oracle;
    if (s == "zero") return EstimatorKind::zero;
    throw config_error("unknown estimator '" + s + "'");
}

/// Losses of a single replication.
struct Replication {
    double R = 0.0;           // ||S_hat - S||_n^2, signal space
    double R_spectral = 0.0;  // sum_j (lambda_j theta_hat_j - theta_{j,n})^2
    double T = 0.0;           // ||T(S_hat) - S||^2
    std::size_t position = 0; // selected grid position (adaptive only)
};

/// Runs one estimator on simulated data. Holds the weight grid for the
/// adaptive kind so repeated replications do not rebuild it.
class Experiment {
public:
    Experiment(const TruthModel& model, Estimator est, const ProcedureConfig& cfg = {})
        : model_(&model), est_(std::move(est)) {
        if (est_.kind == EstimatorKind::adaptive) grid_.emplace(model.n(), cfg);
        if ((est_.kind == EstimatorKind::fixed || est_.kind == EstimatorKind::oracle) &&
            (!est_.weights || est_.weights->size() != model.n()))
            throw config_error("fixed and oracle estimators need a weight vector of length n");
    }

    const Estimator& estimator() const noexcept { return est_; }
    const WeightGrid* weight_grid() const noexcept { return grid_ ? &*grid_ : nullptr; }

    /// Estimate from the observation vector y.
    Replication evaluate(std::span<const double> y) const {
        const auto& m = *model_;
        const std::size_t n = m.n();
        Replication rep;
        std::vector<double> coef;
        if (est_.kind != EstimatorKind::zero) {
            const SpectralData sd = spectral_transform(y, m.basis());
            const WeightVector* w = nullptr;
            if (est_.kind == EstimatorKind::adaptive) {
                rep.position = select_index(*grid_, sd, grid_->procedure().rho).position;
                w = &(*grid_)[rep.position];
            } else {
                w = &*est_.weights;
            }
            coef.resize(w->support);
            for (std::size_t j = 0; j < w->support; ++j) coef[j] = w->lambda[j] * sd.theta_hat[j];
        }
        const auto& th = m.theta_n();
        for (std::size_t j = 0; j < n; ++j) {
            const double d = (j < coef.size() ? coef[j] : 0.0) - th[j];
            rep.R_spectral += d * d;
        }
        const std::vector<double> est = m.basis().synthesize(coef);
        const auto& s = m.plan().s_values;
        for (std::size_t l = 0; l < n; ++l) rep.R += (est[l] - s[l]) * (est[l] - s[l]);
        rep.R /= static_cast<double>(n);
        rep.T = m.integral_error_sq(est);
        return rep;
    }

    Replication run(const NoiseLaw& law, std::uint64_t seed) const {
        std::vector<double> y(model_->n());
        model_->plan().draw(law, seed, y);
        return evaluate(y);
    }

private:
    const TruthModel* model_;
    Estimator est_;
    std::optional<WeightGrid> grid_;
};

// ---------------------------------------------------------------------------
// Monte Carlo risk

struct RiskEstimate {
    std::string law;
    std::size_t reps = 0;
    double R = 0.0, R_se = 0.0;
    double T = 0.0, T_se = 0.0;
    double identity_gap = 0.0;      // max |R - R_spectral| over replications
    std::size_t u1_violations = 0;  // replications breaking the step-extension inequality
};

namespace detail {

struct Moments {
    // Welford running mean and sum of squared deviations.
    double m = 0.0, ss = 0.0;
    std::size_t count = 0;
    void add(double v) {
        ++count;
        const double d = v - m;
        m += d / static_cast<double>(count);
        ss += d * (v - m);
    }
    double mean() const { return m; }
    double stderr_() const {
        if (count < 2) return 0.0;
        return std::sqrt(std::max(0.0, ss) / static_cast<double>(count - 1) / static_cast<double>(count));
    }
};

}  // namespace detail

/// Replication i of law L uses seed derive_seed(seed, L, i), so every
/// estimator sees the same noise for the same (seed, law, i).
inline std::uint64_t replication_seed(std::uint64_t seed, const NoiseLaw& law, std::size_t i) {
    return derive_seed(seed, law.name(), i);
}

/// ||S_hat - S||_n^2 >= (1 - delta) ||T(S_hat) - S||^2 - (1/delta - 1) r / n^2,
/// with r the smallest W^1 radius containing S.
inline bool step_inequality_holds(const Replication& rep, double r1, std::size_t n, double delta = 0.5) {
    const double dn = static_cast<double>(n);
    const double rhs = (1.0 - delta) * rep.T - (1.0 / delta - 1.0) * r1 / (dn * dn);
    return rep.R >= rhs - 1e-14 * std::max(1.0, rep.T);
}

inline RiskEstimate mc_risk(const Experiment& ex, const TruthModel& m, const NoiseLaw& law, std::size_t reps,
                            std::uint64_t seed) {
    if (reps < 2) throw config_error("mc_risk needs at least 2 replications");
    detail::Moments R, T;
    RiskEstimate out;
    out.law = law.name();
    out.reps = reps;
    const double r1 = m.signal().sobolev_norm(1);
    for (std::size_t i = 0; i < reps; ++i) {
        const Replication rep = ex.run(law, replication_seed(seed, law, i));
        R.add(rep.R);
        T.add(rep.T);
        out.identity_gap = std::max(out.identity_gap, std::abs(rep.R - rep.R_spectral));
        if (!step_inequality_holds(rep, r1, m.n())) ++out.u1_violations;
    }
    out.R = R.mean();
    out.R_se = R.stderr_();
    out.T = T.mean();
    out.T_se = T.stderr_();
    return out;
}

inline RiskEstimate mc_risk(const TruthModel& m, const NoiseLaw& law, const Estimator& est, std::size_t reps,
                            std::uint64_t seed, const ProcedureConfig& cfg = {}) {
    return mc_risk(Experiment(m, est, cfg), m, law, reps, seed);
}

/// Risks of one estimator under each law of a catalogue, with the sup.
struct RiskReport {
    std::size_t n = 0;
    std::string signal, spec, estimator;
    std::vector<RiskEstimate> per_law;

    const RiskEstimate& sup() const {
        if (per_law.empty()) throw config_error("risk report has no noise laws");
        return *std::max_element(per_law.begin(), per_law.end(),
                                 [](const RiskEstimate& a, const RiskEstimate& b) { return a.R < b.R; });
    }
};

inline RiskReport risk_report(const TruthModel& m, const Estimator& est, const std::vector<NoiseLaw>& laws,
                              std::size_t reps, std::uint64_t seed, const ProcedureConfig& cfg = {}) {
    const Experiment ex(m, est, cfg);
    RiskReport rep{m.n(), m.name(), m.spec().describe(), est.name(), {}};
    for (const auto& law : laws) rep.per_law.push_back(mc_risk(ex, m, law, reps, seed));
    return rep;
}

// ---------------------------------------------------------------------------
// Constants

/// Gamma*_k = (2k+1)^{1/(2k+1)} (k / (pi (k+1)))^{2k/(2k+1)}.
inline double pinsker_Gamma(int k) {
    if (k < 1) throw config_error("Pinsker constant needs k >= 1");
    const double a = 2.0 * k + 1.0;
    return std::pow(a, 1.0 / a) * std::pow(k / (std::numbers::pi * (k + 1.0)), 2.0 * k / a);
}

/// gamma_k(S) = Gamma*_k r^{1/(2k+1)} varsigma^{2k/(2k+1)}.
inline double pinsker_constant(int k, double r, double varsigma_S) {
    if (!(r > 0.0)) throw config_error("Pinsker constant needs r > 0");
    if (!(varsigma_S > 0.0)) throw domain_error("Pinsker constant needs varsigma(S) > 0");
    const double a = 2.0 * k + 1.0;
    return pinsker_Gamma(k) * std::pow(r, 1.0 / a) * std::pow(varsigma_S, 2.0 * k / a);
}

/// C(rho) = (1 + 3 rho - 2 rho^2) / (1 - 3 rho).
inline double oracle_factor(double rho) {
    if (!(rho >= 0.0) || !(rho < 1.0 / 3.0)) throw domain_error("oracle factor needs 0 <= rho < 1/3");
    return (1.0 + 3.0 * rho - 2.0 * rho * rho) / (1.0 - 3.0 * rho);
}

// ---------------------------------------------------------------------------
// Benchmarks

/// A signal in W^k_r with its scale spec.
struct Benchmark {
    int k = 1;
    double r = 1.0;
    std::string name;
    TrigSeries signal;
    ScaleSpec spec = ScaleSpec::econometric(1.0, 1.0, 1.0, 0.0);
};

/// Catalogue shape `shape` scaled to half of the W^k_r budget, with the
/// econometric spec (1, 1, 1, 0).
inline Benchmark default_benchmark(int k = 1, double r = 20.0, const std::string& shape = "smooth") {
    for (auto& e : test_functions(k, r))
        if (e.name == shape + "@50%") return {k, r, e.name, e.signal, ScaleSpec::econometric(1.0, 1.0, 1.0, 0.0)};
    throw config_error("no catalogue shape named '" + shape + "' with a nonzero norm");
}

// ---------------------------------------------------------------------------
// Oracle inequality

struct OracleCheck {
    std::size_t n = 0;
    double rho = 0.0;
    double C = 0.0;                // C(rho)
    double min_risk = 0.0;         // min over the grid of the exact fixed-weight risk
    std::size_t min_position = 0;
    std::size_t grid_size = 0;
    RiskReport adaptive;
    double R_star = 0.0, R_star_se = 0.0;  // sup over laws
    double delta = 0.0, delta_se = 0.0;    // R_star - C min_risk
    double scaled() const { return static_cast<double>(n) * delta; }
};

/// Compares the adaptive risk with the best fixed weight in the grid. The
/// minimum uses exact fixed-weight risks over the whole grid, so it carries
/// no Monte Carlo error.
inline OracleCheck oracle_inequality_check(const TruthModel& m, std::size_t reps, std::uint64_t seed,
                                           const ProcedureConfig& cfg = {},
                                           const std::vector<NoiseLaw>& laws = NoiseLaw::catalogue()) {
    OracleCheck out;
    out.n = m.n();
    const WeightGrid grid(m.n(), cfg);
    out.rho = grid.procedure().rho;
    out.C = oracle_factor(out.rho);
    out.grid_size = grid.size();
    out.min_risk = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = exact_risk(grid[i], m);
        if (r < out.min_risk) {
            out.min_risk = r;
            out.min_position = i;
        }
    }
    out.adaptive = risk_report(m, Estimator::adaptive(), laws, reps, seed, cfg);
    const auto& sup = out.adaptive.sup();
    out.R_star = sup.R;
    out.R_star_se = sup.R_se;
    out.delta = out.R_star - out.C * out.min_risk;
    out.delta_se = out.R_star_se;
    return out;
}

// ---------------------------------------------------------------------------
// Efficiency

struct EfficiencyRecord {
    std::size_t n = 0;
    int k = 1;
    double r = 0.0;
    double gamma = 0.0;       // gamma_k(S)
    double R_hat = 0.0, R_se = 0.0;
    std::string sup_law;
    double ratio = 0.0, ratio_se = 0.0;
    double oracle_risk = 0.0;   // exact risk of the oracle weight
    double oracle_ratio = 0.0;  // n^{2k/(2k+1)} oracle_risk / gamma
};

inline double rate_factor(std::size_t n, int k) {
    return std::pow(static_cast<double>(n), 2.0 * k / (2.0 * k + 1.0));
}

/// The oracle-weight ratio alone, without simulation.
inline double oracle_ratio(const Benchmark& b, std::size_t n, const ProcedureConfig& cfg = {}) {
    const TruthModel m(b.name, b.signal, b.spec, n);
    const auto w = oracle_weight(b.k, b.r, m.varsigma_S(), n, cfg);
    return rate_factor(n, b.k) * exact_risk(w, m) / pinsker_constant(b.k, b.r, m.varsigma_S());
}

inline std::vector<EfficiencyRecord> efficiency_sweep(const Benchmark& b, const std::vector<std::size_t>& n_list,
                                                      std::size_t reps, std::uint64_t seed,
                                                      const ProcedureConfig& cfg = {},
                                                      const std::vector<NoiseLaw>& laws = NoiseLaw::catalogue()) {
    std::vector<EfficiencyRecord> out;
    for (std::size_t n : n_list) {
        const TruthModel m(b.name, b.signal, b.spec, n);
        EfficiencyRecord rec;
        rec.n = n;
        rec.k = b.k;
        rec.r = b.r;
        rec.gamma = pinsker_constant(b.k, b.r, m.varsigma_S());
        const auto report = risk_report(m, Estimator::adaptive(), laws, reps, derive_seed(seed, "efficiency", n), cfg);
        const auto& sup = report.sup();
        rec.R_hat = sup.R;
        rec.R_se = sup.R_se;
        rec.sup_law = sup.law;
        const double f = rate_factor(n, b.k);
        rec.ratio = f * rec.R_hat / rec.gamma;
        rec.ratio_se = f * rec.R_se / rec.gamma;
        const auto w = oracle_weight(b.k, b.r, m.varsigma_S(), n, cfg);
        rec.oracle_risk = exact_risk(w, m);
        rec.oracle_ratio = f * rec.oracle_risk / rec.gamma;
        out.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trigonometric-basis lemmas

struct BoundCheck {
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0;  // max lhs / rhs over checks with rhs > 0
    std::string worst_at;

    // `where` builds a location label, called only for a new worst case.
    template <typename Where>
    void record(double lhs, double rhs, Where&& where) {
        ++checks;
        if (lhs > rhs * (1.0 + 1e-12) + 1e-15) ++violations;
        if (rhs > 0.0 && lhs / rhs > worst_ratio) {
            worst_ratio = lhs / rhs;
            worst_at = where();
        }
    }
};

struct LemmaReport {
    BoundCheck tail;       // m^{2k} sum_{j>m} theta_{j,n}^2 <= 4 r / pi^{2(k-1)}
    BoundCheck basis_sum;  // N^{-m} |sum_{l=2..N} l^m (phi_l^2(x) - 1)| <= 2^m
    BoundCheck aliasing;   // |theta_{j,n} - theta_j| <= 2 pi sqrt(r) j / n
    std::size_t violations() const { return tail.violations + basis_sum.violations + aliasing.violations; }
};

/// Tail bound of the grid coefficients for every member of the W^k_r
/// catalogue, using for each signal the smallest radius containing it.
inline void check_tail_bound(int k, double r, std::size_t n, BoundCheck& out) {
    const DesignGrid grid(n);
    const GridBasis basis(grid);
    for (const auto& e : test_functions(k, r)) {
        if (!e.member) continue;
        const auto th = basis.analyze(e.signal.on_grid(grid), n);
        const double rhs = 4.0 * e.sobolev_norm / std::pow(std::numbers::pi, 2.0 * (k - 1));
        // suffix sums of theta_{j,n}^2
        std::vector<double> tail(n + 1, 0.0);
        for (std::size_t j = n; j >= 1; --j) tail[j - 1] = tail[j] + th[j - 1] * th[j - 1];
        for (std::size_t mm = 1; mm + 1 <= n; ++mm) {
            const double lhs = std::pow(static_cast<double>(mm), 2.0 * k) * tail[mm];
            out.record(lhs, rhs, [&] { return e.name + " n=" + std::to_string(n) + " m=" + std::to_string(mm); });
        }
    }
}

/// Basis-square sums for N = 2..N_max, exponents 0..m_max, on an x grid.
inline void check_basis_sum(std::size_t N_max, int m_max, std::size_t x_points, BoundCheck& out) {
    for (std::size_t ix = 0; ix < x_points; ++ix) {
        const double x = static_cast<double>(ix) / static_cast<double>(x_points - 1);
        for (int m = 0; m <= m_max; ++m) {
            double s = 0.0;
            for (std::size_t l = 2; l <= N_max; ++l) {
                const double p = phi(l, x);
                s += std::pow(static_cast<double>(l), m) * (p * p - 1.0);
                const double lhs = std::abs(s) / std::pow(static_cast<double>(l), m);
                out.record(lhs, std::pow(2.0, m), [&] {
                    return "x=" + std::to_string(x) + " m=" + std::to_string(m) + " N=" + std::to_string(l);
                });
            }
        }
    }
}

/// |theta_{j,n} - theta_j| for the W^1 catalogue.
inline void check_aliasing(double r, std::size_t n, BoundCheck& out) {
    const DesignGrid grid(n);
    const GridBasis basis(grid);
    for (const auto& e : test_functions(1, r)) {
        if (!e.member) continue;
        const auto th = basis.analyze(e.signal.on_grid(grid), n);
        const double root_r = std::sqrt(e.sobolev_norm);
        for (std::size_t j = 1; j <= n; ++j) {
            const double lhs = std::abs(th[j - 1] - e.signal.coefficient(j));
            const double rhs = 2.0 * std::numbers::pi * root_r * static_cast<double>(j) / static_cast<double>(n);
            out.record(lhs, rhs, [&] { return e.name + " n=" + std::to_string(n) + " j=" + std::to_string(j); });
        }
    }
}

inline LemmaReport lemma_checks(int k, double r, const std::vector<std::size_t>& n_list, int m_max = 4,
                                std::size_t x_points = 401) {
    LemmaReport rep;
    std::size_t n_max = 2;
    for (std::size_t n : n_list) {
        check_tail_bound(k, r, n, rep.tail);
        check_aliasing(r, n, rep.aliasing);
        n_max = std::max(n_max, n);
    }
    check_basis_sum(n_max, m_max, x_points, rep.basis_sum);
    return rep;
}

}  // namespace hetreg
