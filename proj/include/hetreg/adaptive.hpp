#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetreg/errors.hpp"
#include "hetreg/grid_basis.hpp"
#include "hetreg/scale_model.hpp"
#include "hetreg/trig_series.hpp"

namespace hetreg {

/// l_n = [n^{1/3} + 1], computed in integer arithmetic.
inline std::size_t cutoff_index(std::size_t n) {
    auto root = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
    while ((root + 1) * (root + 1) * (root + 1) <= n) ++root;
    while (root > 0 && root * root * root > n) --root;
    return root + 1;
}

struct SpectralData {
    std::vector<double> theta_hat;  // theta_hat[j-1] = (Y, phi_j)_n
    std::size_t n = 0;
    double varsigma_hat = 0.0;      // sum_{j > l_n} theta_hat_j^2
    std::size_t l_n = 0;

    static SpectralData from_coefficients(std::vector<double> theta_hat) {
        SpectralData sd;
        sd.n = theta_hat.size();
        sd.l_n = cutoff_index(sd.n);
        double s = 0.0;
        for (std::size_t j = sd.l_n + 1; j <= sd.n; ++j) s += theta_hat[j - 1] * theta_hat[j - 1];
        sd.varsigma_hat = s;
        sd.theta_hat = std::move(theta_hat);
        return sd;
    }
};

inline SpectralData spectral_transform(std::span<const double> y, const GridBasis& basis) {
    return SpectralData::from_coefficients(basis.analyze(y, basis.size()));
}

inline SpectralData spectral_transform(const Observations& obs) {
    return spectral_transform(obs.y, GridBasis(obs.grid));
}

// ---------------------------------------------------------------------------
// Weights

/// Index alpha = (beta, t) with t = t_index * eps.
struct WeightIndex {
    int beta = 1;
    std::size_t t_index = 1;
    double t = 0.0;

    friend bool operator<(const WeightIndex& a, const WeightIndex& b) {
        return a.beta != b.beta ? a.beta < b.beta : a.t < b.t;
    }
    friend bool operator==(const WeightIndex&, const WeightIndex&) = default;
};

/// A_beta = (beta+1)(2 beta+1) / (beta pi^{2 beta}).
inline double pinsker_factor(int beta) {
    const double b = beta;
    return (b + 1.0) * (2.0 * b + 1.0) / (b * std::pow(std::numbers::pi, 2.0 * b));
}

/// omega(alpha) = omega_bar + (A_beta t n)^{1/(2 beta + 1)}.
inline double omega(int beta, double t, double n, double omega_bar = 0.0) {
    if (beta < 1) throw config_error("omega: beta must be >= 1");
    if (!(t > 0.0)) throw config_error("omega: t must be > 0");
    return omega_bar + std::pow(pinsker_factor(beta) * t * n, 1.0 / (2.0 * beta + 1.0));
}

struct WeightVector {
    std::vector<double> lambda;
    std::optional<WeightIndex> alpha;
    double omega = 0.0;
    std::size_t support = 0;  // largest j with lambda(j) != 0

    std::size_t size() const noexcept { return lambda.size(); }
    double operator()(std::size_t j) const noexcept { return lambda[j - 1]; }

    double norm_sq() const noexcept {
        double s = 0.0;
        for (std::size_t j = 0; j < support; ++j) s += lambda[j] * lambda[j];
        return s;
    }

    static WeightVector from_values(std::vector<double> values) {
        WeightVector w;
        w.lambda = std::move(values);
        w.support = w.lambda.size();
        while (w.support > 0 && w.lambda[w.support - 1] == 0.0) --w.support;
        return w;
    }

    static WeightVector constant(std::size_t n, double value) {
        return from_values(std::vector<double>(n, value));
    }
};

/// Pinsker-type weights for a given omega:
///   lambda(j) = 1 for j <= j0 = [omega eps], 1 - (j/omega)^beta for
///   j0 < j <= [omega], 0 beyond; truncated at length n.
inline WeightVector weights_from_omega(int beta, double omega_value, double eps, std::size_t n) {
    WeightVector w;
    w.lambda.assign(n, 0.0);
    w.omega = omega_value;
    const auto j0 = static_cast<std::size_t>(std::floor(omega_value * eps));
    const auto last = static_cast<std::size_t>(std::floor(omega_value));
    // eps < 1, so j0 <= [omega]
    for (std::size_t j = 1; j <= std::min(last, n); ++j)
        w.lambda[j - 1] = (j <= j0) ? 1.0 : 1.0 - std::pow(static_cast<double>(j) / omega_value, beta);
    w.support = std::min(last, n);
    while (w.support > 0 && w.lambda[w.support - 1] == 0.0) --w.support;
    return w;
}

inline WeightVector weight_vector(const WeightIndex& alpha, std::size_t n, double eps, double omega_bar = 0.0) {
    WeightVector w = weights_from_omega(alpha.beta, omega(alpha.beta, alpha.t, static_cast<double>(n), omega_bar), eps, n);
    w.alpha = alpha;
    return w;
}

// ---------------------------------------------------------------------------
// Procedure configuration

/// Optional overrides; unset fields take the default schedules
/// eps = 1/ln n, k* = k_bar + ceil(sqrt(ln n)), L_n = sqrt(ln n),
/// rho = 1/(3 + L_n), omega_bar = k_bar = 0.
struct ProcedureConfig {
    std::optional<double> rho;
    std::optional<double> L_n;
    std::optional<double> eps;
    std::optional<int> k_star;
    double omega_bar = 0.0;
    double k_bar = 0.0;
};

struct ResolvedProcedure {
    std::size_t n = 0;
    double rho = 0.0;
    double eps = 0.0;
    int k_star = 0;
    std::size_t m = 0;  // [1/eps^2]
    double omega_bar = 0.0;
};

inline ResolvedProcedure resolve(const ProcedureConfig& cfg, std::size_t n) {
    if (n < 3) throw config_error("procedure needs n >= 3");
    const double ln_n = std::log(static_cast<double>(n));
    ResolvedProcedure p;
    p.n = n;
    p.eps = cfg.eps.value_or(1.0 / ln_n);
    if (!(p.eps > 0.0) || p.eps >= 1.0) throw config_error("eps must lie in (0, 1)");
    if (cfg.k_bar < 0.0 || cfg.omega_bar < 0.0) throw config_error("k_bar and omega_bar must be >= 0");
    p.k_star = cfg.k_star.value_or(static_cast<int>(std::ceil(cfg.k_bar + std::sqrt(ln_n))));
    if (p.k_star < 1) throw config_error("k_star must be >= 1");
    if (cfg.rho) {
        p.rho = *cfg.rho;
    } else {
        const double L = cfg.L_n.value_or(std::sqrt(ln_n));
        if (L < 0.0) throw config_error("L_n must be >= 0");
        p.rho = 1.0 / (3.0 + L);
    }
    if (!(p.rho > 0.0) || !(p.rho < 1.0 / 3.0)) throw config_error("rho must lie in (0, 1/3)");
    p.m = static_cast<std::size_t>(std::floor(1.0 / (p.eps * p.eps)));
    p.omega_bar = cfg.omega_bar;
    return p;
}

/// |Lambda| = k* [1/eps^2] without building the grid; n may exceed memory limits.
inline double grid_cardinality(double n, const ProcedureConfig& cfg = {}) {
    const double ln_n = std::log(n);
    const double eps = cfg.eps.value_or(1.0 / ln_n);
    const double k_star = cfg.k_star ? *cfg.k_star : std::ceil(cfg.k_bar + std::sqrt(ln_n));
    return k_star * std::floor(1.0 / (eps * eps));
}

/// Lambda = {lambda_alpha : alpha in {1..k*} x {eps, 2 eps, ..., m eps}},
/// stored in lexicographic (beta, t) order.
class WeightGrid {
public:
    WeightGrid(std::size_t n, const ProcedureConfig& cfg) : proc_(resolve(cfg, n)) {
        vectors_.reserve(static_cast<std::size_t>(proc_.k_star) * proc_.m);
        for (int beta = 1; beta <= proc_.k_star; ++beta)
            for (std::size_t i = 1; i <= proc_.m; ++i) {
                const WeightIndex alpha{beta, i, static_cast<double>(i) * proc_.eps};
                vectors_.push_back(weight_vector(alpha, n, proc_.eps, proc_.omega_bar));
            }
    }

    const ResolvedProcedure& procedure() const noexcept { return proc_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    bool empty() const noexcept { return vectors_.empty(); }
    const WeightVector& operator[](std::size_t i) const { return vectors_[i]; }
    auto begin() const { return vectors_.begin(); }
    auto end() const { return vectors_.end(); }

    int k_star() const noexcept { return proc_.k_star; }
    double eps() const noexcept { return proc_.eps; }
    std::size_t m() const noexcept { return proc_.m; }

    // Position of alpha = (beta, t_index) in storage order.
    std::size_t position(int beta, std::size_t t_index) const {
        if (beta < 1 || beta > proc_.k_star || t_index < 1 || t_index > proc_.m)
            throw range_error("weight index outside the grid");
        return static_cast<std::size_t>(beta - 1) * proc_.m + (t_index - 1);
    }

private:
    ResolvedProcedure proc_;
    std::vector<WeightVector> vectors_;
};

inline WeightGrid build_grid(std::size_t n, const ProcedureConfig& cfg = {}) {
    (void)DesignGrid(n);
    return WeightGrid(n, cfg);
}

// ---------------------------------------------------------------------------
// Cost and selection

/// J_n(lambda) = sum lambda^2 theta_hat^2 - 2 sum lambda theta_tilde
///               + rho |lambda|^2 varsigma_hat / n,
/// theta_tilde_j = theta_hat_j^2 - varsigma_hat / n.
inline double cost(const WeightVector& lambda, const SpectralData& sd, double rho) {
    if (lambda.size() != sd.theta_hat.size()) throw dimension_error("cost: weight and spectrum lengths differ");
    const double noise = sd.varsigma_hat / static_cast<double>(sd.n);
    double quad = 0.0, lin = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < lambda.support; ++j) {
        const double l = lambda.lambda[j];
        const double th2 = sd.theta_hat[j] * sd.theta_hat[j];
        quad += l * l * th2;
        lin += l * (th2 - noise);
        norm += l * l;
    }
    return quad - 2.0 * lin + rho * norm * noise;
}

struct Selection {
    std::size_t position = 0;  // index into the grid
    double cost = 0.0;
};

/// argmin over the grid; ties go to the lexicographically smallest (beta, t),
/// which is the first minimum in storage order.
inline Selection select_index(const WeightGrid& grid, const SpectralData& sd, double rho) {
    if (grid.empty()) throw config_error("select: empty weight grid");
    Selection best{0, cost(grid[0], sd, rho)};
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double c = cost(grid[i], sd, rho);
        if (c < best.cost) best = {i, c};
    }
    return best;
}

inline const WeightVector& select(const WeightGrid& grid, const SpectralData& sd, double rho) {
    return grid[select_index(grid, sd, rho).position];
}

// ---------------------------------------------------------------------------
// Reconstruction

struct Reconstruction {
    std::vector<double> on_grid;
    TrigSeries series;  // evaluator on [0,1]
};

/// S_hat_lambda = sum_j lambda(j) theta_hat_j phi_j.
inline Reconstruction reconstruct(const WeightVector& lambda, const SpectralData& sd, const GridBasis& basis) {
    if (lambda.size() != sd.theta_hat.size() || basis.size() != sd.n)
        throw dimension_error("reconstruct: lengths do not match");
    std::vector<double> coef(lambda.support);
    for (std::size_t j = 0; j < lambda.support; ++j) coef[j] = lambda.lambda[j] * sd.theta_hat[j];
    Reconstruction r;
    r.on_grid = basis.synthesize(coef);
    r.series = TrigSeries(std::move(coef));
    return r;
}

inline Reconstruction reconstruct(const WeightVector& lambda, const SpectralData& sd, const DesignGrid& grid) {
    return reconstruct(lambda, sd, GridBasis(grid));
}

// ---------------------------------------------------------------------------
// Oracle (non-adaptive) weight

struct OracleIndex {
    double r_bar = 0.0;       // r / varsigma(S)
    std::size_t l_tilde = 0;  // min(inf{i : i eps >= r_bar}, m)
    double t_tilde = 0.0;     // l_tilde eps
};

inline OracleIndex oracle_index(double r, double varsigma_S, double eps, std::size_t m) {
    if (!(varsigma_S > 0.0)) throw domain_error("oracle weight needs varsigma(S) > 0");
    OracleIndex o;
    o.r_bar = r / varsigma_S;
    double guess = std::ceil(o.r_bar / eps);
    std::size_t i = guess < 1.0 ? 1 : (guess > static_cast<double>(m) + 1.0 ? m + 1 : static_cast<std::size_t>(guess));
    // settle on the exact infimum of {i : i*eps >= r_bar} in the same arithmetic the grid uses
    while (i > 1 && static_cast<double>(i - 1) * eps >= o.r_bar) --i;
    while (i <= m && static_cast<double>(i) * eps < o.r_bar) ++i;
    o.l_tilde = std::min(i, m);
    o.t_tilde = static_cast<double>(o.l_tilde) * eps;
    return o;
}

/// lambda_{(k, t_tilde)} with t_tilde from the true varsigma(S) and r.
inline WeightVector oracle_weight(int k, double r, double varsigma_S, std::size_t n, const ProcedureConfig& cfg = {}) {
    if (k < 1) throw config_error("oracle weight needs k >= 1");
    if (!(r > 0.0)) throw config_error("oracle weight needs r > 0");
    const ResolvedProcedure p = resolve(cfg, n);
    if (k > p.k_star) throw range_error("oracle weight: k = " + std::to_string(k) + " exceeds k* = " + std::to_string(p.k_star));
    const OracleIndex o = oracle_index(r, varsigma_S, p.eps, p.m);
    return weight_vector(WeightIndex{k, o.l_tilde, o.t_tilde}, n, p.eps, p.omega_bar);
}

inline WeightVector oracle_weight(int k, double r, const ScaleSpec& spec, const RealFn& S, std::size_t n,
                                  const ProcedureConfig& cfg = {}) {
    return oracle_weight(k, r, varsigma(spec, S), n, cfg);
}

// ---------------------------------------------------------------------------
// Step extension T(f)

/// T(f)(x) = f(x_1) on [0, x_1], f(x_k) on (x_{k-1}, x_k].
class StepFunction {
public:
    explicit StepFunction(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw dimension_error("step extension needs at least one value");
    }

    // Cell index k (1-based) containing x.
    std::size_t cell(double x) const noexcept {
        const auto n = values_.size();
        const double dn = static_cast<double>(n);
        if (!(x > 1.0 / dn)) return 1;
        if (x >= 1.0) return n;
        auto k = static_cast<std::size_t>(std::ceil(x * dn));
        k = std::clamp<std::size_t>(k, 1, n);
        if (k > 1 && x <= static_cast<double>(k - 1) / dn) --k;
        if (k < n && x > static_cast<double>(k) / dn) ++k;
        return k;
    }

    double operator()(double x) const noexcept { return values_[cell(x) - 1]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

inline StepFunction step_extension(std::vector<double> values) { return StepFunction(std::move(values)); }

/// Integral over [0,1] of a function evaluated cell by cell with a fixed
/// Gauss-Legendre rule, for integrands that are smooth inside each design
/// cell but may jump across cell boundaries.
template <typename F>
double integrate_cells(F&& f, std::size_t n) {
    const auto& rule = GaussLegendre<8>::get();
    const double dn = static_cast<double>(n);
    double total = 0.0;
    for (std::size_t k = 1; k <= n; ++k) total += rule.integrate(f, static_cast<double>(k - 1) / dn, static_cast<double>(k) / dn);
    return total;
}

/// Adaptive procedure with the weight grid and basis tables built once per n.
class AdaptiveProcedure {
public:
    AdaptiveProcedure(std::size_t n, const ProcedureConfig& cfg = {})
        : grid_(n), basis_(grid_), weights_(n, cfg) {}

    struct Fit {
        SpectralData spectral;
        std::size_t position = 0;
        double cost = 0.0;
        Reconstruction estimate;
    };

    Fit fit(std::span<const double> y) const {
        Fit f;
        f.spectral = spectral_transform(y, basis_);
        const Selection sel = select_index(weights_, f.spectral, weights_.procedure().rho);
        f.position = sel.position;
        f.cost = sel.cost;
        f.estimate = reconstruct(weights_[sel.position], f.spectral, basis_);
        return f;
    }

    const WeightVector& selected(const Fit& f) const { return weights_[f.position]; }
    const DesignGrid& grid() const noexcept { return grid_; }
    const GridBasis& basis() const noexcept { return basis_; }
    const WeightGrid& weights() const noexcept { return weights_; }
    double rho() const noexcept { return weights_.procedure().rho; }

private:
    DesignGrid grid_;
    GridBasis basis_;
    WeightGrid weights_;
};

}  // namespace hetreg
