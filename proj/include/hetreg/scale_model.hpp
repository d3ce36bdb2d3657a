#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetreg/errors.hpp"
#include "hetreg/grid_basis.hpp"
#include "hetreg/quadrature.hpp"
#include "hetreg/rng.hpp"
#include "hetreg/trig_series.hpp"

namespace hetreg {

/// Scale functional g(x, S) of the heteroscedastic model, written as
///   g^2(x, S) = local(x, S(x)) + integral_0^1 aggregate(S(t)) dt.
/// Econometric kind: local = c0 + c1 x + c2 y^2, aggregate = c3 y^2.
/// General kind:     local = G(x, y),           aggregate = V(y).
class ScaleSpec {
public:
    enum class Kind { econometric, general };

    using LocalFn = std::function<double(double, double)>;
    using AggregateFn = std::function<double(double)>;

    static ScaleSpec econometric(double c0, double c1 = 0.0, double c2 = 0.0, double c3 = 0.0) {
        if (!(c0 > 0.0)) throw config_error("econometric scale needs c0 > 0");
        if (c1 < 0.0 || c2 < 0.0 || c3 < 0.0) throw config_error("econometric scale needs c1, c2, c3 >= 0");
        ScaleSpec s;
        s.kind_ = Kind::econometric;
        s.c_ = {c0, c1, c2, c3};
        s.floor_ = c0;
        return s;
    }

    /// G must satisfy G >= floor > 0. Derivative handles are optional; the
    /// Frechet derivative is unavailable without them.
    static ScaleSpec general(LocalFn G, AggregateFn V, double floor,
                             std::optional<LocalFn> G_y = std::nullopt,
                             std::optional<AggregateFn> V_dot = std::nullopt) {
        if (!(floor > 0.0)) throw config_error("general scale needs a positive floor for G");
        if (!G || !V) throw config_error("general scale needs both G and V");
        ScaleSpec s;
        s.kind_ = Kind::general;
        s.G_ = std::move(G);
        s.V_ = std::move(V);
        s.floor_ = floor;
        if (G_y) s.G_y_ = std::move(*G_y);
        if (V_dot) s.V_dot_ = std::move(*V_dot);
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    const std::array<double, 4>& coefficients() const noexcept { return c_; }
    // Lower bound of g^2 guaranteed by construction.
    double floor() const noexcept { return floor_; }
    // Accepted but close to a degenerate (noise-free) model.
    bool degenerate() const noexcept { return floor_ < 1e-8; }

    bool has_derivative() const noexcept {
        return kind_ == Kind::econometric || (G_y_ && V_dot_);
    }

    // True when g does not depend on S at all.
    bool signal_independent() const noexcept {
        return kind_ == Kind::econometric && c_[2] == 0.0 && c_[3] == 0.0;
    }

    double local(double x, double y) const {
        if (kind_ == Kind::econometric) return c_[0] + c_[1] * x + c_[2] * y * y;
        return G_(x, y);
    }

    double aggregate(double y) const {
        if (kind_ == Kind::econometric) return c_[3] * y * y;
        return V_(y);
    }

    double local_derivative(double x, double y) const {
        if (kind_ == Kind::econometric) return 2.0 * c_[2] * y;
        if (!G_y_) throw config_error("scale spec has no derivative handle G_y");
        return (*G_y_)(x, y);
    }

    double aggregate_derivative(double y) const {
        if (kind_ == Kind::econometric) return 2.0 * c_[3] * y;
        if (!V_dot_) throw config_error("scale spec has no derivative handle V_dot");
        return (*V_dot_)(y);
    }

    bool has_aggregate() const noexcept { return kind_ == Kind::general || c_[3] != 0.0; }

    std::string describe() const {
        std::ostringstream os;
        if (kind_ == Kind::econometric)
            os << "econometric(" << c_[0] << "," << c_[1] << "," << c_[2] << "," << c_[3] << ")";
        else
            os << "general(floor=" << floor_ << ")";
        return os.str();
    }

private:
    ScaleSpec() = default;

    Kind kind_ = Kind::econometric;
    std::array<double, 4> c_{1.0, 0.0, 0.0, 0.0};
    double floor_ = 1.0;
    LocalFn G_;
    AggregateFn V_;
    std::optional<LocalFn> G_y_;
    std::optional<AggregateFn> V_dot_;
};

/// g bound to one signal S. The integral term is computed once, after which
/// g(x, S) costs O(1) given S(x).
class BoundScale {
public:
    BoundScale(const ScaleSpec& spec, RealFn S) : spec_(spec), S_(std::move(S)) {
        if (spec.has_aggregate()) aggregate_ = integrate_01([&](double t) { return spec.aggregate(S_(t)); });
    }

    // Variant with a precomputed integral term.
    BoundScale(const ScaleSpec& spec, RealFn S, double aggregate_integral)
        : spec_(spec), S_(std::move(S)), aggregate_(aggregate_integral) {}

    double aggregate_integral() const noexcept { return aggregate_; }

    double g2_at(double x, double s_at_x) const {
        const double v = spec_.local(x, s_at_x) + aggregate_;
        if (!(v > 0.0)) throw numeric_error("g^2 is not positive; scale spec violates its floor");
        return v;
    }

    double g2(double x) const { return g2_at(x, S_(x)); }
    double g(double x) const { return std::sqrt(g2(x)); }

    const RealFn& signal() const noexcept { return S_; }
    const ScaleSpec& spec() const noexcept { return spec_; }

private:
    ScaleSpec spec_;
    RealFn S_;
    double aggregate_ = 0.0;
};

inline double eval_scale(const ScaleSpec& spec, double x, const RealFn& S) {
    return BoundScale(spec, S).g(x);
}

/// varsigma(S) = integral_0^1 g^2(x, S) dx.
inline double varsigma(const ScaleSpec& spec, const RealFn& S) {
    const BoundScale bound(spec, S);
    return integrate_01([&](double x) { return bound.g2(x); });
}

/// L_{x,S}(f) = d/dy local(x, S(x)) f(x) + integral aggregate'(S(t)) f(t) dt.
inline double frechet_derivative(const ScaleSpec& spec, double x, const RealFn& S, const RealFn& f) {
    if (!spec.has_derivative()) throw config_error("scale spec has no derivative handles");
    double cross = 0.0;
    if (spec.has_aggregate())
        cross = integrate_01([&](double t) { return spec.aggregate_derivative(S(t)) * f(t); });
    return spec.local_derivative(x, S(x)) * f(x) + cross;
}

// ---------------------------------------------------------------------------
// Noise laws

enum class NoiseKind { gaussian, uniform, two_point };

/// Centered, unit-variance noise law.
struct NoiseLaw {
    NoiseKind kind = NoiseKind::gaussian;

    static constexpr NoiseLaw gaussian() { return {NoiseKind::gaussian}; }
    static constexpr NoiseLaw uniform() { return {NoiseKind::uniform}; }
    static constexpr NoiseLaw two_point() { return {NoiseKind::two_point}; }

    static std::vector<NoiseLaw> catalogue() { return {gaussian(), uniform(), two_point()}; }

    static NoiseLaw parse(const std::string& name) {
        if (name == "gaussian") return gaussian();
        if (name == "uniform" || name == "scaled-uniform") return uniform();
        if (name == "two-point" || name == "two_point") return two_point();
        throw config_error("unknown noise law '" + name + "'");
    }

    std::string name() const {
        switch (kind) {
            case NoiseKind::gaussian: return "gaussian";
            case NoiseKind::uniform: return "uniform";
            case NoiseKind::two_point: return "two-point";
        }
        return "?";
    }

    // E xi^4
    double fourth_moment() const noexcept {
        switch (kind) {
            case NoiseKind::gaussian: return 3.0;
            case NoiseKind::uniform: return 9.0 / 5.0;
            case NoiseKind::two_point: return 1.0;
        }
        return 0.0;
    }

    // Fills out with i.i.d. draws.
    void sample(Rng& rng, std::span<double> out) const {
        switch (kind) {
            case NoiseKind::gaussian: {
                std::normal_distribution<double> d(0.0, 1.0);
                for (double& v : out) v = d(rng);
                break;
            }
            case NoiseKind::uniform: {
                const double a = std::sqrt(3.0);
                std::uniform_real_distribution<double> d(-a, a);
                for (double& v : out) v = d(rng);
                break;
            }
            case NoiseKind::two_point: {
                std::bernoulli_distribution d(0.5);
                for (double& v : out) v = d(rng) ? 1.0 : -1.0;
                break;
            }
        }
    }

    friend bool operator==(const NoiseLaw&, const NoiseLaw&) = default;
};

// ---------------------------------------------------------------------------
// Observations and simulation

struct Observations {
    DesignGrid grid;
    std::vector<double> y;
    std::optional<RealFn> truth;              // S, when known
    std::optional<std::vector<double>> sigma; // sigma_j, when known
    std::uint64_t seed = 0;

    Observations(DesignGrid g, std::vector<double> values) : grid(g), y(std::move(values)) {
        if (y.size() != grid.size()) throw dimension_error("observations: length(y) != n");
    }
};

/// sigma_j(S) = g(x_j, S) on the design grid.
inline std::vector<double> scale_on_grid(const BoundScale& bound, const DesignGrid& grid,
                                         std::span<const double> s_on_grid) {
    std::vector<double> sigma(grid.size());
    for (std::size_t l = 1; l <= grid.size(); ++l) sigma[l - 1] = std::sqrt(bound.g2_at(grid.x(l), s_on_grid[l - 1]));
    return sigma;
}

/// Precomputed pieces of a simulation setup: S and sigma on the grid.
struct SimulationPlan {
    DesignGrid grid;
    std::vector<double> s_values;
    std::vector<double> sigma;
    RealFn truth;

    SimulationPlan(const RealFn& S, const ScaleSpec& spec, std::size_t n) : grid(n), truth(S) {
        s_values.resize(n);
        for (std::size_t l = 1; l <= n; ++l) s_values[l - 1] = S(grid.x(l));
        sigma = scale_on_grid(BoundScale(spec, S), grid, s_values);
    }

    // y_j = S(x_j) + sigma_j xi_j, written into y.
    void draw(const NoiseLaw& law, std::uint64_t seed, std::span<double> y) const {
        Rng rng = make_rng(seed);
        law.sample(rng, y);
        for (std::size_t l = 0; l < y.size(); ++l) y[l] = s_values[l] + sigma[l] * y[l];
    }

    Observations observe(const NoiseLaw& law, std::uint64_t seed) const {
        std::vector<double> y(grid.size());
        draw(law, seed, y);
        Observations obs(grid, std::move(y));
        obs.truth = truth;
        obs.sigma = sigma;
        obs.seed = seed;
        return obs;
    }
};

/// y_j = S(x_j) + g(x_j, S) xi_j, xi_j i.i.d. from law; deterministic in seed.
inline Observations simulate(const RealFn& S, const ScaleSpec& spec, const NoiseLaw& law, std::size_t n,
                             std::uint64_t seed) {
    return SimulationPlan(S, spec, n).observe(law, seed);
}

// ---------------------------------------------------------------------------
// Sobolev classes and the test-signal catalogue

struct SobolevClass {
    int k;
    double r;

    SobolevClass(int k_, double r_) : k(k_), r(r_) {
        if (k < 1) throw config_error("Sobolev smoothness k must be >= 1");
        if (!(r > 0.0)) throw config_error("Sobolev radius r must be > 0");
    }

    bool contains(const TrigSeries& s) const { return s.sobolev_norm(k) <= r; }
};

struct CatalogueEntry {
    std::string name;
    TrigSeries signal;
    double sobolev_norm;  // sum_j a_j theta_j^2 for the requested k
    bool member;          // sobolev_norm <= r
};

/// Base shapes of the catalogue (unscaled). All are finite trigonometric
/// polynomials with modes j >= 2, so every norm is exact.
inline std::vector<std::pair<std::string, TrigSeries>> base_shapes() {
    std::vector<std::pair<std::string, TrigSeries>> shapes;
    shapes.emplace_back("zero", TrigSeries{});
    shapes.emplace_back("cos1", TrigSeries::from_terms({{2, 0.5}}));
    shapes.emplace_back("sin1", TrigSeries::from_terms({{3, 0.4}}));
    {
        // coefficients decaying like freq^-3
        std::vector<double> c(9, 0.0);
        for (std::size_t j = 2; j <= 9; ++j) {
            const double f = static_cast<double>(frequency(j));
            c[j - 1] = ((j % 3 == 0) ? -0.6 : 0.6) / (f * f * f);
        }
        shapes.emplace_back("smooth", TrigSeries(std::move(c)));
    }
    {
        // broader spectrum, decaying like freq^-2, top frequency 6
        std::vector<double> c(13, 0.0);
        for (std::size_t j = 2; j <= 13; ++j) {
            const double f = static_cast<double>(frequency(j));
            c[j - 1] = ((j % 2 == 0) ? 0.5 : -0.3) / (f * f);
        }
        shapes.emplace_back("ripple", TrigSeries(std::move(c)));
    }
    return shapes;
}

/// Catalogue for W^k_r: each base shape as is, plus each nonzero shape
/// rescaled to sit at 50% of the budget r. Membership is decided exactly.
inline std::vector<CatalogueEntry> test_functions(int k, double r) {
    const SobolevClass cls(k, r);
    std::vector<CatalogueEntry> out;
    for (auto& [name, s] : base_shapes()) {
        const double norm = s.sobolev_norm(k);
        out.push_back({name, s, norm, norm <= r});
        if (norm > 0.0) {
            TrigSeries half = s.scaled(std::sqrt(0.5 * r / norm));
            const double hn = half.sobolev_norm(k);
            out.push_back({name + "@50%", std::move(half), hn, hn <= r});
        }
    }
    return out;
}

inline RealFn as_function(const TrigSeries& s) {
    return [s](double x) { return s(x); };
}

}  // namespace hetreg
