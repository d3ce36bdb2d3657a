#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hetreg/adaptive.hpp"
#include "hetreg/errors.hpp"
#include "hetreg/grid_basis.hpp"
#include "hetreg/quadrature.hpp"
#include "hetreg/risk_lab.hpp"
#include "hetreg/rng.hpp"
#include "hetreg/scale_model.hpp"

namespace hetreg {

// ---------------------------------------------------------------------------
// Bump kernel and mollifier

/// Unnormalized bump exp(-1/(1-u^2)) on (-1, 1).
inline double bump(double u) noexcept {
    return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
}

namespace detail {

// int_{-1}^{u} bump with a fixed 64-panel rule; the bump is flat to all
// orders at -1, so the error is absolute and far below 1e-15.
inline double bump_partial(double u) {
    double abs_sum = 0.0;
    return composite_gl16(bump, -1.0, u, 64, abs_sum);
}

}  // namespace detail

inline double bump_mass() {
    static const double z = 2.0 * detail::bump_partial(0.0);
    return z;
}

/// Distribution function of the normalized bump V.
inline double bump_cdf(double u) {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    if (u > 0.0) return 1.0 - bump_cdf(-u);
    return detail::bump_partial(u) / bump_mass();
}

/// chi_eta(x) = eta^-1 int 1{|u| <= 1-eta} V((u-x)/eta) du.
/// Equal to 1 on |x| <= 1-2eta and 0 on |x| >= 1.
class Mollifier {
public:
    explicit Mollifier(double eta = 0.1) : eta_(eta) {
        if (!(eta > 0.0 && eta < 0.5)) throw config_error("mollifier needs 0 < eta < 1/2");
    }

    double eta() const noexcept { return eta_; }

    double operator()(double x) const {
        if (std::abs(x) >= 1.0) return 0.0;
        const double hi = std::min(1.0, (1.0 - eta_ - x) / eta_);
        const double lo = std::max(-1.0, (-1.0 + eta_ - x) / eta_);
        return std::clamp(bump_cdf(hi) - bump_cdf(lo), 0.0, 1.0);
    }

private:
    double eta_;
};

/// Trigonometric basis of L2[-1, 1]: e_1 = 1/sqrt2, then cos / sin(pi [j/2] v).
inline double interval_basis(std::size_t j, double v) noexcept {
    if (j <= 1) return 1.0 / std::numbers::sqrt2;
    const double a = std::numbers::pi * static_cast<double>(j / 2) * v;
    return j % 2 == 0 ? std::cos(a) : std::sin(a);
}

/// e_bar_j(f) = int_{-1}^{1} e_j^2 f.
template <typename F>
double ebar(std::size_t j, F&& f) {
    QuadratureOptions o;
    o.rel_tol = 1e-12;
    return integrate([&](double v) { const double e = interval_basis(j, v); return e * e * f(v); }, -1.0, 1.0, o);
}

// ---------------------------------------------------------------------------
// Lagrange allocation

namespace detail {

inline double power_sum(std::size_t N, double p) {
    double s = 0.0;
    for (std::size_t i = 1; i <= N; ++i) s += std::pow(static_cast<double>(i), p);
    return s;
}

}  // namespace detail

/// R must exceed N^k sum i^k - sum i^{2k} for every y*_j to be positive.
inline double allocation_threshold(std::size_t N, int k) {
    return std::pow(static_cast<double>(N), k) * detail::power_sum(N, k) - detail::power_sum(N, 2.0 * k);
}

/// Maximizer of Psi_N(y) = sum y_j/(y_j+1) subject to sum y_j j^{2k} = R:
/// y*_j = a* j^{-k} - 1, a* = (R + sum i^{2k}) / sum i^k.
inline std::vector<double> optimal_allocation(std::size_t N, int k, double R) {
    if (N < 1) throw config_error("allocation needs N >= 1");
    if (k < 1) throw config_error("allocation needs k >= 1");
    const double threshold = allocation_threshold(N, k);
    if (!(R > threshold)) {
        std::ostringstream os;
        os << "allocation budget R = " << R << " must exceed N^k sum i^k - sum i^2k = " << threshold << " (N = " << N
           << ", k = " << k << ")";
        throw domain_error(os.str());
    }
    const double a = (R + detail::power_sum(N, 2.0 * k)) / detail::power_sum(N, k);
    std::vector<double> y(N);
    for (std::size_t j = 1; j <= N; ++j) y[j - 1] = a * std::pow(static_cast<double>(j), -k) - 1.0;
    return y;
}

inline double Psi(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v / (v + 1.0);
    return s;
}

/// Psi_N at the optimum: N - (sum j^k)^2 / (R + sum j^{2k}).
inline double Psi_star(std::size_t N, int k, double R) {
    const double a = detail::power_sum(N, k);
    return static_cast<double>(N) - a * a / (R + detail::power_sum(N, 2.0 * k));
}

// ---------------------------------------------------------------------------
// Prior design

/// Block layout and gaussian prior scales t_{m,j} of the kernel family.
struct PriorDesign {
    int k = 1;
    double r = 1.0;
    std::size_t n = 0;
    double eps = 0.1;   // slack in (0, 1)
    double eta = 0.1;   // mollifier width
    std::size_t N = 0;  // modes per block
    std::size_t M = 0;  // blocks
    bool N_capped = false;
    double h = 0.0, h_star = 0.0, upsilon = 0.0, c_star = 0.0;
    double varsigma0 = 0.0;  // int g0^2
    double g0_hat = 0.0;     // 2h sum g0^2(x_m)
    double R_star = 0.0;
    std::vector<double> x_tilde;  // block centers 2mh
    std::vector<double> g0_at;
    std::vector<double> y_star;
    std::vector<double> t;  // M x N row-major

    double t_at(std::size_t m, std::size_t j) const { return t[(m - 1) * N + (j - 1)]; }
    std::size_t coordinates() const noexcept { return M * N; }

    // (1/h^{2k-1}) sum t^2 j^{2k}
    double a3_sum() const {
        double s = 0.0;
        for (std::size_t m = 1; m <= M; ++m)
            for (std::size_t j = 1; j <= N; ++j) {
                const double tv = t_at(m, j);
                s += tv * tv * std::pow(static_cast<double>(j), 2 * k);
            }
        return s / std::pow(h, 2 * k - 1);
    }
};

inline std::size_t default_modes(std::size_t n) {
    const double l = std::log(static_cast<double>(n));
    return static_cast<std::size_t>(std::floor(l * l * l * l)) + 1;
}

struct CalibrationOptions {
    std::optional<std::size_t> N;  // default: floor(ln^4 n)+1, lowered to the largest feasible value
    double eta = 0.1;
};

/// Baseline scale g0(x) = g(x, S == 0).
inline RealFn baseline_scale(const ScaleSpec& spec) {
    return [spec](double x) { return std::sqrt(spec.local(x, 0.0) + spec.aggregate(0.0)); };
}

namespace detail {

inline PriorDesign calibrate_fixed(int k, double r, std::size_t n, double eps, const RealFn& g0, double varsigma0,
                                   std::size_t N, double eta) {
    PriorDesign d;
    d.k = k;
    d.r = r;
    d.n = n;
    d.eps = eps;
    d.eta = eta;
    d.N = N;
    d.varsigma0 = varsigma0;
    const double two_k = 2.0 * k;
    const double pi2k = std::pow(std::numbers::pi, two_k);
    d.c_star = std::pow(2.0, two_k + 1.0) * (1.0 - eps) * r / (pi2k * varsigma0);
    d.upsilon = (1.0 + eps) * k / (d.c_star * (k + 1.0) * (two_k + 1.0));
    d.h_star = std::pow(d.upsilon, 1.0 / (two_k + 1.0));
    d.h = d.h_star * std::pow(static_cast<double>(n), -1.0 / (two_k + 1.0)) * static_cast<double>(N);
    const double blocks = std::floor(1.0 / (2.0 * d.h)) - 1.0;
    if (!(blocks >= 1.0)) {
        std::ostringstream os;
        os << "n = " << n << " is too small for k = " << k << ", N = " << N << ": h = " << d.h << " leaves M < 1 blocks";
        throw domain_error(os.str());
    }
    d.M = static_cast<std::size_t>(blocks);
    d.x_tilde.resize(d.M);
    d.g0_at.resize(d.M);
    double s = 0.0;
    for (std::size_t m = 1; m <= d.M; ++m) {
        d.x_tilde[m - 1] = 2.0 * static_cast<double>(m) * d.h;
        const double g = g0(d.x_tilde[m - 1]);
        if (!(g > 0.0) || !std::isfinite(g)) throw domain_error("baseline scale g0 must be positive and finite");
        d.g0_at[m - 1] = g;
        s += g * g;
    }
    d.g0_hat = 2.0 * d.h * s;
    d.R_star = std::pow(2.0, two_k + 1.0) * (1.0 - eps) * r * static_cast<double>(n) * std::pow(d.h, two_k + 1.0) /
               (pi2k * d.g0_hat);
    d.y_star = optimal_allocation(N, k, d.R_star);
    d.t.resize(d.M * N);
    const double nh = static_cast<double>(n) * d.h;
    for (std::size_t m = 1; m <= d.M; ++m)
        for (std::size_t j = 1; j <= N; ++j)
            d.t[(m - 1) * N + (j - 1)] = d.g0_at[m - 1] * std::sqrt(d.y_star[j - 1]) / std::sqrt(nh);
    return d;
}

}  // namespace detail

/// Calibrated prior: h = h* n^{-1/(2k+1)} N, R* from the A3 budget,
/// t_{m,j} = g0(x_m) sqrt(y*_j(R*)) / sqrt(nh).
inline PriorDesign calibrate_prior(int k, double r, std::size_t n, double eps, const RealFn& g0,
                                   const CalibrationOptions& opts = {}) {
    if (k < 1) throw config_error("lower bound needs k >= 1");
    if (!(r > 0.0)) throw config_error("lower bound needs r > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw config_error("lower bound needs 0 < eps_lb < 1");
    if (n < 3 || n % 2 == 0) throw config_error("n must be odd and at least 3");
    (void)Mollifier(opts.eta);
    const double varsigma0 = integrate_01([&](double x) { const double g = g0(x); return g * g; });
    if (opts.N) {
        if (*opts.N < 1) throw config_error("lower bound needs N >= 1");
        return detail::calibrate_fixed(k, r, n, eps, g0, varsigma0, *opts.N, opts.eta);
    }
    const std::size_t wanted = default_modes(n);
    for (std::size_t N = wanted; N >= 1; --N) {
        try {
            PriorDesign d = detail::calibrate_fixed(k, r, n, eps, g0, varsigma0, N, opts.eta);
            d.N_capped = N < wanted;
            return d;
        } catch (const domain_error&) {
        }
    }
    std::ostringstream os;
    os << "no feasible number of modes for n = " << n << ", k = " << k << ", r = " << r;
    throw domain_error(os.str());
}

inline PriorDesign calibrate_prior(int k, double r, std::size_t n, double eps, const ScaleSpec& spec,
                                   const CalibrationOptions& opts = {}) {
    return calibrate_prior(k, r, n, eps, baseline_scale(spec), opts);
}

/// Limit constant of the normalized bound: (1+eps')(1-eps)^{1/(2k+1)}/(1+eps)^{1/(2k+1)} gamma_k,
/// eps' = eps/(2k + eps k + 1).
inline double asymptotic_bound_constant(int k, double r, double eps, double varsigma0) {
    const double p = 1.0 / (2.0 * k + 1.0);
    const double eps_prime = eps / (2.0 * k + eps * k + 1.0);
    return (1.0 + eps_prime) * std::pow(1.0 - eps, p) / std::pow(1.0 + eps, p) * pinsker_constant(k, r, varsigma0);
}

// ---------------------------------------------------------------------------
// Kernel family

/// S_z(x) = sum_m sum_j z_{m,j} e_j(v_m(x)) chi(v_m(x)), v_m(x) = (x - x_m)/h.
/// Tables of D_{m,j} at the design points and at block quadrature nodes are
/// built once.
class KernelFamily {
public:
    struct Block {
        std::size_t first = 0;     // 0-based index of the first design point in the block
        std::size_t count = 0;
        std::vector<double> D;     // N x count
        std::vector<double> xq, wq;
        std::vector<double> Dq;    // N x Q
        std::vector<double> gram;  // N x N, int D_i D_j
    };

    explicit KernelFamily(PriorDesign d, std::size_t panels = 128) : d_(std::move(d)), chi_(d_.eta) {
        if (d_.t.size() != d_.M * d_.N || d_.x_tilde.size() != d_.M)
            throw dimension_error("kernel family: design tables do not match M x N");
        const std::size_t N = d_.N;
        const double dn = static_cast<double>(d_.n);
        const auto& rule = GaussLegendre<8>::get();
        blocks_.resize(d_.M);
        for (std::size_t m = 1; m <= d_.M; ++m) {
            Block& b = blocks_[m - 1];
            const double c = d_.x_tilde[m - 1];
            const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil((c - d_.h) * dn)));
            const auto hi = static_cast<std::size_t>(std::min(dn, std::floor((c + d_.h) * dn)));
            b.first = lo - 1;
            b.count = hi >= lo ? hi - lo + 1 : 0;
            b.D.assign(N * b.count, 0.0);
            for (std::size_t i = 0; i < b.count; ++i) {
                const double v = (static_cast<double>(lo + i) / dn - c) / d_.h;
                const double cv = std::abs(v) < 1.0 ? chi_(v) : 0.0;
                for (std::size_t j = 1; j <= N; ++j) b.D[(j - 1) * b.count + i] = interval_basis(j, v) * cv;
            }
            const double width = 2.0 / static_cast<double>(panels);
            for (std::size_t p = 0; p < panels; ++p) {
                const double mid = -1.0 + width * (static_cast<double>(p) + 0.5);
                for (std::size_t q = 0; q < 8; ++q) {
                    const double v = mid + 0.5 * width * rule.nodes[q];
                    b.xq.push_back(c + d_.h * v);
                    b.wq.push_back(d_.h * 0.5 * width * rule.weights[q]);
                }
            }
            const std::size_t Q = b.xq.size();
            b.Dq.assign(N * Q, 0.0);
            for (std::size_t q = 0; q < Q; ++q) {
                const double v = (b.xq[q] - c) / d_.h;
                const double cv = chi_(v);
                for (std::size_t j = 1; j <= N; ++j) b.Dq[(j - 1) * Q + q] = interval_basis(j, v) * cv;
            }
            b.gram.assign(N * N, 0.0);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (std::size_t q = 0; q < Q; ++q) s += b.wq[q] * b.Dq[i * Q + q] * b.Dq[j * Q + q];
                    b.gram[i * N + j] = b.gram[j * N + i] = s;
                }
        }
        ebar_chi_.resize(N);
        ebar_chi2_.resize(N);
        for (std::size_t j = 1; j <= N; ++j) {
            ebar_chi_[j - 1] = ebar(j, chi_);
            ebar_chi2_[j - 1] = ebar(j, [&](double v) { const double c = chi_(v); return c * c; });
        }
    }

    const PriorDesign& design() const noexcept { return d_; }
    const Mollifier& mollifier() const noexcept { return chi_; }
    const Block& block(std::size_t m) const { return blocks_.at(m - 1); }
    double ebar_chi(std::size_t j) const { return ebar_chi_.at(j - 1); }
    double ebar_chi2(std::size_t j) const { return ebar_chi2_.at(j - 1); }

    double D(std::size_t m, std::size_t j, double x) const {
        const double v = (x - d_.x_tilde.at(m - 1)) / d_.h;
        if (std::abs(v) >= 1.0) return 0.0;
        return interval_basis(j, v) * chi_(v);
    }

    double eval(std::span<const double> z, double x) const {
        if (z.size() != d_.M * d_.N) throw dimension_error("kernel family: z must be M x N");
        double s = 0.0;
        for (std::size_t m = 1; m <= d_.M; ++m) {
            const double v = (x - d_.x_tilde[m - 1]) / d_.h;
            if (std::abs(v) >= 1.0) continue;
            const double cv = chi_(v);
            for (std::size_t j = 1; j <= d_.N; ++j) s += z[(m - 1) * d_.N + (j - 1)] * interval_basis(j, v) * cv;
        }
        return s;
    }

    /// Coefficients z_{m,j} = t_{m,j} zeta_{m,j}, zeta standard gaussian.
    std::vector<double> draw_prior(Rng& rng) const {
        std::normal_distribution<double> gauss;
        std::vector<double> z(d_.t.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = d_.t[i] * gauss(rng);
        return z;
    }

private:
    PriorDesign d_;
    Mollifier chi_;
    std::vector<Block> blocks_;
    std::vector<double> ebar_chi_, ebar_chi2_;
};

/// psi sum with mollifier losses, sum e_bar(chi)^2 y/(e_bar(chi^2) y + 1).
inline double psi_sum(const Mollifier& chi, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t j = 1; j <= y.size(); ++j) {
        const double a = ebar(j, chi);
        const double b = ebar(j, [&](double v) { const double c = chi(v); return c * c; });
        s += a * a * y[j - 1] / (b * y[j - 1] + 1.0);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Prior draws evaluated on the design and quadrature nodes

/// S_z and g^2(., S_z) for one draw z.
struct DrawState {
    std::vector<double> s;                // S at design points
    std::vector<std::vector<double>> sq;  // S at block quadrature nodes
    std::vector<double> g2;               // at design points
    double aggregate = 0.0;               // int aggregate(S)
    double varsigma = 0.0;                // int g^2(x, S)
};

class DrawEvaluator {
public:
    DrawEvaluator(const KernelFamily& fam, const ScaleSpec& spec) : fam_(fam), spec_(spec) {
        local0_ = integrate_01([&](double x) { return spec.local(x, 0.0); });
        agg0_ = spec.aggregate(0.0);
    }

    DrawState operator()(std::span<const double> z) const {
        const auto& d = fam_.design();
        const std::size_t n = d.n, N = d.N;
        DrawState st;
        st.s.assign(n, 0.0);
        st.sq.resize(d.M);
        double agg = agg0_, local = local0_;
        for (std::size_t m = 1; m <= d.M; ++m) {
            const auto& b = fam_.block(m);
            const double* zm = z.data() + (m - 1) * N;
            for (std::size_t j = 0; j < N; ++j) {
                if (zm[j] == 0.0) continue;
                for (std::size_t i = 0; i < b.count; ++i) st.s[b.first + i] += zm[j] * b.D[j * b.count + i];
            }
            const std::size_t Q = b.xq.size();
            auto& sq = st.sq[m - 1];
            sq.assign(Q, 0.0);
            for (std::size_t j = 0; j < N; ++j) {
                if (zm[j] == 0.0) continue;
                for (std::size_t q = 0; q < Q; ++q) sq[q] += zm[j] * b.Dq[j * Q + q];
            }
            for (std::size_t q = 0; q < Q; ++q) {
                if (spec_.has_aggregate()) agg += b.wq[q] * (spec_.aggregate(sq[q]) - agg0_);
                local += b.wq[q] * (spec_.local(b.xq[q], sq[q]) - spec_.local(b.xq[q], 0.0));
            }
        }
        st.aggregate = spec_.has_aggregate() ? agg : 0.0;
        st.varsigma = local + st.aggregate;
        st.g2.resize(n);
        const double dn = static_cast<double>(n);
        for (std::size_t l = 0; l < n; ++l) {
            const double v = spec_.local(static_cast<double>(l + 1) / dn, st.s[l]) + st.aggregate;
            if (!(v > 0.0)) throw numeric_error("g^2 is not positive; scale spec violates its floor");
            st.g2[l] = v;
        }
        return st;
    }

private:
    const KernelFamily& fam_;
    const ScaleSpec& spec_;
    double local0_ = 0.0, agg0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Van Trees bounds

/// tau_bar^2 / (F + B + I).
inline double van_trees_bound(double tau_bar, double F, double B, double I) {
    if (!(F >= 0.0) || !(B >= 0.0)) throw domain_error("van Trees terms F and B must be nonnegative");
    if (!(I > 0.0)) throw domain_error("van Trees prior information must be positive");
    return tau_bar * tau_bar / (F + B + I);
}

/// Per-coordinate terms and the summed bound, plus the Bayes risk of a
/// reference estimator when one was run.
struct VanTreesReport {
    std::vector<double> F, B, I, tau_bar, terms;
    double bound = 0.0;
    std::size_t draws = 0;
    std::string reference;
    double bayes_mc = std::numeric_limits<double>::quiet_NaN();
    double bayes_se = std::numeric_limits<double>::quiet_NaN();
    double sandwich_margin() const { return bayes_mc + 3.0 * bayes_se - bound; }
};

/// Prior on a scalar parameter: gaussian N(0, t^2), or a discrete rule
/// with explicitly supplied Fisher information.
struct ScalarPrior {
    bool gaussian = true;
    double t = 1.0;
    std::vector<double> nodes, weights;
    std::optional<double> information;

    static ScalarPrior normal(double t) {
        if (!(t > 0.0)) throw config_error("gaussian prior needs t > 0");
        ScalarPrior p;
        p.t = t;
        return p;
    }

    static ScalarPrior custom(std::vector<double> nodes, std::vector<double> weights,
                              std::optional<double> information = std::nullopt) {
        if (nodes.empty() || nodes.size() != weights.size()) throw dimension_error("custom prior: nodes and weights differ");
        ScalarPrior p;
        p.gaussian = false;
        p.nodes = std::move(nodes);
        p.weights = std::move(weights);
        p.information = information;
        return p;
    }

    double fisher() const {
        if (gaussian) return 1.0 / (t * t);
        if (!information) throw config_error("non-gaussian prior needs its Fisher information supplied");
        return *information;
    }

    template <typename F>
    double expect(F&& f) const {
        if (gaussian) return GaussHermite<100>::get().expect(f, t);
        double s = 0.0, w = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            s += weights[i] * f(nodes[i]);
            w += weights[i];
        }
        return s / w;
    }
};

/// Scalar location family S_z = z profile under the scale spec, tau(z) = z.
struct ScalarModel {
    RealFn profile;
    ScaleSpec spec;
    std::size_t n = 0;
};

inline VanTreesReport scalar_van_trees(const ScalarModel& model, const ScalarPrior& prior) {
    if (model.n < 1) throw config_error("scalar model needs n >= 1");
    const double I = prior.fisher();
    const std::size_t n = model.n;
    const double dn = static_cast<double>(n);
    std::vector<double> ph(n);
    for (std::size_t l = 1; l <= n; ++l) ph[l - 1] = model.profile(static_cast<double>(l) / dn);
    const bool dependent = !model.spec.signal_independent();
    auto terms = [&](double z, bool want_B) {
        double agg = 0.0, cross = 0.0;
        if (model.spec.has_aggregate()) {
            agg = integrate_01([&](double x) { return model.spec.aggregate(z * model.profile(x)); });
            if (want_B)
                cross = integrate_01([&](double x) {
                    const double p = model.profile(x);
                    return model.spec.aggregate_derivative(z * p) * p;
                });
        }
        double F = 0.0, B = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double x = static_cast<double>(l + 1) / dn;
            const double g2 = model.spec.local(x, z * ph[l]) + agg;
            F += ph[l] * ph[l] / g2;
            if (want_B) {
                const double L = model.spec.local_derivative(x, z * ph[l]) * ph[l] + cross;
                B += 0.5 * L * L / (g2 * g2);
            }
        }
        return std::pair{F, B};
    };
    VanTreesReport rep;
    rep.F = {prior.expect([&](double z) { return terms(z, false).first; })};
    rep.B = {dependent ? prior.expect([&](double z) { return terms(z, true).second; }) : 0.0};
    rep.I = {I};
    rep.tau_bar = {1.0};
    rep.bound = van_trees_bound(1.0, rep.F[0], rep.B[0], I);
    rep.terms = {rep.bound};
    return rep;
}

/// Classical bound 1/(n |phi|_n^2 / sigma0^2 + 1/t^2).
inline double scalar_closed_form(const RealFn& profile, double sigma0, std::size_t n, double t) {
    const double dn = static_cast<double>(n);
    double s = 0.0;
    for (std::size_t l = 1; l <= n; ++l) {
        const double p = profile(static_cast<double>(l) / dn);
        s += p * p;
    }
    return 1.0 / (dn * (s / dn) / (sigma0 * sigma0) + 1.0 / (t * t));
}

enum class ScalarEstimator { zero, least_squares, posterior_mean };

struct MonteCarloValue {
    double mean = 0.0, se = 0.0;
    std::size_t reps = 0;
};

/// E (z_hat - z)^2 with z from the gaussian prior and gaussian noise.
inline MonteCarloValue scalar_bayes_mc(const ScalarModel& model, const ScalarPrior& prior, ScalarEstimator est,
                                       std::size_t reps, std::uint64_t seed) {
    if (!prior.gaussian) throw config_error("scalar Bayes risk simulation needs a gaussian prior");
    if (reps < 2) throw config_error("Bayes risk simulation needs at least 2 replications");
    if (est == ScalarEstimator::posterior_mean && !model.spec.signal_independent())
        throw config_error("posterior mean is closed form only for a signal-independent scale");
    const std::size_t n = model.n;
    const double dn = static_cast<double>(n);
    std::vector<double> ph(n), x(n);
    double pp = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        x[l] = static_cast<double>(l + 1) / dn;
        ph[l] = model.profile(x[l]);
        pp += ph[l] * ph[l];
    }
    if (est == ScalarEstimator::least_squares && !(pp > 0.0)) throw domain_error("least squares needs a nonzero profile");
    std::vector<double> xi(n);
    detail::Moments mom;
    for (std::size_t i = 0; i < reps; ++i) {
        Rng rng = make_rng(derive_seed(seed, "scalar-prior", i));
        const double z = prior.t * std::normal_distribution<double>()(rng);
        Rng noise = make_rng(derive_seed(seed, "scalar-noise", i));
        NoiseLaw::gaussian().sample(noise, xi);
        double agg = 0.0;
        if (model.spec.has_aggregate())
            agg = integrate_01([&](double u) { return model.spec.aggregate(z * model.profile(u)); });
        double num = 0.0, den = 0.0, py = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double g2 = model.spec.local(x[l], z * ph[l]) + agg;
            const double y = z * ph[l] + std::sqrt(g2) * xi[l];
            num += ph[l] * y / g2;
            den += ph[l] * ph[l] / g2;
            py += ph[l] * y;
        }
        double zh = 0.0;
        if (est == ScalarEstimator::least_squares) zh = py / pp;
        if (est == ScalarEstimator::posterior_mean) zh = num / (den + 1.0 / (prior.t * prior.t));
        mom.add((zh - z) * (zh - z));
    }
    return {mom.mean(), mom.stderr_(), reps};
}

/// Sum over coordinates (m, j) of h e_bar_j(chi)^2 / (F + B + 1/t^2), with the
/// prior expectations in F and B replaced by averages over prior draws.
inline VanTreesReport aggregate_bound(const KernelFamily& fam, const ScaleSpec& spec, std::size_t draws = 200,
                                      std::uint64_t seed = 1) {
    if (draws < 1) throw config_error("aggregate bound needs at least one prior draw");
    const auto& d = fam.design();
    const std::size_t N = d.N, K = d.coordinates(), n = d.n;
    const bool dependent = !spec.signal_independent();
    if (dependent && !spec.has_derivative()) throw config_error("scale spec has no derivative handles");
    const DrawEvaluator evaluate(fam, spec);
    VanTreesReport rep;
    rep.F.assign(K, 0.0);
    rep.B.assign(K, 0.0);
    rep.I.assign(K, 0.0);
    rep.tau_bar.assign(K, 0.0);
    rep.terms.assign(K, 0.0);
    rep.draws = draws;
    const double dn = static_cast<double>(n);
    std::vector<double> inv2(n);
    std::vector<double> ld;
    for (std::size_t r = 0; r < draws; ++r) {
        Rng rng = make_rng(derive_seed(seed, "fisher", r));
        const auto z = fam.draw_prior(rng);
        const DrawState st = evaluate(z);
        double total_inv4 = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            inv2[l] = 1.0 / st.g2[l];
            total_inv4 += inv2[l] * inv2[l];
        }
        for (std::size_t m = 1; m <= d.M; ++m) {
            const auto& b = fam.block(m);
            const std::size_t Q = b.xq.size();
            ld.assign(b.count, 0.0);
            double block_inv4 = 0.0;
            if (dependent)
                for (std::size_t i = 0; i < b.count; ++i) {
                    const std::size_t l = b.first + i;
                    ld[i] = spec.local_derivative(static_cast<double>(l + 1) / dn, st.s[l]);
                    block_inv4 += inv2[l] * inv2[l];
                }
            for (std::size_t j = 0; j < N; ++j) {
                const std::size_t c = (m - 1) * N + j;
                double A = 0.0;
                if (dependent && spec.has_aggregate())
                    for (std::size_t q = 0; q < Q; ++q)
                        A += b.wq[q] * spec.aggregate_derivative(st.sq[m - 1][q]) * b.Dq[j * Q + q];
                double F = 0.0, B = 0.0;
                for (std::size_t i = 0; i < b.count; ++i) {
                    const double Dv = b.D[j * b.count + i];
                    const double w = inv2[b.first + i];
                    F += Dv * Dv * w;
                    if (dependent) {
                        const double L = ld[i] * Dv + A;
                        B += L * L * w * w;
                    }
                }
                if (A != 0.0) B += A * A * (total_inv4 - block_inv4);
                rep.F[c] += F;
                rep.B[c] += 0.5 * B;
            }
        }
    }
    for (std::size_t m = 1; m <= d.M; ++m)
        for (std::size_t j = 1; j <= N; ++j) {
            const std::size_t c = (m - 1) * N + (j - 1);
            rep.F[c] /= static_cast<double>(draws);
            rep.B[c] /= static_cast<double>(draws);
            rep.tau_bar[c] = std::sqrt(d.h) * fam.ebar_chi(j);
            const double tv = d.t[c];
            if (tv > 0.0) {
                rep.I[c] = 1.0 / (tv * tv);
                rep.terms[c] = van_trees_bound(rep.tau_bar[c], rep.F[c], rep.B[c], rep.I[c]);
            } else {
                rep.I[c] = std::numeric_limits<double>::infinity();
            }
            rep.bound += rep.terms[c];
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Bayes risk over the kernel-family prior

struct BayesRisk {
    std::string estimator;
    double mean = 0.0, se = 0.0;
    std::size_t reps = 0;
};

/// Average of |S_hat - S_z|^2 (integral norm on [0,1]) over prior draws z
/// and gaussian noise. Every estimator sees the same draws.
inline std::vector<BayesRisk> bayes_risk_mc(const KernelFamily& fam, const ScaleSpec& spec,
                                            const std::vector<EstimatorKind>& kinds, std::size_t reps,
                                            std::uint64_t seed, const ProcedureConfig& cfg = {}) {
    if (reps < 2) throw config_error("Bayes risk simulation needs at least 2 replications");
    for (auto k : kinds)
        if (k == EstimatorKind::fixed) throw config_error("Bayes risk supports the zero, oracle and adaptive estimators");
    const auto& d = fam.design();
    const std::size_t n = d.n, N = d.N, M = d.M;
    const AdaptiveProcedure proc(n, cfg);
    std::size_t L = 1;
    for (const auto& w : proc.weights()) L = std::max(L, w.support);
    // P[(m, j), l] = <phi_l, D_{m,j}>
    std::vector<double> P(M * N * L, 0.0);
    for (std::size_t m = 1; m <= M; ++m) {
        const auto& b = fam.block(m);
        const std::size_t Q = b.xq.size();
        for (std::size_t l = 1; l <= L; ++l) {
            std::vector<double> pw(Q);
            for (std::size_t q = 0; q < Q; ++q) pw[q] = b.wq[q] * phi(l, b.xq[q]);
            for (std::size_t j = 0; j < N; ++j) {
                double s = 0.0;
                for (std::size_t q = 0; q < Q; ++q) s += pw[q] * b.Dq[j * Q + q];
                P[((m - 1) * N + j) * L + (l - 1)] = s;
            }
        }
    }
    const DrawEvaluator evaluate(fam, spec);
    std::vector<detail::Moments> mom(kinds.size());
    std::vector<double> xi(n), y(n);
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rng = make_rng(derive_seed(seed, "prior", r));
        const auto z = fam.draw_prior(rng);
        const DrawState st = evaluate(z);
        Rng noise = make_rng(derive_seed(seed, "noise", r));
        NoiseLaw::gaussian().sample(noise, xi);
        for (std::size_t l = 0; l < n; ++l) y[l] = st.s[l] + std::sqrt(st.g2[l]) * xi[l];
        double norm_s = 0.0;
        for (std::size_t m = 1; m <= M; ++m) {
            const auto& G = fam.block(m).gram;
            const double* zm = z.data() + (m - 1) * N;
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j) norm_s += zm[i] * G[i * N + j] * zm[j];
        }
        const SpectralData sd = spectral_transform(y, proc.basis());
        for (std::size_t e = 0; e < kinds.size(); ++e) {
            const WeightVector* w = nullptr;
            WeightVector oracle;
            if (kinds[e] == EstimatorKind::adaptive) {
                w = &select(proc.weights(), sd, proc.rho());
            } else if (kinds[e] == EstimatorKind::oracle) {
                oracle = oracle_weight(d.k, d.r, st.varsigma, n, cfg);
                w = &oracle;
            }
            double err = norm_s;
            if (w) {
                const std::size_t S = std::min(w->support, L);
                double cc = 0.0, cross = 0.0;
                for (std::size_t l = 0; l < S; ++l) {
                    const double c = w->lambda[l] * sd.theta_hat[l];
                    cc += c * c;
                    for (std::size_t i = 0; i < M * N; ++i) cross += c * z[i] * P[i * L + l];
                }
                err += cc - 2.0 * cross;
            }
            mom[e].add(std::max(0.0, err));
        }
    }
    std::vector<BayesRisk> out;
    for (std::size_t e = 0; e < kinds.size(); ++e)
        out.push_back({Estimator{kinds[e], std::nullopt}.name(), mom[e].mean(), mom[e].stderr_(), reps});
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct LowerBoundConfig {
    int k = 1;
    double r = 20.0;
    std::size_t n = 1001;
    double eps = 0.1;
    double eta = 0.1;
    std::optional<std::size_t> N;
    std::size_t draws = 200;
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    ScaleSpec spec = ScaleSpec::econometric(1, 1, 1, 0);
    std::vector<EstimatorKind> estimators{EstimatorKind::zero, EstimatorKind::oracle, EstimatorKind::adaptive};
};

struct LowerBoundReport {
    PriorDesign design;
    VanTreesReport bound;
    std::vector<BayesRisk> bayes;
    double asymptotic_constant = 0.0;  // limit of n^{2k/(2k+1)} times the bound
    double normalized_bound = 0.0;     // n^{2k/(2k+1)} times the bound

    // min over estimators of Bayes risk + 3 se - bound
    double sandwich_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& b : bayes) m = std::min(m, b.mean + 3.0 * b.se - bound.bound);
        return m;
    }
};

inline LowerBoundReport lower_bound_report(const LowerBoundConfig& c, const ProcedureConfig& cfg = {}) {
    CalibrationOptions opts;
    opts.N = c.N;
    opts.eta = c.eta;
    LowerBoundReport rep;
    rep.design = calibrate_prior(c.k, c.r, c.n, c.eps, c.spec, opts);
    const KernelFamily fam(rep.design);
    rep.bound = aggregate_bound(fam, c.spec, c.draws, derive_seed(c.seed, "bound"));
    rep.bayes = bayes_risk_mc(fam, c.spec, c.estimators, c.reps, derive_seed(c.seed, "bayes"), cfg);
    for (const auto& b : rep.bayes)
        if (b.estimator == "adaptive") {
            rep.bound.reference = b.estimator;
            rep.bound.bayes_mc = b.mean;
            rep.bound.bayes_se = b.se;
        }
    rep.asymptotic_constant = asymptotic_bound_constant(c.k, c.r, c.eps, rep.design.varsigma0);
    rep.normalized_bound = std::pow(static_cast<double>(c.n), 2.0 * c.k / (2.0 * c.k + 1.0)) * rep.bound.bound;
    return rep;
}

}  // namespace hetreg
