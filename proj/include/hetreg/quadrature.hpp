#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>

#include "hetreg/errors.hpp"

namespace hetreg {

using RealFn = std::function<double(double)>;

/// Gauss-Legendre rule of fixed order on [-1, 1].
template <std::size_t Order>
    requires(Order >= 2)
struct GaussLegendre {
    std::array<double, Order> nodes{};
    std::array<double, Order> weights{};

    GaussLegendre() {
        // Newton iteration on P_Order from the Chebyshev initial guess.
        // Returns (P_Order(x), P'_Order(x)).
        auto legendre = [](double x) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= Order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            const double dp = static_cast<double>(Order) * (x * p1 - p0) / (x * x - 1.0);
            return std::array<double, 2>{p1, dp};
        };
        for (std::size_t i = 0; i < (Order + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(Order) + 0.5));
            for (int iter = 0; iter < 100; ++iter) {
                const auto [p, dp] = legendre(x);
                const double dx = p / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double dp = legendre(x)[1];
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[Order - 1 - i] = x;
            weights[i] = w;
            weights[Order - 1 - i] = w;
        }
        if constexpr (Order % 2 == 1) nodes[Order / 2] = 0.0;
    }

    static const GaussLegendre& get() {
        static const GaussLegendre rule;
        return rule;
    }

    // Integral of f over [a, b] with a single panel.
    template <typename F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double sum = 0.0;
        for (std::size_t i = 0; i < Order; ++i) sum += weights[i] * f(mid + half * nodes[i]);
        return half * sum;
    }
};

/// Gauss-Hermite rule for the weight exp(-x^2), built once per order by
/// Newton iteration on the normalized Hermite recurrence.
template <std::size_t Order>
struct GaussHermite {
    std::array<double, Order> nodes{};
    std::array<double, Order> weights{};

    static const GaussHermite& get() {
        static const GaussHermite rule = build();
        return rule;
    }

    // E f(Z) for Z ~ N(0, sd^2).
    template <typename F>
    double expect(F&& f, double sd = 1.0) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < Order; ++i) sum += weights[i] * f(std::numbers::sqrt2 * sd * nodes[i]);
        return sum / std::sqrt(std::numbers::pi);
    }

private:
    static GaussHermite build() {
        GaussHermite r;
        const double n = static_cast<double>(Order);
        const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
        double z = 0.0;
        for (std::size_t i = 0; i < (Order + 1) / 2; ++i) {
            if (i == 0)
                z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
            else if (i == 1)
                z -= 1.14 * std::pow(n, 0.426) / z;
            else if (i == 2)
                z = 1.86 * z - 0.86 * r.nodes[0];
            else if (i == 3)
                z = 1.91 * z - 0.91 * r.nodes[1];
            else
                z = 2.0 * z - r.nodes[i - 2];
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = pim4, p2 = 0.0;
                for (std::size_t j = 0; j < Order; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    const double dj = static_cast<double>(j);
                    p1 = z * std::sqrt(2.0 / (dj + 1.0)) * p2 - std::sqrt(dj / (dj + 1.0)) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
            }
            r.nodes[i] = z;
            r.nodes[Order - 1 - i] = -z;
            r.weights[i] = r.weights[Order - 1 - i] = 2.0 / (pp * pp);
        }
        return r;
    }
};

struct QuadratureOptions {
    std::size_t initial_panels = 16;  // 16 panels x 16 nodes = 256 nodes
    double rel_tol = 1e-10;
    int max_doublings = 12;
};

namespace detail {

template <typename F>
double composite_gl16(F&& f, double a, double b, std::size_t panels, double& abs_sum) {
    const auto& rule = GaussLegendre<16>::get();
    const double width = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    abs_sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + width * static_cast<double>(p);
        const double mid = lo + 0.5 * width;
        double s = 0.0, sa = 0.0;
        for (std::size_t i = 0; i < 16; ++i) {
            const double v = f(mid + 0.5 * width * rule.nodes[i]);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "integrand is not finite at x = " << mid + 0.5 * width * rule.nodes[i];
                throw numeric_error(os.str());
            }
            s += rule.weights[i] * v;
            sa += rule.weights[i] * std::abs(v);
        }
        total += 0.5 * width * s;
        abs_sum += 0.5 * width * sa;
    }
    return total;
}

}  // namespace detail

/// Composite 16-point Gauss-Legendre on [a, b], doubling the panel count
/// until successive estimates differ by less than rel_tol relative to
/// the integral of |f| (which also covers integrals that cancel to zero).
template <typename F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
    if (!(b > a)) return 0.0;
    std::size_t panels = opts.initial_panels;
    double abs_sum = 0.0;
    double previous = detail::composite_gl16(f, a, b, panels, abs_sum);
    for (int d = 0; d < opts.max_doublings; ++d) {
        panels *= 2;
        const double current = detail::composite_gl16(f, a, b, panels, abs_sum);
        const double change = std::abs(current - previous);
        if (change <= opts.rel_tol * std::max(std::abs(current), abs_sum) || change == 0.0)
            return current;
        previous = current;
    }
    std::ostringstream os;
    os << "quadrature on [" << a << ", " << b << "] did not converge after " << opts.max_doublings
       << " panel doublings (last estimate " << previous << ")";
    throw numeric_error(os.str());
}

template <typename F>
double integrate_01(F&& f, const QuadratureOptions& opts = {}) {
    return integrate(std::forward<F>(f), 0.0, 1.0, opts);
}

}  // namespace hetreg
