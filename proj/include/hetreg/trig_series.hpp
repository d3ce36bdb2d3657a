#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "hetreg/grid_basis.hpp"

namespace hetreg {

/// a_j = sum_{i=0..k} (2 pi [j/2])^{2i}; the i = 0 term is 1 for every j,
/// so a_1 = 1 (the squared L2 norm of phi_1 and of nothing else).
inline double sobolev_weight(std::size_t j, int k) {
    const double w = two_pi * static_cast<double>(frequency(j));
    const double w2 = w * w;
    double term = 1.0, sum = 1.0;
    for (int i = 1; i <= k; ++i) {
        term *= w2;
        sum += term;
    }
    return sum;
}

/// Finite trigonometric series sum_{j=1..J} c_j phi_j on [0,1].
class TrigSeries {
public:
    TrigSeries() = default;
    explicit TrigSeries(std::vector<double> coef) : coef_(std::move(coef)) {}

    // Sparse construction from (index, coefficient) pairs, 1-based indices.
    static TrigSeries from_terms(std::initializer_list<std::pair<std::size_t, double>> terms) {
        std::size_t J = 0;
        for (const auto& [j, c] : terms) J = std::max(J, j);
        std::vector<double> coef(J, 0.0);
        for (const auto& [j, c] : terms) coef[j - 1] += c;
        return TrigSeries(std::move(coef));
    }

    std::size_t size() const noexcept { return coef_.size(); }
    const std::vector<double>& coefficients() const noexcept { return coef_; }

    double coefficient(std::size_t j) const noexcept {
        return (j >= 1 && j <= coef_.size()) ? coef_[j - 1] : 0.0;
    }

    double operator()(double x) const noexcept {
        double s = 0.0;
        for (std::size_t j = 1; j <= coef_.size(); ++j)
            if (coef_[j - 1] != 0.0) s += coef_[j - 1] * phi(j, x);
        return s;
    }

    // p-th derivative at x.
    double derivative(double x, int p = 1) const noexcept {
        if (p == 0) return (*this)(x);
        double s = 0.0;
        const double shift = 0.5 * std::numbers::pi * p;
        for (std::size_t j = 2; j <= coef_.size(); ++j) {
            const double c = coef_[j - 1];
            if (c == 0.0) continue;
            const double w = two_pi * static_cast<double>(frequency(j));
            const double arg = w * x + shift;
            s += c * sqrt2 * std::pow(w, p) * ((j % 2 == 0) ? std::cos(arg) : std::sin(arg));
        }
        return s;
    }

    // ||S||^2 over [0,1], exact by orthonormality.
    double l2_norm_sq() const noexcept {
        double s = 0.0;
        for (double c : coef_) s += c * c;
        return s;
    }

    // ||S^{(p)}||^2, exact.
    double derivative_norm_sq(int p) const noexcept {
        double s = 0.0;
        for (std::size_t j = 2; j <= coef_.size(); ++j) {
            const double w = two_pi * static_cast<double>(frequency(j));
            s += coef_[j - 1] * coef_[j - 1] * std::pow(w, 2 * p);
        }
        return p == 0 ? l2_norm_sq() : s;
    }

    /// sum_j a_j theta_j^2 = sum_{i=0..k} ||S^{(i)}||^2.
    double sobolev_norm(int k) const noexcept {
        double s = 0.0;
        for (std::size_t j = 1; j <= coef_.size(); ++j) s += sobolev_weight(j, k) * coef_[j - 1] * coef_[j - 1];
        return s;
    }

    double sup_norm_bound() const noexcept {
        double s = 0.0;
        for (std::size_t j = 1; j <= coef_.size(); ++j) s += std::abs(coef_[j - 1]) * (j == 1 ? 1.0 : sqrt2);
        return s;
    }

    // Samples on the design grid (aliasing handled by direct evaluation when J > n).
    std::vector<double> on_grid(const DesignGrid& grid) const {
        if (coef_.size() <= grid.size()) return GridBasis(grid).synthesize(coef_);
        std::vector<double> v(grid.size());
        for (std::size_t l = 1; l <= grid.size(); ++l) v[l - 1] = (*this)(grid.x(l));
        return v;
    }

    TrigSeries scaled(double factor) const {
        std::vector<double> c = coef_;
        for (double& v : c) v *= factor;
        return TrigSeries(std::move(c));
    }

private:
    std::vector<double> coef_;
};

}  // namespace hetreg
