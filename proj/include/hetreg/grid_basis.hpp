#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hetreg/errors.hpp"

namespace hetreg {

inline constexpr double sqrt2 = std::numbers::sqrt2;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Equispaced design x_j = j/n, j = 1..n, with n odd and at least 3.
class DesignGrid {
public:
    explicit DesignGrid(std::size_t n) : n_(n) {
        if (n < 3) throw config_error("n must be at least 3, got " + std::to_string(n));
        if (n % 2 == 0) throw config_error("n must be odd, got " + std::to_string(n));
    }

    std::size_t size() const noexcept { return n_; }

    // 1-based design point.
    double x(std::size_t j) const noexcept {
        return static_cast<double>(j) / static_cast<double>(n_);
    }

    std::vector<double> points() const {
        std::vector<double> pts(n_);
        for (std::size_t j = 1; j <= n_; ++j) pts[j - 1] = x(j);
        return pts;
    }

    friend bool operator==(const DesignGrid&, const DesignGrid&) = default;

private:
    std::size_t n_;
};

/// Trigonometric basis on [0,1]: phi_1 = 1, phi_j = sqrt2 cos(2 pi [j/2] x)
/// for even j and sqrt2 sin(2 pi [j/2] x) for odd j >= 3.
inline double phi(std::size_t j, double x) noexcept {
    if (j <= 1) return 1.0;
    const double arg = two_pi * static_cast<double>(j / 2) * x;
    return (j % 2 == 0) ? sqrt2 * std::cos(arg) : sqrt2 * std::sin(arg);
}

// Frequency [j/2] of basis function j.
constexpr std::size_t frequency(std::size_t j) noexcept { return j / 2; }

/// Basis values on an odd design grid. Arguments are reduced exactly in
/// integer arithmetic: phi_j(l/n) depends only on ([j/2] l) mod n, so two
/// tables of n values each cover the full n x n basis matrix.
class GridBasis {
public:
    explicit GridBasis(const DesignGrid& grid) : n_(grid.size()), cos_(n_), sin_(n_) {
        for (std::size_t m = 0; m < n_; ++m) {
            const double arg = two_pi * static_cast<double>(m) / static_cast<double>(n_);
            cos_[m] = sqrt2 * std::cos(arg);
            sin_[m] = sqrt2 * std::sin(arg);
        }
    }

    std::size_t size() const noexcept { return n_; }

    // phi_j(x_l), both indices 1-based.
    double operator()(std::size_t j, std::size_t l) const noexcept {
        if (j <= 1) return 1.0;
        const std::size_t idx = (frequency(j) * (l % n_)) % n_;
        return (j % 2 == 0) ? cos_[idx] : sin_[idx];
    }

    // Column of phi_j sampled over the grid.
    std::vector<double> samples(std::size_t j) const {
        std::vector<double> v(n_);
        for (std::size_t l = 1; l <= n_; ++l) v[l - 1] = (*this)(j, l);
        return v;
    }

    /// Coefficients (u, phi_j)_n for j = 1..jmax. Cosine and sine of the
    /// same frequency are accumulated in one pass.
    std::vector<double> analyze(std::span<const double> u, std::size_t jmax) const {
        if (u.size() != n_) throw dimension_error("analyze: vector length does not match grid");
        jmax = std::min(jmax, n_);
        std::vector<double> out(jmax, 0.0);
        const double inv_n = 1.0 / static_cast<double>(n_);
        if (jmax >= 1) {
            double s = 0.0;
            for (double v : u) s += v;
            out[0] = s * inv_n;
        }
        const std::size_t kmax = jmax / 2;
        for (std::size_t k = 1; k <= kmax; ++k) {
            double sc = 0.0, ss = 0.0;
            std::size_t idx = 0;
            for (std::size_t l = 1; l <= n_; ++l) {
                idx += k;
                if (idx >= n_) idx -= n_;
                sc += u[l - 1] * cos_[idx];
                ss += u[l - 1] * sin_[idx];
            }
            out[2 * k - 1] = sc * inv_n;
            if (2 * k < jmax) out[2 * k] = ss * inv_n;
        }
        return out;
    }

    /// Grid values of sum_j c_j phi_j for coefficients c_1..c_J (J <= n).
    std::vector<double> synthesize(std::span<const double> coef) const {
        if (coef.size() > n_) throw dimension_error("synthesize: more coefficients than grid points");
        std::vector<double> out(n_, coef.empty() ? 0.0 : coef[0]);
        const std::size_t J = coef.size();
        for (std::size_t k = 1; 2 * k - 1 < J; ++k) {
            const double cc = coef[2 * k - 1];
            const double cs = (2 * k < J) ? coef[2 * k] : 0.0;
            if (cc == 0.0 && cs == 0.0) continue;
            std::size_t idx = 0;
            for (std::size_t l = 1; l <= n_; ++l) {
                idx += k;
                if (idx >= n_) idx -= n_;
                out[l - 1] += cc * cos_[idx] + cs * sin_[idx];
            }
        }
        return out;
    }

private:
    std::size_t n_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

/// (u, v)_n = (1/n) sum_l u_l v_l.
inline double empiric_inner(std::span<const double> u, std::span<const double> v,
                            const DesignGrid& grid) {
    if (u.size() != grid.size() || v.size() != grid.size())
        throw dimension_error("empiric_inner: vectors must have length n = " +
                              std::to_string(grid.size()));
    double s = 0.0;
    for (std::size_t l = 0; l < u.size(); ++l) s += u[l] * v[l];
    return s / static_cast<double>(grid.size());
}

inline double empiric_norm_sq(std::span<const double> u, const DesignGrid& grid) {
    return empiric_inner(u, u, grid);
}

/// max_{i,j <= jmax} |(phi_i, phi_j)_n - Kr_ij|.
inline double gram_deviation(const DesignGrid& grid, std::size_t jmax) {
    const std::size_t n = grid.size();
    if (jmax > n) throw range_error("gram_deviation: jmax exceeds n");
    if (jmax == 0) return 0.0;
    const GridBasis basis(grid);
    // rows[j] holds phi_{j+1} on the grid, contiguous for the dot products below
    std::vector<double> rows(jmax * n);
    for (std::size_t j = 1; j <= jmax; ++j)
        for (std::size_t l = 1; l <= n; ++l) rows[(j - 1) * n + (l - 1)] = basis(j, l);
    const double inv_n = 1.0 / static_cast<double>(n);
    double worst = 0.0;
    for (std::size_t i = 0; i < jmax; ++i) {
        const double* a = rows.data() + i * n;
        for (std::size_t j = i; j < jmax; ++j) {
            const double* b = rows.data() + j * n;
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            std::size_t l = 0;
            for (; l + 4 <= n; l += 4) {
                s0 += a[l] * b[l];
                s1 += a[l + 1] * b[l + 1];
                s2 += a[l + 2] * b[l + 2];
                s3 += a[l + 3] * b[l + 3];
            }
            for (; l < n; ++l) s0 += a[l] * b[l];
            const double g = (s0 + s1 + s2 + s3) * inv_n;
            worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

}  // namespace hetreg
