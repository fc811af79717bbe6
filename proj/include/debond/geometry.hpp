#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "debond/func.hpp"

namespace debond {

// Subregions of the space-time domain swept by the growing crack, split by the
// characteristics through (0,0) and (0,l0). Points past the front are outside.
enum class Region { omega1, omega2, omega3, outside };

// Debonding front in characteristic coordinates. The stored object is the
// inverse hitting time lambda on a uniform y-grid starting at y = -l0 with
// lambda(-l0) = 0: the front passes through x at time lambda(x - ... ), and
// phi(t) = t - ell(t), psi(t) = t + ell(t), omega = phi o psi^{-1} all reduce
// to lookups in the same table. Between nodes lambda is piecewise linear, so
// ell_dot is piecewise constant (right-continuous at nodes).
//
// Invariants: lambda strictly increasing with slope >= 1 (front speed in
// [0,1)); psi-nodes 2*lambda_i - y_i strictly increasing.
class DebondingFront {
public:
    DebondingFront(double l0, double dy, std::vector<double> lambda)
        : l0_(l0), dy_(dy), lam_(std::move(lambda)) {
        detail::require(l0_ > 0.0, "front: l0 must be positive");
        detail::require(dy_ > 0.0, "front: grid spacing must be positive");
        detail::require(lam_.size() >= 2, "front: need at least two lambda samples");
        detail::require(std::abs(lam_.front()) <= 1e-12 * std::max(1.0, l0_),
                        "front: lambda must vanish at y = -l0");
        lam_.front() = 0.0;
        const double min_slope = 1.0 - 1e-9;
        for (std::size_t i = 1; i < lam_.size(); ++i) {
            const double slope = (lam_[i] - lam_[i - 1]) / dy_;
            if (!(slope >= min_slope))
                throw std::invalid_argument("front: speed must stay in [0,1)");
            if (slope < 1.0) lam_[i] = lam_[i - 1] + dy_;  // clip roundoff at speed 0
        }
        psi_.resize(lam_.size());
        for (std::size_t i = 0; i < lam_.size(); ++i)
            psi_[i] = 2.0 * lam_[i] - y_at(i);
    }

    // Non-moving front: lambda(y) = y + l0 up to y_max.
    static DebondingFront stationary(double l0, double y_max, double dy) {
        detail::require(y_max > -l0, "front: y_max must exceed -l0");
        const auto n = static_cast<std::size_t>(std::ceil((y_max + l0) / dy - 1e-12));
        std::vector<double> lam(n + 1);
        for (std::size_t i = 0; i <= n; ++i) lam[i] = dy * static_cast<double>(i);
        return DebondingFront(l0, dy, std::move(lam));
    }

    double l0() const noexcept { return l0_; }
    double y_front() const noexcept { return -l0_; }
    double y_back() const noexcept { return y_at(lam_.size() - 1); }
    double dy() const noexcept { return dy_; }
    std::size_t size() const noexcept { return lam_.size(); }
    double y_at(std::size_t i) const noexcept { return -l0_ + dy_ * static_cast<double>(i); }
    double lambda_at(std::size_t i) const noexcept { return lam_[i]; }
    double t_max() const noexcept { return lam_.back(); }

    double lambda(double y) const {
        const auto [i, s] = locate_y(y);
        return lam_[i] + s * (lam_[i + 1] - lam_[i]);
    }

    // arrival-time slope 1/phi_dot, piecewise constant
    double lambda_dot(double y) const {
        const auto i = locate_y(y).first;
        return (lam_[i + 1] - lam_[i]) / dy_;
    }

    double phi(double t) const {
        const auto [i, s] = locate_t(t);
        return y_at(i) + s * dy_;
    }

    double ell(double t) const { return t - phi(t); }

    double ell_dot(double t) const {
        const auto i = locate_t(t).first;
        return 1.0 - dy_ / (lam_[i + 1] - lam_[i]);
    }

    double psi(double t) const { return 2.0 * t - phi(t); }

    double psi_inv(double s) const {
        const auto [i, r] = locate_psi(s);
        return lam_[i] + r * (lam_[i + 1] - lam_[i]);
    }

    double omega(double s) const {
        const auto [i, r] = locate_psi(s);
        return y_at(i) + r * dy_;
    }

    double omega_dot(double s) const {
        const auto i = locate_psi(s).first;
        return dy_ / (psi_[i + 1] - psi_[i]);
    }

private:
    // segment index plus fractional position; extrapolates on the end segments
    std::pair<std::size_t, double> locate_y(double y) const {
        double u = (y + l0_) / dy_;
        double fi = std::floor(u);
        std::size_t i = fi <= 0.0 ? 0
                                  : std::min(static_cast<std::size_t>(fi), lam_.size() - 2);
        return {i, u - static_cast<double>(i)};
    }

    std::pair<std::size_t, double> locate_in(const std::vector<double>& nodes, double v) const {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
        std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
        i = std::min(i, nodes.size() - 2);
        return {i, (v - nodes[i]) / (nodes[i + 1] - nodes[i])};
    }

    std::pair<std::size_t, double> locate_t(double t) const { return locate_in(lam_, t); }
    std::pair<std::size_t, double> locate_psi(double s) const { return locate_in(psi_, s); }

    double l0_;
    double dy_;
    std::vector<double> lam_;
    std::vector<double> psi_;
};

// Builds a front from a prescribed speed history on [0, T]. The speed must
// stay in [0, 1). Arc construction goes through a fine time table (composite
// Simpson for ell, then inversion of phi onto the uniform y-grid).
inline DebondingFront front_from_ell_dot(double l0, const std::function<double(double)>& ell_dot,
                                         double T, double dy, std::size_t fine_per_cell = 64) {
    detail::require(l0 > 0.0, "front_from_ell_dot: l0 must be positive");
    detail::require(T > 0.0, "front_from_ell_dot: horizon must be positive");
    const auto n_cells = static_cast<std::size_t>(std::ceil(T / dy)) * fine_per_cell;
    const double dt = T / static_cast<double>(n_cells);
    std::vector<double> tt(n_cells + 1), ph(n_cells + 1);
    double ell = l0;
    tt[0] = 0.0;
    ph[0] = -l0;
    for (std::size_t i = 0; i < n_cells; ++i) {
        const double t0 = dt * static_cast<double>(i);
        const double t1 = (i + 1 == n_cells) ? T : t0 + dt;
        const double s0 = ell_dot(t0), sm = ell_dot(0.5 * (t0 + t1)), s1 = ell_dot(t1);
        if (!(s0 >= 0.0 && s0 < 1.0 && sm >= 0.0 && sm < 1.0 && s1 >= 0.0 && s1 < 1.0))
            throw std::domain_error("front_from_ell_dot: speed must stay in [0,1)");
        ell += (t1 - t0) / 6.0 * (s0 + 4.0 * sm + s1);
        tt[i + 1] = t1;
        ph[i + 1] = t1 - ell;
    }
    const double y_max = ph.back();
    const auto n_y = static_cast<std::size_t>(std::ceil((y_max + l0) / dy - 1e-12));
    std::vector<double> lam(n_y + 1);
    lam[0] = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 1; i <= n_y; ++i) {
        const double y = -l0 + dy * static_cast<double>(i);
        while (j + 1 < ph.size() && ph[j + 1] < y) ++j;
        if (j + 1 >= ph.size()) {
            lam[i] = tt.back() + (y - ph.back());  // front already stopped by T
        } else {
            const double r = (y - ph[j]) / (ph[j + 1] - ph[j]);
            lam[i] = tt[j] + r * (tt[j + 1] - tt[j]);
        }
    }
    return DebondingFront(l0, dy, std::move(lam));
}

// Region of a point relative to the front. Closed predicates, checked in the
// order omega1, omega2, omega3; the kernel branches agree on the shared
// interfaces whenever the data are compatible, so ties are harmless. Points
// with t > x and t + x > l0 sit beyond the single-reflection window.
inline Region classify(double t, double x, const DebondingFront& front) {
    if (t < 0.0 || x < 0.0 || x > front.ell(t)) return Region::outside;
    if (t + x <= front.l0()) return t <= x ? Region::omega1 : Region::omega2;
    if (t <= x) return Region::omega3;
    throw std::domain_error("classify: point beyond the single-reflection window (t+x > l0, t > x)");
}

// Horizontal slice bounds of the backward influence region of (t, x): at
// height tau the slice is (gamma1, gamma2). Empty slices return gamma1 ==
// gamma2. In omega3 the right boundary switches from the reflected
// characteristic to the direct one at tau = psi_inv(t + x).
inline std::pair<double, double> r_bounds(double t, double x, double tau,
                                          const DebondingFront& front) {
    const Region reg = classify(t, x, front);
    if (reg == Region::outside || tau <= 0.0 || tau >= t) return {x, x};
    double g1 = x - t + tau;
    double g2 = x + t - tau;
    switch (reg) {
    case Region::omega1:
        break;
    case Region::omega2:
        g1 = std::abs(g1);
        break;
    case Region::omega3:
        if (tau <= front.psi_inv(t + x)) g2 = tau - front.omega(t + x);
        break;
    default:
        break;
    }
    if (g2 < g1) g2 = g1;
    return {g1, g2};
}

} // namespace debond
