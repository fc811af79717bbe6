#pragma once

#include <cmath>
#include <stdexcept>

#include "debond/field.hpp"
#include "debond/geometry.hpp"
#include "debond/problem.hpp"

namespace debond {

// Closed-form wave part of the window representation. Branches by region:
// pure superposition before any reflection, boundary reflection carrying the
// driving datum for t > x, front reflection through omega past the first
// characteristic. Zero outside the film; the branch values agree on the
// interfaces whenever the data are compatible, and the front line itself
// evaluates to zero.
inline double eval_A(double t, double x, const VData& d, const DebondingFront& front) {
    switch (classify(t, x, front)) {
    case Region::omega1:
        return 0.5 * (d.v0(x - t) + d.v0(x + t)) + 0.5 * d.v1.integral(x - t, x + t);
    case Region::omega2:
        return d.z(t - x) - 0.5 * d.v0(t - x) + 0.5 * d.v0(t + x) +
               0.5 * d.v1.integral(t - x, t + x);
    case Region::omega3: {
        const double m = -front.omega(x + t);
        return 0.5 * (d.v0(x - t) - d.v0(m)) + 0.5 * d.v1.integral(x - t, m);
    }
    default:
        return 0.0;
    }
}

// Pointwise time derivative of the wave part (classical away from the data's
// breakpoint characteristics).
inline double eval_At(double t, double x, const VData& d, const DebondingFront& front) {
    switch (classify(t, x, front)) {
    case Region::omega1:
        return 0.5 * (d.v0.derivative(x + t) - d.v0.derivative(x - t)) +
               0.5 * (d.v1(x + t) + d.v1(x - t));
    case Region::omega2:
        return d.z.derivative(t - x) - 0.5 * d.v0.derivative(t - x) +
               0.5 * d.v0.derivative(t + x) + 0.5 * (d.v1(t + x) - d.v1(t - x));
    case Region::omega3: {
        const double s = x + t;
        const double m = -front.omega(s);
        const double od = front.omega_dot(s);
        return -0.5 * d.v0.derivative(x - t) + 0.5 * od * d.v0.derivative(m) -
               0.5 * od * d.v1(m) + 0.5 * d.v1(x - t);
    }
    default:
        return 0.0;
    }
}

inline double eval_Ax(double t, double x, const VData& d, const DebondingFront& front) {
    switch (classify(t, x, front)) {
    case Region::omega1:
        return 0.5 * (d.v0.derivative(x + t) + d.v0.derivative(x - t)) +
               0.5 * (d.v1(x + t) - d.v1(x - t));
    case Region::omega2:
        return -d.z.derivative(t - x) + 0.5 * d.v0.derivative(t - x) +
               0.5 * d.v0.derivative(t + x) + 0.5 * (d.v1(t + x) + d.v1(t - x));
    case Region::omega3: {
        const double s = x + t;
        const double m = -front.omega(s);
        const double od = front.omega_dot(s);
        return 0.5 * d.v0.derivative(x - t) + 0.5 * od * d.v0.derivative(m) -
               0.5 * od * d.v1(m) - 0.5 * d.v1(x - t);
    }
    default:
        return 0.0;
    }
}

// Integral of a node-sampled kernel over the backward influence region R(t,x).
// Outer trapezoid over the kernel's time rows with the slice kinks (boundary
// reflection at tau = t-x, front reflection switch at tau = psi_inv(t+x))
// inserted exactly; inner integrals read the row prefix tables at the exact
// slice bounds.
inline double eval_H(double t, double x, const Field2D& kernel, const DebondingFront& front) {
    const Region reg = classify(t, x, front);
    if (reg == Region::outside || t <= 0.0) return 0.0;
    auto slice = [&](double tau) {
        const auto [g1, g2] = r_bounds(t, x, tau, front);
        if (g2 <= g1) return 0.0;
        return kernel.prefix_interp(tau, g2) - kernel.prefix_interp(tau, g1);
    };
    const double h = kernel.h();
    const double eps = 1e-12 * h;
    // slope kinks of the slice width, split exactly
    double kink = -1.0;
    if (reg == Region::omega2) kink = t - x;
    if (reg == Region::omega3) kink = front.psi_inv(t + x);
    if (kink <= eps || kink >= t - eps) kink = -1.0;
    double acc = 0.0, tprev = 0.0, sprev = slice(0.0);
    double row = kernel.t0() + h * std::ceil((0.0 - kernel.t0()) / h + 1e-12);
    if (row <= eps) row += h;
    bool kink_done = kink < 0.0;
    while (true) {
        double tk = row;
        if (!kink_done && kink < tk) tk = kink;
        if (tk >= t - eps) tk = t;
        const double sk = slice(tk);
        acc += 0.5 * (tk - tprev) * (sprev + sk);
        if (tk >= t) break;
        tprev = tk;
        sprev = sk;
        if (!kink_done && tk >= kink - eps) kink_done = true;
        if (tk >= row - eps) row += h;
    }
    return acc;
}

// Time derivative of the influence-region integral: kernel integrals along the
// slice boundary characteristics, branch by region.
inline double eval_Ht(double t, double x, const Field2D& k, const DebondingFront& front) {
    switch (classify(t, x, front)) {
    case Region::omega1:
        return k.char_integral(x + t, -1, 0.0, t) + k.char_integral(x - t, +1, 0.0, t);
    case Region::omega2:
        return k.char_integral(x + t, -1, 0.0, t) - k.char_integral(t - x, -1, 0.0, t - x) +
               k.char_integral(x - t, +1, t - x, t);
    case Region::omega3: {
        const double s = x + t;
        const double tau_r = front.psi_inv(s);
        return k.char_integral(x - t, +1, 0.0, t) -
               front.omega_dot(s) * k.char_integral(-front.omega(s), +1, 0.0, tau_r) +
               k.char_integral(s, -1, tau_r, t);
    }
    default:
        return 0.0;
    }
}

inline double eval_Hx(double t, double x, const Field2D& k, const DebondingFront& front) {
    switch (classify(t, x, front)) {
    case Region::omega1:
        return k.char_integral(x + t, -1, 0.0, t) - k.char_integral(x - t, +1, 0.0, t);
    case Region::omega2:
        return k.char_integral(x + t, -1, 0.0, t) + k.char_integral(t - x, -1, 0.0, t - x) -
               k.char_integral(x - t, +1, t - x, t);
    case Region::omega3: {
        const double s = x + t;
        const double tau_r = front.psi_inv(s);
        return -k.char_integral(x - t, +1, 0.0, t) -
               front.omega_dot(s) * k.char_integral(-front.omega(s), +1, 0.0, tau_r) +
               k.char_integral(s, -1, tau_r, t);
    }
    default:
        return 0.0;
    }
}

// Traces of v_x on the two moving boundaries. The kernel field is the same
// sampled combination fed to eval_H's caller (see solver.hpp); the loaded-end
// trace feeds the work-of-load ledger, the front trace the release-rate dual
// route.
inline double trace_vx0(double t, const VData& d, const Field2D& kernel) {
    return -d.z.derivative(t) + d.v0.derivative(t) + d.v1(t) +
           kernel.char_integral(t, -1, 0.0, t);
}

inline double trace_vx_ell(double t, const VData& d, const Field2D& kernel,
                           const DebondingFront& front) {
    const double ell = front.ell(t);
    const double speed = front.ell_dot(t);
    const double bracket = d.v0.derivative(ell - t) - d.v1(ell - t) -
                           kernel.char_integral(ell - t, +1, 0.0, t);
    return bracket / (1.0 + speed);
}

} // namespace debond
