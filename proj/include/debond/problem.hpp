#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "debond/func.hpp"

namespace debond {

// Data of one debonding evolution: film occupies [0, ell(t)] with ell(0) = l0,
// loaded end at x = 0 follows w(t), free end glued with toughness kappa.
// u0/u1 live on [0, l0] and vanish outside; kappa is read at the front
// position, clamped to its table left of l0. The optional body forcing is a
// plain callable f(t, x).
struct ProblemData {
    double l0 = 1.0;
    double nu = 0.0;
    Fn u0;
    Fn u1;
    Fn w;
    Fn kappa = Fn::constant(1.0);
    std::function<double(double, double)> forcing;

    void validate(double tol_compat = 1e-10) const {
        if (!(l0 > 0.0)) throw std::invalid_argument("data: l0 must be positive");
        if (!(nu >= 0.0)) throw std::invalid_argument("data: nu must be nonnegative");
        if (!u0.has_derivative())
            throw std::invalid_argument("data: u0 needs a pointwise derivative");
        if (!w.has_derivative())
            throw std::invalid_argument("data: w needs a pointwise derivative");
        if (std::abs(u0(l0)) > tol_compat)
            throw std::invalid_argument("data: u0 must vanish at the front (u0(l0) != 0)");
        if (std::abs(u0(0.0) - w(0.0)) > tol_compat)
            throw std::invalid_argument("data: u0(0) must match w(0)");
        const int samples = 64;
        for (int i = 0; i <= samples; ++i) {
            const double x = l0 * (1.0 + 2.0 * static_cast<double>(i) / samples);
            if (!(kappa(x) > 0.0))
                throw std::invalid_argument("data: kappa must be strictly positive");
        }
    }
};

// Same evolution after scaling out the damping: v = e^{nu t/2} u turns the
// damped wave into v_tt - v_xx - (nu^2/4) v = 0 with boundary datum
// z(t) = e^{nu t/2} w(t), v0 = u0, v1 = u1 + (nu/2) u0.
struct VData {
    double l0 = 1.0;
    double nu = 0.0;
    Fn z;
    Fn v0;
    Fn v1;
    Fn kappa = Fn::constant(1.0);
    std::function<double(double, double)> g; // e^{nu t/2} f(t, x), empty when unforced
};

// Reasserts the extension conventions on a data bundle: u0, u1 zero outside
// [0, l0], kappa clamped below l0. Table-backed functions already carry their
// extension mode, so this is a checked pass-through.
inline ProblemData extend(const ProblemData& data) {
    ProblemData out = data;
    if (out.kappa.kind() != FnKind::constant && out.kappa.kind() != FnKind::zero &&
        out.kappa.extension() != Extend::clamp)
        throw std::invalid_argument("extend: kappa must use clamp extension");
    if (out.u0.kind() != FnKind::zero && out.u0.extension() != Extend::zero)
        throw std::invalid_argument("extend: u0 must use zero extension");
    if (out.u1.kind() != FnKind::zero && out.u1.extension() != Extend::zero)
        throw std::invalid_argument("extend: u1 must use zero extension");
    return out;
}

inline VData to_v_data(const ProblemData& data) {
    VData v;
    v.l0 = data.l0;
    v.nu = data.nu;
    v.v0 = data.u0;
    v.v1 = data.nu == 0.0 ? data.u1 : Fn::combine(1.0, data.u1, 0.5 * data.nu, data.u0);
    const double nu = data.nu;
    if (nu == 0.0) {
        v.z = data.w;
    } else {
        const Fn w = data.w;
        v.z = Fn::analytic(
            [w, nu](double t) { return std::exp(0.5 * nu * t) * w(t); },
            [w, nu](double t) {
                return std::exp(0.5 * nu * t) * (w.derivative(t) + 0.5 * nu * w(t));
            },
            -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    }
    v.kappa = data.kappa;
    if (data.forcing) {
        const auto f = data.forcing;
        v.g = [f, nu](double t, double x) { return std::exp(0.5 * nu * t) * f(t, x); };
    }
    return v;
}

} // namespace debond
