#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "debond/dalembert.hpp"
#include "debond/field.hpp"
#include "debond/geometry.hpp"
#include "debond/problem.hpp"

namespace debond {

struct SolverConfig {
    double h = 1.0 / 128.0;
    double tol_fp = 1e-8;
    std::size_t max_iter = 40;
    double window_safety = 0.9;     // fraction of the admissible window length
    double contraction_guard = 0.9; // max tolerated ratio of successive metrics
    std::size_t front_refine = 4;   // front y-grid spacing = h / front_refine
    std::size_t threads = 1;

    void validate() const {
        detail::require(h > 0.0, "config: h must be positive");
        detail::require(tol_fp > 0.0, "config: tol_fp must be positive");
        detail::require(max_iter >= 2, "config: max_iter must be at least 2");
        detail::require(window_safety > 0.0 && window_safety < 1.0,
                        "config: window_safety must lie in (0,1)");
        detail::require(contraction_guard > 0.0 && contraction_guard <= 1.0,
                        "config: contraction_guard must lie in (0,1]");
        detail::require(front_refine >= 1, "config: front_refine must be >= 1");
        detail::require(threads >= 1, "config: threads must be >= 1");
    }
};

// Longest window on which the representation operator is known to contract:
// half the initial film length, tightened by the damping strength.
inline double window_length(const ProblemData& data, const SolverConfig& cfg) {
    double cap = 0.5 * data.l0;
    if (data.nu > 0.0) cap = std::min(cap, 2.0 / (data.nu * data.nu * data.l0));
    return cfg.window_safety * cap;
}

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), metric_history(std::move(history)) {}
    std::vector<double> metric_history;
};

class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WindowDiagnostics {
    std::size_t iterations = 0;
    std::vector<double> metric; // successive-iterate distance per sweep
    std::vector<double> ratio;  // metric[n]/metric[n-1]
    std::size_t halvings = 0;   // window halvings forced by the contraction guard
    bool converged = false;
};

struct WindowSolution {
    double t_start = 0.0; // global time of the window's local t = 0
    double length = 0.0;  // accepted window length, a multiple of h
    ProblemData data;     // window-local data in the physical variables
    VData vdata;
    DebondingFront front; // window-local front history
    Field2D v;            // converged transformed field, local t0 = 0
    Field2D kernel;       // (nu^2/4) v + forcing samples, prefix tables ready
    WindowDiagnostics diag;

    WindowSolution()
        : front(DebondingFront::stationary(1.0, 0.0 + 1.0, 1.0)),
          v(0.0, 0.0, 1.0, 2, 2), kernel(0.0, 0.0, 1.0, 2, 2) {}
};

namespace detail {

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
    if (threads <= 1 || n < 2 * threads) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Trapezoid of a plain 2-argument callable along x(tau) = c + sign*tau,
// nodes at multiples of h plus the exact ends.
inline double line_integral(const std::function<double(double, double)>& g, double c, int sign,
                            double a, double b, double h) {
    if (!g || b <= a + 1e-15 * h) return 0.0;
    auto f = [&](double tau) { return g(tau, c + sign * tau); };
    double acc = 0.0, tprev = a, fprev = f(a);
    for (double tk = h * std::ceil(a / h + 1e-12); tk < b - 1e-12 * h; tk += h) {
        if (tk <= a + 1e-12 * h) continue;
        const double fk = f(tk);
        acc += 0.5 * (tk - tprev) * (fprev + fk);
        tprev = tk;
        fprev = fk;
    }
    acc += 0.5 * (b - tprev) * (fprev + f(b));
    return acc;
}

} // namespace detail

// Front-speed functional in arrival-time coordinates: the squared data bracket
// at the characteristic foot -y, corrected by the memory integral along the
// characteristic, against the scaled toughness at the front. The front moves
// exactly where this exceeds 1.
inline double theta(double y, const Field2D& v, const DebondingFront& lam, const VData& d) {
    const double l = lam.lambda(y);
    const double cap = std::min(l, v.t_max());
    double line = 0.0;
    if (d.nu > 0.0)
        line += 0.25 * d.nu * d.nu * v.char_integral(-y, +1, 0.0, cap);
    if (d.g) line += detail::line_integral(d.g, -y, +1, 0.0, cap, v.h());
    const double bracket = d.v0.derivative(-y) - d.v1(-y) - line;
    const double kap = d.kappa(l - y);
    if (!(kap > 0.0)) throw std::domain_error("theta: kappa must be positive at the front");
    return bracket * bracket / (2.0 * std::exp(d.nu * l) * kap);
}

// Samples (nu^2/4) v + g on v's grid. This is the kernel whose influence-area
// integral (times 1/2) corrects the wave part, and whose characteristic
// integrals enter the traces and the front functional.
inline Field2D build_kernel(const Field2D& v, const VData& d) {
    Field2D k(v.t0(), v.x0(), v.h(), v.nt(), v.nx());
    const double c = 0.25 * d.nu * d.nu;
    for (std::size_t i = 0; i < v.nt(); ++i)
        for (std::size_t j = 0; j < v.nx(); ++j) {
            double val = c * v.at(i, j);
            if (d.g) val += d.g(v.t_at(i), v.x_at(j));
            k.at(i, j) = val;
            k.set_mask(i, j, v.inside(i, j));
        }
    k.rebuild_prefix();
    return k;
}

using FrontBuilder = std::function<DebondingFront(double, double, std::vector<double>)>;

struct PicardResult {
    Field2D v;
    DebondingFront front;
    double metric_v = 0.0;   // L2 gap on the contraction strip
    double metric_lam = 0.0; // sup gap of the arrival times
    double metric() const { return std::max(metric_v, metric_lam); }
};

// One sweep of the window fixed-point operator: the field update evaluates the
// wave part plus half the kernel's influence-area integral on the incoming
// front; the front update integrates 1 + max{theta, 1} over the y-grid, with
// the crossing of the activation level located by bisection inside its cell
// and the cell split there.
inline PicardResult picard_step(const Field2D& v, const DebondingFront& lam, const VData& d,
                                const SolverConfig& cfg, const FrontBuilder& front_builder = {}) {
    const std::size_t nt = v.nt(), nx = v.nx();
    const bool kernel_active = d.nu > 0.0 || static_cast<bool>(d.g);
    Field2D kernel = kernel_active ? build_kernel(v, d) : Field2D(v.t0(), v.x0(), v.h(), 2, 2);
    if (kernel_active) kernel.rebuild_prefix();

    PicardResult out{Field2D(v.t0(), v.x0(), v.h(), nt, nx), lam};
    Field2D& vp = out.v;
    detail::parallel_for(nt, cfg.threads, [&](std::size_t i) {
        const double t = v.t_at(i);
        const double ell = lam.ell(t);
        for (std::size_t j = 0; j < nx; ++j) {
            const double x = v.x_at(j);
            if (x > ell + 1e-12) {
                vp.at(i, j) = 0.0;
                vp.set_mask(i, j, false);
                continue;
            }
            double val = eval_A(t, x, d, lam);
            if (kernel_active) val += 0.5 * eval_H(t, x, kernel, lam);
            vp.at(i, j) = val;
        }
    });

    // front update
    const std::size_t ny = lam.size();
    std::vector<double> th(ny), nl(ny, 0.0);
    detail::parallel_for(ny, cfg.threads, [&](std::size_t i) {
        th[i] = theta(lam.y_at(i), v, lam, d);
    });
    auto theta_at = [&](double y) { return theta(y, v, lam, d); };
    const double dy = lam.dy();
    for (std::size_t i = 1; i < ny; ++i) {
        const double f0 = 1.0 + std::max(th[i - 1], 1.0);
        const double f1 = 1.0 + std::max(th[i], 1.0);
        double cell;
        if ((th[i - 1] - 1.0) * (th[i] - 1.0) < 0.0) {
            double a = lam.y_at(i - 1), b = lam.y_at(i);
            const bool rising = th[i] > 1.0;
            for (int it = 0; it < 48; ++it) {
                const double m = 0.5 * (a + b);
                const bool above = theta_at(m) > 1.0;
                if (above == rising)
                    b = m;
                else
                    a = m;
            }
            const double s = 0.5 * (a + b);
            cell = 0.5 * (s - lam.y_at(i - 1)) * (f0 + 2.0) +
                   0.5 * (lam.y_at(i) - s) * (2.0 + f1);
        } else {
            cell = 0.5 * dy * (f0 + f1);
        }
        nl[i] = nl[i - 1] + 0.5 * cell;
    }
    out.front = front_builder ? front_builder(lam.l0(), dy, std::move(nl))
                              : DebondingFront(lam.l0(), dy, std::move(nl));

    // successive-iterate metric: sup gap of arrival times over the y-range
    // both fronts reach within the window, L2 field gap on the strip
    // x in [t - phi_min(T), t + l0]
    const double Tw = v.t_max();
    double ml = 0.0;
    for (std::size_t i = 0; i < ny; ++i) {
        ml = std::max(ml, std::abs(out.front.lambda_at(i) - lam.lambda_at(i)));
        if (std::min(out.front.lambda_at(i), lam.lambda_at(i)) > Tw) break;
    }
    out.metric_lam = ml;
    const double phi_min = std::min(lam.phi(Tw), out.front.phi(Tw));
    double acc = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = v.t_at(i);
        for (std::size_t j = 0; j < nx; ++j) {
            const double x = v.x_at(j);
            if (x < t - phi_min - 1e-12 || x > t + lam.l0() + 1e-12) continue;
            const double dv = vp.at(i, j) - v.at(i, j);
            acc += dv * dv;
        }
    }
    out.metric_v = std::sqrt(acc) * v.h();
    return out;
}

// Solves one window of prescribed length by Picard iteration from the
// stationary-front wave part, halving the window whenever the measured
// contraction ratio breaches the guard.
inline WindowSolution solve_window(const ProblemData& data, double T_w, const SolverConfig& cfg) {
    cfg.validate();
    const double h = cfg.h;
    double Tw = std::floor(T_w / h + 1e-9) * h;
    if (Tw < h - 1e-12) throw ResolutionError("solve_window: window shorter than the grid spacing");

    WindowSolution ws;
    ws.data = extend(data);
    ws.vdata = to_v_data(ws.data);
    const VData& vd = ws.vdata;

    while (true) {
        const auto nt = static_cast<std::size_t>(std::llround(Tw / h)) + 1;
        const double x_hi = data.l0 + Tw;
        const auto nx = static_cast<std::size_t>(std::ceil(x_hi / h - 1e-9)) + 2;
        const double dy = h / static_cast<double>(cfg.front_refine);
        DebondingFront front =
            DebondingFront::stationary(data.l0, Tw - data.l0 + 2.0 * dy, dy);
        Field2D v(0.0, 0.0, h, nt, nx);
        detail::parallel_for(nt, cfg.threads, [&](std::size_t i) {
            const double t = v.t_at(i);
            for (std::size_t j = 0; j < nx; ++j) {
                const double x = v.x_at(j);
                if (x > front.ell(t) + 1e-12) {
                    v.set_mask(i, j, false);
                    continue;
                }
                v.at(i, j) = eval_A(t, x, vd, front);
            }
        });

        WindowDiagnostics diag;
        diag.halvings = ws.diag.halvings;
        bool halve = false;
        double prev_metric = -1.0;
        for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
            PicardResult step = picard_step(v, front, vd, cfg);
            const double dn = step.metric();
            diag.metric.push_back(dn);
            diag.iterations = n;
            if (prev_metric > 0.0) diag.ratio.push_back(dn / prev_metric);
            v = std::move(step.v);
            front = std::move(step.front);
            if (dn < cfg.tol_fp) {
                diag.converged = true;
                break;
            }
            if (prev_metric > 0.0 && dn / prev_metric > cfg.contraction_guard) {
                halve = true;
                break;
            }
            prev_metric = dn;
        }
        if (halve) {
            Tw = std::floor(0.5 * Tw / h + 1e-9) * h;
            ws.diag.halvings += 1;
            if (Tw < h - 1e-12)
                throw ResolutionError("solve_window: contraction guard drove the window below h");
            continue;
        }
        if (!diag.converged)
            throw NonConvergenceError("solve_window: fixed point not converged within max_iter",
                                      diag.metric);
        diag.halvings = ws.diag.halvings;
        ws.diag = std::move(diag);
        ws.length = Tw;
        ws.front = std::move(front);
        ws.kernel = build_kernel(v, vd);
        ws.v = std::move(v);
        return ws;
    }
}

inline Field2D to_u(const Field2D& v, double nu) {
    Field2D u = v;
    if (nu == 0.0) return u;
    for (std::size_t i = 0; i < u.nt(); ++i) {
        const double decay = std::exp(-0.5 * nu * (u.t_at(i) - u.t0()));
        for (std::size_t j = 0; j < u.nx(); ++j) u.at(i, j) = decay * v.at(i, j);
    }
    return u;
}

// Full multi-window solution bundle in global time.
class Solution {
public:
    ProblemData data;
    SolverConfig config;
    double T = 0.0;
    std::vector<WindowSolution> windows;
    Field2D u;                        // stitched physical displacement
    std::vector<double> trace_x0;     // u_x(t, 0) at global grid times
    std::vector<double> trace_front;  // u_x(t, ell(t)) at global grid times
    std::vector<double> front_pos;    // ell at global grid times
    std::vector<double> front_speed;  // right-continuous ell_dot at grid times

    Solution() : u(0.0, 0.0, 1.0, 2, 2) {}

    const WindowSolution& window_at(double t) const {
        detail::require(!windows.empty(), "solution: empty");
        for (const auto& w : windows)
            if (t < w.t_start + w.length - 1e-12) return w;
        return windows.back();
    }

    double local_time(const WindowSolution& w, double t) const {
        return std::clamp(t - w.t_start, 0.0, w.length);
    }

    double ell(double t) const {
        const auto& w = window_at(t);
        return w.front.ell(local_time(w, t));
    }

    double ell_dot(double t) const {
        const auto& w = window_at(t);
        return w.front.ell_dot(local_time(w, t));
    }

    double u_at(double t, double x) const {
        const auto& w = window_at(t);
        const double s = local_time(w, t);
        return std::exp(-0.5 * data.nu * s) * w.v.interp(s, x);
    }

    // slice derivatives through the representation, not grid differences
    double ut_at(double t, double x) const {
        const auto& w = window_at(t);
        const double s = local_time(w, t);
        if (x > w.front.ell(s) + 1e-12 || x < 0.0) return 0.0;
        const double vt = eval_At(s, x, w.vdata, w.front) + 0.5 * eval_Ht(s, x, w.kernel, w.front);
        const double v = w.v.interp(s, x);
        return std::exp(-0.5 * data.nu * s) * (vt - 0.5 * data.nu * v);
    }

    double ux_at(double t, double x) const {
        const auto& w = window_at(t);
        const double s = local_time(w, t);
        if (x > w.front.ell(s) + 1e-12 || x < 0.0) return 0.0;
        const double vx = eval_Ax(s, x, w.vdata, w.front) + 0.5 * eval_Hx(s, x, w.kernel, w.front);
        return std::exp(-0.5 * data.nu * s) * vx;
    }

    double ux_trace0(double t) const {
        const auto& w = window_at(t);
        const double s = local_time(w, t);
        return std::exp(-0.5 * data.nu * s) * trace_vx0(s, w.vdata, w.kernel);
    }

    double ux_trace_front(double t) const {
        const auto& w = window_at(t);
        const double s = local_time(w, t);
        return std::exp(-0.5 * data.nu * s) * trace_vx_ell(s, w.vdata, w.kernel, w.front);
    }
};

// New data posed at time t_star of a solved trajectory: the sliced
// displacement and velocity become the initial pair on [0, ell(t_star)], the
// load and forcing shift, the toughness keeps its absolute coordinates. The
// velocity slice goes through the representation derivatives, which keeps the
// restarted energy ledger consistent at its origin.
inline ProblemData restart_window_at(const WindowSolution& w, double s) {
    const double nu = w.data.nu;
    const double decay = std::exp(-0.5 * nu * s);
    const double l = w.front.ell(s);
    const double h = w.v.h();
    const bool kernel_active = nu > 0.0 || static_cast<bool>(w.vdata.g);
    std::vector<double> xs, us, vs;
    for (double x = 0.0; x < l - 0.25 * h; x += h) {
        xs.push_back(x);
        us.push_back(decay * w.v.interp(s, x));
        double vt = eval_At(s, x, w.vdata, w.front);
        if (kernel_active) vt += 0.5 * eval_Ht(s, x, w.kernel, w.front);
        vs.push_back(decay * (vt - 0.5 * nu * w.v.interp(s, x)));
    }
    xs.push_back(l);
    us.push_back(0.0);
    {
        double vt = eval_At(s, l, w.vdata, w.front);
        if (kernel_active) vt += 0.5 * eval_Ht(s, l, w.kernel, w.front);
        vs.push_back(decay * vt);
    }
    ProblemData next;
    next.l0 = l;
    next.nu = nu;
    next.u0 = Fn::piecewise_linear(xs, us);
    next.u1 = Fn::piecewise_linear(std::move(xs), std::move(vs));
    next.w = Fn::shifted(w.data.w, s);
    next.kappa = w.data.kappa;
    if (w.data.forcing) {
        const auto f = w.data.forcing;
        next.forcing = [f, s](double t, double x) { return f(t + s, x); };
    }
    return next;
}

inline ProblemData restart_at(const Solution& sol, double t_star) {
    detail::require(t_star >= 0.0 && t_star <= sol.T + 1e-12, "restart_at: time out of range");
    const WindowSolution& w = sol.window_at(t_star);
    return restart_window_at(w, sol.local_time(w, t_star));
}

namespace detail {

inline void assemble_solution(Solution& sol) {
    const double h = sol.config.h;
    const auto nt = static_cast<std::size_t>(std::llround(sol.T / h)) + 1;
    std::size_t nx = 2;
    for (const auto& w : sol.windows) nx = std::max(nx, w.v.nx());
    sol.u = Field2D(0.0, 0.0, h, nt, nx);
    sol.trace_x0.assign(nt, 0.0);
    sol.trace_front.assign(nt, 0.0);
    sol.front_pos.assign(nt, 0.0);
    sol.front_speed.assign(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = sol.u.t_at(i);
        const WindowSolution& w = sol.window_at(t);
        const double s = sol.local_time(w, t);
        const auto row = static_cast<std::size_t>(std::llround(s / h));
        const double decay = std::exp(-0.5 * sol.data.nu * s);
        const double ell = w.front.ell(s);
        for (std::size_t j = 0; j < nx; ++j) {
            if (j < w.v.nx() && sol.u.x_at(j) <= ell + 1e-12)
                sol.u.at(i, j) = decay * w.v.at(row, j);
            else
                sol.u.set_mask(i, j, false);
        }
        sol.front_pos[i] = ell;
        sol.front_speed[i] = w.front.ell_dot(s);
        sol.trace_x0[i] = decay * trace_vx0(s, w.vdata, w.kernel);
        sol.trace_front[i] = decay * trace_vx_ell(s, w.vdata, w.kernel, w.front);
    }
}

} // namespace detail

// Chains windows until the horizon: solve a window, restart from its end
// state, repeat; then stitch the physical field and boundary traces on the
// global grid. T is rounded up to the grid.
inline Solution solve(const ProblemData& data, double T, const SolverConfig& cfg) {
    cfg.validate();
    detail::require(T > 0.0, "solve: horizon must be positive");
    ProblemData base = extend(data);
    base.validate();
    const double h = cfg.h;
    const double Tg = h * std::ceil(T / h - 1e-9);

    Solution sol;
    sol.data = base;
    sol.config = cfg;
    sol.T = Tg;
    double t0 = 0.0;
    ProblemData cur = base;
    while (t0 < Tg - 0.5 * h) {
        double Tw = std::floor(window_length(cur, cfg) / h + 1e-9) * h;
        if (Tw < h) throw ResolutionError("solve: admissible window below the grid spacing");
        Tw = std::min(Tw, Tg - t0);
        WindowSolution ws = solve_window(cur, Tw, cfg);
        ws.t_start = t0;
        t0 += ws.length;
        sol.windows.push_back(std::move(ws));
        if (t0 < Tg - 0.5 * h) cur = restart_window_at(sol.windows.back(), sol.windows.back().length);
    }
    detail::assemble_solution(sol);
    return sol;
}

// Elastic energy stored to the right of x at time t.
inline double horizontal_displacement(const Solution& sol, double t, double x) {
    const double ell = sol.ell(t);
    if (x >= ell) return 0.0;
    const double h = sol.config.h;
    auto f = [&](double sigma) {
        const double q = sol.ux_at(t, sigma);
        return 0.5 * q * q;
    };
    double acc = 0.0, xprev = x, fprev = f(x);
    for (double xk = h * std::ceil(x / h + 1e-12); xk < ell - 1e-12 * h; xk += h) {
        if (xk <= x + 1e-12 * h) continue;
        const double fk = f(xk);
        acc += 0.5 * (xk - xprev) * (fprev + fk);
        xprev = xk;
        fprev = fk;
    }
    acc += 0.5 * (ell - xprev) * (fprev + f(ell));
    return acc;
}

inline void write_front_csv(const Solution& sol, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,ell,ell_dot\n";
    for (std::size_t i = 0; i < sol.front_pos.size(); ++i)
        out << detail::fmt_double(sol.u.t_at(i)) << ',' << detail::fmt_double(sol.front_pos[i])
            << ',' << detail::fmt_double(sol.front_speed[i]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace debond
