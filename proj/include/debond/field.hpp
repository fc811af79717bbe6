#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "debond/func.hpp"

namespace debond {

// Scalar field on a uniform space-time grid, t_i = t0 + i*h, x_j = x0 + j*h.
// Nodes outside the physical domain carry value 0 and mask 0; interpolation
// blends stored node values, so the zero extension past the front is built in.
// Queries left or right of the x-range return 0; queries outside the t-range
// beyond a roundoff margin throw.
class Field2D {
public:
    Field2D(double t0, double x0, double h, std::size_t nt, std::size_t nx)
        : t0_(t0), x0_(x0), h_(h), nt_(nt), nx_(nx),
          v_(nt * nx, 0.0), mask_(nt * nx, 1) {
        detail::require(h > 0.0, "field: spacing must be positive");
        detail::require(nt >= 2 && nx >= 2, "field: need at least a 2x2 grid");
    }

    double t0() const noexcept { return t0_; }
    double x0() const noexcept { return x0_; }
    double h() const noexcept { return h_; }
    std::size_t nt() const noexcept { return nt_; }
    std::size_t nx() const noexcept { return nx_; }
    double t_at(std::size_t i) const noexcept { return t0_ + h_ * static_cast<double>(i); }
    double x_at(std::size_t j) const noexcept { return x0_ + h_ * static_cast<double>(j); }
    double t_max() const noexcept { return t_at(nt_ - 1); }
    double x_max() const noexcept { return x_at(nx_ - 1); }

    double at(std::size_t i, std::size_t j) const { return v_[i * nx_ + j]; }
    double& at(std::size_t i, std::size_t j) {
        prefix_.clear();
        return v_[i * nx_ + j];
    }
    bool inside(std::size_t i, std::size_t j) const { return mask_[i * nx_ + j] != 0; }
    void set_mask(std::size_t i, std::size_t j, bool in) { mask_[i * nx_ + j] = in ? 1 : 0; }

    const std::vector<double>& raw() const noexcept { return v_; }
    const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }

    double interp(double t, double x) const {
        const double eps = 1e-9 * h_;
        if (t < t0_ - eps || t > t_max() + eps)
            throw std::out_of_range("field: time outside stored range");
        t = std::clamp(t, t0_, t_max());
        if (x < x0_ || x > x_max()) return 0.0;
        const auto [i, s] = cell(t - t0_, nt_);
        const auto [j, r] = cell(x - x0_, nx_);
        const double a = v_[i * nx_ + j], b = v_[i * nx_ + j + 1];
        const double c = v_[(i + 1) * nx_ + j], d = v_[(i + 1) * nx_ + j + 1];
        return (1.0 - s) * ((1.0 - r) * a + r * b) + s * ((1.0 - r) * c + r * d);
    }

    // Running integral of a row from x0; exact for the piecewise-bilinear
    // interpolant. Prefix tables are rebuilt on demand after writes.
    void rebuild_prefix() const {
        prefix_.assign(nt_ * nx_, 0.0);
        for (std::size_t i = 0; i < nt_; ++i)
            for (std::size_t j = 1; j < nx_; ++j)
                prefix_[i * nx_ + j] = prefix_[i * nx_ + j - 1] +
                                       0.5 * h_ * (v_[i * nx_ + j - 1] + v_[i * nx_ + j]);
    }

    double row_prefix(std::size_t i, double x) const {
        if (prefix_.empty()) rebuild_prefix();
        if (x <= x0_) return 0.0;
        if (x >= x_max()) return prefix_[i * nx_ + nx_ - 1];
        const auto [j, r] = cell(x - x0_, nx_);
        const double va = v_[i * nx_ + j];
        const double vb = v_[i * nx_ + j + 1];
        const double vx = va + r * (vb - va);
        return prefix_[i * nx_ + j] + 0.5 * (x - x_at(j)) * (va + vx);
    }

    double prefix_interp(double t, double x) const {
        const double eps = 1e-9 * h_;
        if (t < t0_ - eps || t > t_max() + eps)
            throw std::out_of_range("field: time outside stored range");
        t = std::clamp(t, t0_, t_max());
        const auto [i, s] = cell(t - t0_, nt_);
        if (s == 0.0) return row_prefix(i, x);
        return (1.0 - s) * row_prefix(i, x) + s * row_prefix(i + 1, x);
    }

    // Integral along the slope-(+/-1) line x(tau) = c + sign*tau for tau in
    // [a, b], by trapezoid with nodes at the grid rows plus the exact ends.
    double char_integral(double c, int sign, double a, double b) const {
        if (b <= a + 1e-15 * h_) return 0.0;
        auto f = [&](double tau) { return interp(tau, c + sign * tau); };
        double acc = 0.0;
        double tprev = a, fprev = f(a);
        const double first = t0_ + h_ * std::ceil((a - t0_) / h_ + 1e-12);
        for (double tk = first; tk < b - 1e-12 * h_; tk += h_) {
            const double fk = f(tk);
            acc += 0.5 * (tk - tprev) * (fprev + fk);
            tprev = tk;
            fprev = fk;
        }
        acc += 0.5 * (b - tprev) * (fprev + f(b));
        return acc;
    }

private:
    // cell index in [0, n-2] plus fractional position in [0, 1]
    std::pair<std::size_t, double> cell(double offset, std::size_t n) const {
        const double u = std::clamp(offset / h_, 0.0, static_cast<double>(n - 1));
        auto i = static_cast<std::size_t>(u);
        if (i >= n - 1) i = n - 2;
        return {i, u - static_cast<double>(i)};
    }

    double t0_, x0_, h_;
    std::size_t nt_, nx_;
    std::vector<double> v_;
    std::vector<std::uint8_t> mask_;
    mutable std::vector<double> prefix_;
};

struct NormReport {
    double sup = 0.0;          // max |a-b| over union nodes
    double l2 = 0.0;           // space-time L2 of a-b
    double h1_t = 0.0;         // L2 of the forward time-difference quotient
    double h1_x = 0.0;         // L2 of the forward space-difference quotient
    double max_slice_h1 = 0.0; // max over t of the spatial H1 norm of a-b
    double max_slice_l2_dt = 0.0; // max over t-cells of the L2 norm of d/dt(a-b)
};

namespace detail {

inline std::vector<double> union_axis(double lo0, double hi0, double h0,
                                      double lo1, double hi1, double h1) {
    std::vector<double> axis;
    const double lo = std::min(lo0, lo1), hi = std::max(hi0, hi1);
    for (double v = lo0; v <= hi0 + 1e-12 * h0; v += h0) axis.push_back(std::min(v, hi0));
    for (double v = lo1; v <= hi1 + 1e-12 * h1; v += h1) axis.push_back(std::min(v, hi1));
    std::sort(axis.begin(), axis.end());
    std::vector<double> out;
    const double tol = 1e-9 * std::min(h0, h1);
    for (double v : axis)
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    if (!out.empty()) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

} // namespace detail

// Gap norms between two fields on the union of their grids, zero extension in
// x. The fields must span a common time range.
inline NormReport norms(const Field2D& a, const Field2D& b) {
    const double t_lo = std::max(a.t0(), b.t0());
    const double t_hi = std::min(a.t_max(), b.t_max());
    detail::require(t_hi > t_lo, "norms: fields do not overlap in time");
    std::vector<double> ts = detail::union_axis(a.t0(), a.t_max(), a.h(), b.t0(), b.t_max(), b.h());
    ts.erase(std::remove_if(ts.begin(), ts.end(),
                            [&](double t) { return t < t_lo - 1e-12 || t > t_hi + 1e-12; }),
             ts.end());
    const std::vector<double> xs =
        detail::union_axis(a.x0(), a.x_max(), a.h(), b.x0(), b.x_max(), b.h());
    const std::size_t nt = ts.size(), nx = xs.size();
    auto diff = [&](std::size_t i, std::size_t j) {
        const double t = ts[i], x = xs[j];
        auto val = [&](const Field2D& f) {
            if (x < f.x0() || x > f.x_max()) return 0.0;
            return f.interp(t, x);
        };
        return val(a) - val(b);
    };
    std::vector<double> d(nt * nx);
    NormReport r;
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nx; ++j) {
            d[i * nx + j] = diff(i, j);
            r.sup = std::max(r.sup, std::abs(d[i * nx + j]));
        }
    auto x_weight = [&](std::size_t j) {
        double w = 0.0;
        if (j > 0) w += 0.5 * (xs[j] - xs[j - 1]);
        if (j + 1 < nx) w += 0.5 * (xs[j + 1] - xs[j]);
        return w;
    };
    auto t_weight = [&](std::size_t i) {
        double w = 0.0;
        if (i > 0) w += 0.5 * (ts[i] - ts[i - 1]);
        if (i + 1 < nt) w += 0.5 * (ts[i + 1] - ts[i]);
        return w;
    };
    double l2sq = 0.0, h1tsq = 0.0, h1xsq = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        double slice_sq = 0.0, slice_dx_sq = 0.0;
        for (std::size_t j = 0; j < nx; ++j) {
            const double val = d[i * nx + j];
            slice_sq += val * val * x_weight(j);
            if (j + 1 < nx) {
                const double dx = xs[j + 1] - xs[j];
                const double q = (d[i * nx + j + 1] - val) / dx;
                slice_dx_sq += q * q * dx;
            }
        }
        l2sq += slice_sq * t_weight(i);
        h1xsq += slice_dx_sq * t_weight(i);
        r.max_slice_h1 = std::max(r.max_slice_h1, std::sqrt(slice_sq + slice_dx_sq));
    }
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        const double dt = ts[i + 1] - ts[i];
        double row_sq = 0.0;
        for (std::size_t j = 0; j < nx; ++j) {
            const double q = (d[(i + 1) * nx + j] - d[i * nx + j]) / dt;
            row_sq += q * q * x_weight(j);
        }
        h1tsq += row_sq * dt;
        r.max_slice_l2_dt = std::max(r.max_slice_l2_dt, std::sqrt(row_sq));
    }
    r.l2 = std::sqrt(l2sq);
    r.h1_t = std::sqrt(h1tsq);
    r.h1_x = std::sqrt(h1xsq);
    return r;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_field_csv(const Field2D& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary keeps \n on every platform
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,x,value,inside\n";
    for (std::size_t i = 0; i < f.nt(); ++i)
        for (std::size_t j = 0; j < f.nx(); ++j)
            out << detail::fmt_double(f.t_at(i)) << ',' << detail::fmt_double(f.x_at(j)) << ','
                << detail::fmt_double(f.at(i, j)) << ',' << (f.inside(i, j) ? 1 : 0) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Binary layout: magic "DBF1", then t0,x0,h as doubles, nt,nx as uint64,
// values row-major, mask bytes. Host (little-endian) byte order.
inline void write_field_binary(const Field2D& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const char magic[4] = {'D', 'B', 'F', '1'};
    out.write(magic, 4);
    const double head[3] = {f.t0(), f.x0(), f.h()};
    out.write(reinterpret_cast<const char*>(head), sizeof(head));
    const std::uint64_t dims[2] = {f.nt(), f.nx()};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(f.raw().data()),
              static_cast<std::streamsize>(f.raw().size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(f.mask().data()),
              static_cast<std::streamsize>(f.mask().size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Field2D read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DBF1", 4) != 0)
        throw std::runtime_error("bad field file header: " + path);
    double head[3];
    std::uint64_t dims[2];
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw std::runtime_error("truncated field file: " + path);
    Field2D f(head[0], head[1], head[2], dims[0], dims[1]);
    std::vector<double> vals(dims[0] * dims[1]);
    in.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
    std::vector<std::uint8_t> msk(dims[0] * dims[1]);
    in.read(reinterpret_cast<char*>(msk.data()), static_cast<std::streamsize>(msk.size()));
    if (!in) throw std::runtime_error("truncated field file: " + path);
    for (std::size_t i = 0; i < dims[0]; ++i)
        for (std::size_t j = 0; j < dims[1]; ++j) {
            f.at(i, j) = vals[i * dims[1] + j];
            f.set_mask(i, j, msk[i * dims[1] + j] != 0);
        }
    return f;
}

} // namespace debond
