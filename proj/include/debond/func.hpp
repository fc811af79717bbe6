#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace debond {

// Behavior outside the stored domain [lo, hi]:
//   zero  - the function vanishes identically outside (default for initial data),
//   clamp - the nearest endpoint value persists (used for toughness profiles).
enum class Extend { zero, clamp };

enum class FnKind { zero, constant, piecewise_linear, piecewise_constant, analytic, combined };

namespace detail {

inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Composite Simpson with n subintervals (n >= 1), midpoint-refined per cell.
template <class F>
double simpson(F&& f, double a, double b, std::size_t n) {
    if (a == b) return 0.0;
    const double dx = (b - a) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = a + dx * static_cast<double>(i);
        const double x1 = (i + 1 == n) ? b : a + dx * static_cast<double>(i + 1);
        acc += (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
    }
    return acc;
}

class FnImpl {
public:
    virtual ~FnImpl() = default;
    virtual double value(double x) const = 0;
    virtual double deriv(double x) const = 0;
    virtual bool has_deriv() const noexcept = 0;
    // prefix(x) = integral of the extended function from lo() to x; for
    // zero-extension it is constant outside [lo, hi], for clamp it keeps growing.
    virtual double prefix(double x) const = 0;
    virtual double lo() const noexcept = 0;
    virtual double hi() const noexcept = 0;
    virtual Extend extension() const noexcept = 0;
    virtual FnKind kind() const noexcept = 0;
};

class ZeroImpl final : public FnImpl {
public:
    double value(double) const override { return 0.0; }
    double deriv(double) const override { return 0.0; }
    bool has_deriv() const noexcept override { return true; }
    double prefix(double) const override { return 0.0; }
    double lo() const noexcept override { return 0.0; }
    double hi() const noexcept override { return 0.0; }
    Extend extension() const noexcept override { return Extend::zero; }
    FnKind kind() const noexcept override { return FnKind::zero; }
};

class ConstImpl final : public FnImpl {
public:
    explicit ConstImpl(double c) : c_(c) {}
    double value(double) const override { return c_; }
    double deriv(double) const override { return 0.0; }
    bool has_deriv() const noexcept override { return true; }
    double prefix(double x) const override { return c_ * x; }
    double lo() const noexcept override { return -std::numeric_limits<double>::infinity(); }
    double hi() const noexcept override { return std::numeric_limits<double>::infinity(); }
    Extend extension() const noexcept override { return Extend::clamp; }
    FnKind kind() const noexcept override { return FnKind::constant; }
    double c_;
};

// Breakpoint evaluation convention, shared by the two table kinds below:
// right-continuous at interior breakpoints, left limit at the right edge of
// the table, extension rule strictly outside.
class PwLinearImpl final : public FnImpl {
public:
    PwLinearImpl(std::vector<double> xs, std::vector<double> ys, Extend ext)
        : xs_(std::move(xs)), ys_(std::move(ys)), ext_(ext) {
        require(xs_.size() >= 2, "piecewise_linear: need at least two breakpoints");
        require(xs_.size() == ys_.size(), "piecewise_linear: xs/ys size mismatch");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            require(xs_[i] > xs_[i - 1], "piecewise_linear: breakpoints must be strictly increasing");
        prefix_.resize(xs_.size(), 0.0);
        for (std::size_t i = 1; i < xs_.size(); ++i)
            prefix_[i] = prefix_[i - 1] + 0.5 * (ys_[i] + ys_[i - 1]) * (xs_[i] - xs_[i - 1]);
    }

    double value(double x) const override {
        if (x < xs_.front()) return ext_ == Extend::zero ? 0.0 : ys_.front();
        if (x > xs_.back()) return ext_ == Extend::zero ? 0.0 : ys_.back();
        const std::size_t i = segment(x);
        const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + t * (ys_[i + 1] - ys_[i]);
    }

    double deriv(double x) const override {
        if (x < xs_.front() || x > xs_.back()) return 0.0;
        const std::size_t i = segment(x);
        return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    }

    bool has_deriv() const noexcept override { return true; }

    double prefix(double x) const override {
        if (x <= xs_.front())
            return ext_ == Extend::zero ? 0.0 : ys_.front() * (x - xs_.front());
        if (x >= xs_.back())
            return prefix_.back() +
                   (ext_ == Extend::zero ? 0.0 : ys_.back() * (x - xs_.back()));
        const std::size_t i = segment(x);
        const double dx = x - xs_[i];
        const double slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        return prefix_[i] + ys_[i] * dx + 0.5 * slope * dx * dx;
    }

    double lo() const noexcept override { return xs_.front(); }
    double hi() const noexcept override { return xs_.back(); }
    Extend extension() const noexcept override { return ext_; }
    FnKind kind() const noexcept override { return FnKind::piecewise_linear; }

    std::size_t segment(double x) const {
        // last i with xs_[i] <= x, clamped to a valid segment index
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        if (i == 0) return 0;
        return std::min(i - 1, xs_.size() - 2);
    }

    std::vector<double> xs_, ys_, prefix_;
    Extend ext_;
};

class PwConstImpl final : public FnImpl {
public:
    // edges has n+1 entries, vals has n; vals[i] holds on [edges[i], edges[i+1]).
    PwConstImpl(std::vector<double> edges, std::vector<double> vals, Extend ext)
        : edges_(std::move(edges)), vals_(std::move(vals)), ext_(ext) {
        require(edges_.size() >= 2, "piecewise_constant: need at least two edges");
        require(edges_.size() == vals_.size() + 1, "piecewise_constant: edges/vals size mismatch");
        for (std::size_t i = 1; i < edges_.size(); ++i)
            require(edges_[i] > edges_[i - 1], "piecewise_constant: edges must be strictly increasing");
        prefix_.resize(edges_.size(), 0.0);
        for (std::size_t i = 1; i < edges_.size(); ++i)
            prefix_[i] = prefix_[i - 1] + vals_[i - 1] * (edges_[i] - edges_[i - 1]);
    }

    double value(double x) const override {
        if (x < edges_.front()) return ext_ == Extend::zero ? 0.0 : vals_.front();
        if (x > edges_.back()) return ext_ == Extend::zero ? 0.0 : vals_.back();
        return vals_[cell(x)];
    }

    double deriv(double) const override { return 0.0; }
    bool has_deriv() const noexcept override { return true; }

    double prefix(double x) const override {
        if (x <= edges_.front())
            return ext_ == Extend::zero ? 0.0 : vals_.front() * (x - edges_.front());
        if (x >= edges_.back())
            return prefix_.back() +
                   (ext_ == Extend::zero ? 0.0 : vals_.back() * (x - edges_.back()));
        const std::size_t i = cell(x);
        return prefix_[i] + vals_[i] * (x - edges_[i]);
    }

    double lo() const noexcept override { return edges_.front(); }
    double hi() const noexcept override { return edges_.back(); }
    Extend extension() const noexcept override { return ext_; }
    FnKind kind() const noexcept override { return FnKind::piecewise_constant; }

    std::size_t cell(double x) const {
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - edges_.begin());
        if (i == 0) return 0;
        return std::min(i - 1, vals_.size() - 1);
    }

    std::vector<double> edges_, vals_, prefix_;
    Extend ext_;
};

class AnalyticImpl final : public FnImpl {
public:
    AnalyticImpl(std::function<double(double)> f, std::function<double(double)> df,
                 double lo, double hi, Extend ext,
                 std::function<double(double)> primitive, std::size_t table_cells)
        : f_(std::move(f)), df_(std::move(df)), primitive_(std::move(primitive)),
          lo_(lo), hi_(hi), ext_(ext), cells_(table_cells) {
        require(static_cast<bool>(f_), "analytic: value callable required");
        require(lo_ < hi_, "analytic: need lo < hi");
    }

    double value(double x) const override {
        if (x < lo_) return ext_ == Extend::zero ? 0.0 : f_(lo_);
        if (x > hi_) return ext_ == Extend::zero ? 0.0 : f_(hi_);
        return f_(x);
    }

    double deriv(double x) const override {
        if (!df_) throw std::logic_error("analytic: derivative callable not supplied");
        if (x < lo_ || x > hi_) return 0.0;
        return df_(x);
    }

    bool has_deriv() const noexcept override { return static_cast<bool>(df_); }

    double prefix(double x) const override {
        if (primitive_) {
            const double xc = std::clamp(x, lo_, hi_);
            double p = primitive_(xc) - primitive_(lo_);
            if (ext_ == Extend::clamp) {
                if (x < lo_) p += f_(lo_) * (x - lo_);
                if (x > hi_) p += f_(hi_) * (x - hi_);
            }
            return p;
        }
        ensure_table();
        if (x <= lo_) return ext_ == Extend::zero ? 0.0 : f_(lo_) * (x - lo_);
        if (x >= hi_)
            return table_.back() + (ext_ == Extend::zero ? 0.0 : f_(hi_) * (x - hi_));
        const double dx = (hi_ - lo_) / static_cast<double>(cells_);
        const auto i = static_cast<std::size_t>(std::min(
            static_cast<double>(cells_ - 1), std::floor((x - lo_) / dx)));
        const double xi = lo_ + dx * static_cast<double>(i);
        return table_[i] + simpson(f_, xi, x, 1);
    }

    double lo() const noexcept override { return lo_; }
    double hi() const noexcept override { return hi_; }
    Extend extension() const noexcept override { return ext_; }
    FnKind kind() const noexcept override { return FnKind::analytic; }

private:
    void ensure_table() const {
        if (!table_.empty()) return;
        require(std::isfinite(lo_) && std::isfinite(hi_),
                "analytic: prefix integral on an unbounded domain needs a primitive");
        table_.resize(cells_ + 1, 0.0);
        const double dx = (hi_ - lo_) / static_cast<double>(cells_);
        for (std::size_t i = 0; i < cells_; ++i) {
            const double x0 = lo_ + dx * static_cast<double>(i);
            const double x1 = (i + 1 == cells_) ? hi_ : x0 + dx;
            table_[i + 1] = table_[i] + simpson(f_, x0, x1, 1);
        }
    }

    std::function<double(double)> f_, df_, primitive_;
    double lo_, hi_;
    Extend ext_;
    std::size_t cells_;
    mutable std::vector<double> table_;
};

class CombinedImpl;

} // namespace detail

// Value-semantic scalar function of one variable. Carries pointwise values, an
// optional pointwise derivative, and an exact running integral ("prefix"). The
// breakpoint kinds integrate exactly; the analytic kind integrates through a
// supplied primitive or an internally built high-order table.
class Fn {
public:
    Fn() : impl_(std::make_shared<detail::ZeroImpl>()) {}

    double operator()(double x) const { return impl_->value(x); }
    double derivative(double x) const { return impl_->deriv(x); }
    bool has_derivative() const noexcept { return impl_->has_deriv(); }
    double integral(double a, double b) const { return impl_->prefix(b) - impl_->prefix(a); }
    double prefix(double x) const { return impl_->prefix(x); }
    double lo() const noexcept { return impl_->lo(); }
    double hi() const noexcept { return impl_->hi(); }
    Extend extension() const noexcept { return impl_->extension(); }
    FnKind kind() const noexcept { return impl_->kind(); }
    bool is_zero() const noexcept { return kind() == FnKind::zero; }

    static Fn zero() { return Fn(); }

    static Fn constant(double c) {
        if (c == 0.0) return zero();
        return Fn(std::make_shared<detail::ConstImpl>(c));
    }

    static Fn piecewise_linear(std::vector<double> xs, std::vector<double> ys,
                               Extend ext = Extend::zero) {
        return Fn(std::make_shared<detail::PwLinearImpl>(std::move(xs), std::move(ys), ext));
    }

    static Fn piecewise_constant(std::vector<double> edges, std::vector<double> vals,
                                 Extend ext = Extend::zero) {
        return Fn(std::make_shared<detail::PwConstImpl>(std::move(edges), std::move(vals), ext));
    }

    static Fn analytic(std::function<double(double)> f, std::function<double(double)> df,
                       double lo, double hi, Extend ext = Extend::zero,
                       std::function<double(double)> primitive = {},
                       std::size_t table_cells = 2048) {
        return Fn(std::make_shared<detail::AnalyticImpl>(std::move(f), std::move(df), lo, hi,
                                                         ext, std::move(primitive), table_cells));
    }

    // a*f + b*g, exact prefix when both parts have one
    static Fn combine(double a, const Fn& f, double b, const Fn& g);
    // x -> f(x + shift)
    static Fn shifted(const Fn& f, double shift);

    // Table introspection for serialization; throws on other kinds.
    const std::vector<double>& table_xs() const {
        if (auto* p = dynamic_cast<const detail::PwLinearImpl*>(impl_.get())) return p->xs_;
        if (auto* p = dynamic_cast<const detail::PwConstImpl*>(impl_.get())) return p->edges_;
        throw std::logic_error("Fn: no breakpoint table");
    }
    const std::vector<double>& table_ys() const {
        if (auto* p = dynamic_cast<const detail::PwLinearImpl*>(impl_.get())) return p->ys_;
        if (auto* p = dynamic_cast<const detail::PwConstImpl*>(impl_.get())) return p->vals_;
        throw std::logic_error("Fn: no breakpoint table");
    }
    double constant_value() const {
        if (is_zero()) return 0.0;
        if (auto* p = dynamic_cast<const detail::ConstImpl*>(impl_.get())) return p->c_;
        throw std::logic_error("Fn: not a constant");
    }

private:
    explicit Fn(std::shared_ptr<const detail::FnImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const detail::FnImpl> impl_;
    friend class detail::CombinedImpl;
};

namespace detail {

class CombinedImpl final : public FnImpl {
public:
    CombinedImpl(double a, Fn f, double b, Fn g)
        : a_(a), f_(std::move(f)), b_(b), g_(std::move(g)) {}

    double value(double x) const override { return a_ * f_(x) + b_ * g_(x); }
    double deriv(double x) const override { return a_ * f_.derivative(x) + b_ * g_.derivative(x); }
    bool has_deriv() const noexcept override { return f_.has_derivative() && g_.has_derivative(); }
    double prefix(double x) const override { return a_ * f_.prefix(x) + b_ * g_.prefix(x); }
    double lo() const noexcept override { return std::min(f_.lo(), g_.lo()); }
    double hi() const noexcept override { return std::max(f_.hi(), g_.hi()); }
    Extend extension() const noexcept override { return f_.extension(); }
    FnKind kind() const noexcept override { return FnKind::combined; }

private:
    double a_;
    Fn f_;
    double b_;
    Fn g_;
};

class ShiftedImpl final : public FnImpl {
public:
    ShiftedImpl(Fn f, double s) : f_(std::move(f)), s_(s) {}
    double value(double x) const override { return f_(x + s_); }
    double deriv(double x) const override { return f_.derivative(x + s_); }
    bool has_deriv() const noexcept override { return f_.has_derivative(); }
    double prefix(double x) const override { return f_.prefix(x + s_) - f_.prefix(s_); }
    double lo() const noexcept override { return f_.lo() - s_; }
    double hi() const noexcept override { return f_.hi() - s_; }
    Extend extension() const noexcept override { return f_.extension(); }
    FnKind kind() const noexcept override { return FnKind::combined; }

private:
    Fn f_;
    double s_;
};

} // namespace detail

inline Fn Fn::combine(double a, const Fn& f, double b, const Fn& g) {
    if (b == 0.0 || g.is_zero()) {
        if (a == 1.0) return f;
        if (a == 0.0 || f.is_zero()) return zero();
    }
    return Fn(std::make_shared<detail::CombinedImpl>(a, f, b, g));
}

inline Fn Fn::shifted(const Fn& f, double shift) {
    if (shift == 0.0 || f.is_zero()) return f;
    return Fn(std::make_shared<detail::ShiftedImpl>(f, shift));
}

// Composite Simpson quadrature of a plain callable.
template <class F>
double integrate(F&& f, double a, double b, std::size_t n = 256) {
    return detail::simpson(std::forward<F>(f), a, b, n);
}

} // namespace debond
