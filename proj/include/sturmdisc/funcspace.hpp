#pragma once

// Functions on [0, X] closed under +, *, d/dx and int_0^x: exact polynomials,
// or Chebyshev series when the input is not polynomial.

#include <sturmdisc/expr.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace sturmdisc {

class SmoothFn {
public:
    enum class Kind { poly, cheb };

    SmoothFn() : kind_(Kind::poly), x_max_(1.0), c_{cplx{}} {}

    static SmoothFn polynomial(std::vector<cplx> coeffs, double x_max) {
        SmoothFn f;
        f.kind_ = Kind::poly;
        f.x_max_ = x_max;
        f.c_ = coeffs.empty() ? std::vector<cplx>{cplx{}} : std::move(coeffs);
        return f;
    }

    static SmoothFn constant(cplx v, double x_max) { return polynomial({v}, x_max); }

    // Chebyshev interpolant of g on [0, x_max] at n first-kind nodes.
    static SmoothFn chebyshev(const std::function<cplx(double)>& g, double x_max, int n = 48) {
        SmoothFn f;
        f.kind_ = Kind::cheb;
        f.x_max_ = x_max;
        std::vector<cplx> vals(n);
        for (int j = 0; j < n; ++j) {
            const double s = std::cos(std::numbers::pi * (j + 0.5) / n);
            vals[j] = g(0.5 * x_max * (s + 1.0));
        }
        f.c_.assign(n, cplx{});
        for (int k = 0; k < n; ++k) {
            cplx acc{};
            for (int j = 0; j < n; ++j) acc += vals[j] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
            f.c_[k] = acc * (2.0 / n);
        }
        f.c_[0] *= 0.5;
        return f;
    }

    Kind kind() const { return kind_; }
    double x_max() const { return x_max_; }
    const std::vector<cplx>& coefficients() const { return c_; }

    cplx operator()(double x) const {
        if (kind_ == Kind::poly) {
            cplx r{};
            for (std::size_t k = c_.size(); k-- > 0;) r = r * x + c_[k];
            return r;
        }
        const double s = 2.0 * x / x_max_ - 1.0;
        cplx b1{}, b2{};
        for (std::size_t k = c_.size(); k-- > 1;) {
            const cplx b0 = 2.0 * s * b1 - b2 + c_[k];
            b2 = b1;
            b1 = b0;
        }
        return s * b1 - b2 + c_[0];
    }

    SmoothFn derivative() const {
        SmoothFn f = *this;
        if (kind_ == Kind::poly) {
            if (c_.size() <= 1) return constant(0.0, x_max_);
            f.c_.assign(c_.size() - 1, cplx{});
            for (std::size_t k = 1; k < c_.size(); ++k) f.c_[k - 1] = double(k) * c_[k];
            return f;
        }
        const std::size_t n = c_.size();
        std::vector<cplx> d(n + 1, cplx{});
        for (std::size_t k = n - 1; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * double(k) * c_[k];
        d[0] *= 0.5;
        d.resize(std::max<std::size_t>(1, n - 1));
        for (auto& v : d) v *= 2.0 / x_max_;
        f.c_ = std::move(d);
        return f;
    }

    SmoothFn derivative(int order) const {
        SmoothFn f = *this;
        for (int k = 0; k < order; ++k) f = f.derivative();
        return f;
    }

    // int_0^x f
    SmoothFn antiderivative() const {
        SmoothFn f = *this;
        if (kind_ == Kind::poly) {
            f.c_.assign(c_.size() + 1, cplx{});
            for (std::size_t k = 0; k < c_.size(); ++k) f.c_[k + 1] = c_[k] / double(k + 1);
            return f;
        }
        const std::size_t n = c_.size();
        std::vector<cplx> a(n + 1, cplx{});
        auto coef = [&](std::size_t k) { return k < n ? c_[k] : cplx{}; };
        for (std::size_t k = 1; k <= n; ++k) {
            const cplx prev = (k == 1) ? 2.0 * coef(0) : coef(k - 1);
            a[k] = (prev - coef(k + 1)) / (2.0 * double(k));
        }
        for (auto& v : a) v *= 0.5 * x_max_;
        f.c_ = std::move(a);
        f.c_[0] -= f(0.0);
        return f;
    }

    friend SmoothFn operator+(const SmoothFn& a, const SmoothFn& b) { return combine(a, b, 1.0); }
    friend SmoothFn operator-(const SmoothFn& a, const SmoothFn& b) { return combine(a, b, -1.0); }

    friend SmoothFn operator*(cplx s, const SmoothFn& a) {
        SmoothFn f = a;
        for (auto& v : f.c_) v *= s;
        return f;
    }

    friend SmoothFn operator*(const SmoothFn& a, const SmoothFn& b) {
        if (a.kind_ == Kind::poly && b.kind_ == Kind::poly) return polynomial(expr::poly_mul(a.c_, b.c_), a.x_max_);
        const int n = int(std::min<std::size_t>(128, std::max<std::size_t>(48, a.c_.size() + b.c_.size())));
        return chebyshev([&](double x) { return a(x) * b(x); }, a.x_max_, n);
    }

private:
    static SmoothFn combine(const SmoothFn& a, const SmoothFn& b, double sign) {
        if (a.kind_ == b.kind_) {
            SmoothFn f = a;
            f.c_.resize(std::max(a.c_.size(), b.c_.size()), cplx{});
            for (std::size_t k = 0; k < b.c_.size(); ++k) f.c_[k] += sign * b.c_[k];
            return f;
        }
        const SmoothFn& p = a.kind_ == Kind::poly ? a : b;
        const SmoothFn ap = a.kind_ == Kind::poly ? to_cheb(p, b.c_.size()) : a;
        const SmoothFn bp = b.kind_ == Kind::poly ? to_cheb(p, a.c_.size()) : b;
        return combine(ap, bp, sign);
    }

    static SmoothFn to_cheb(const SmoothFn& p, std::size_t n) {
        return chebyshev([&](double x) { return p(x); }, p.x_max_, int(std::max<std::size_t>(n, p.c_.size() + 1)));
    }

    Kind kind_;
    double x_max_;
    std::vector<cplx> c_;
};

} // namespace sturmdisc
