#pragma once

// Zero counting by argument continuation. A function is sampled along a
// path; whenever the phase moves by pi/2 or more between neighbours the
// segment is bisected. The winding number is the accumulated phase over 2 pi.

#include <sturmdisc/error.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace sturmdisc {

using cplx = std::complex<double>;

// Returns f and its first k derivatives at z. Values may share an arbitrary
// positive scale factor (only phases and ratios are used).
using AnalyticFn = std::function<std::vector<cplx>(cplx z, int k)>;

struct Rect {
    double re_min = 0, re_max = 0, im_min = 0, im_max = 0;

    bool contains(cplx z, double pad = 0.0) const {
        return z.real() >= re_min - pad && z.real() <= re_max + pad && z.imag() >= im_min - pad &&
               z.imag() <= im_max + pad;
    }
    cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
};

class BoundaryZero : public ComputationError {
public:
    using ComputationError::ComputationError;
};

struct WindingOptions {
    int max_bisection = 40;
    int max_nudges = 3;
};

namespace detail {

inline cplx value_of(const AnalyticFn& f, cplx z) {
    cplx v = f(z, 0).at(0);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || v == cplx{})
        throw BoundaryZero("function vanishes or is not finite on the contour");
    return v;
}

// Phase change of f from a to b along the straight segment. A step is taken
// only when f is close to linear on it (midpoint near the chord), otherwise a
// zero just off the segment can turn the phase by 2 pi between two samples.
inline double phase_step(const AnalyticFn& f, cplx a, cplx b, cplx fa, cplx fb, int depth) {
    const double d = std::arg(fb / fa);
    const cplx m = 0.5 * (a + b);
    const cplx fm = value_of(f, m);
    if (std::abs(d) < 0.5 * std::numbers::pi &&
        std::abs(fm - 0.5 * (fa + fb)) <= 0.5 * std::min(std::abs(fa), std::abs(fb)))
        return d;
    if (depth <= 0) throw BoundaryZero("phase step did not resolve below pi/2 (zero on or near the contour)");
    return phase_step(f, a, m, fa, fm, depth - 1) + phase_step(f, m, b, fm, fb, depth - 1);
}

// Phase change along the segment a -> b with initial spacing spacing(z).
template <class Spacing>
double segment_phase(const AnalyticFn& f, cplx a, cplx b, Spacing&& spacing, const WindingOptions& o) {
    const double len = std::abs(b - a);
    if (len == 0.0) return 0.0;
    double total = 0.0;
    double s = 0.0;
    cplx za = a, fa = value_of(f, a);
    while (s < len) {
        double h = spacing(za);
        double sn = std::min(len, s + h);
        if (len - sn < 0.25 * h) sn = len;
        const cplx zb = a + (b - a) * (sn / len);
        const cplx fb = value_of(f, zb);
        total += phase_step(f, za, zb, fa, fb, o.max_bisection);
        s = sn;
        za = zb;
        fa = fb;
    }
    return total;
}

inline int round_winding(double phase) {
    const double w = phase / (2.0 * std::numbers::pi);
    const double r = std::round(w);
    if (std::abs(w - r) > 0.1) throw ComputationError("phase-step failure: accumulated phase is not a multiple of 2 pi");
    return int(r);
}

} // namespace detail

// Default sampling: the characteristic functions rotate like sin(sqrt(lambda) pi),
// i.e. about pi/(2 |sqrt(lambda)|) radians per unit of lambda.
inline double default_spacing(cplx z) { return 0.3 * std::max(1.0, std::sqrt(std::abs(z))); }

template <class Spacing>
int winding_count(const AnalyticFn& f, const Rect& r, Spacing&& spacing, const WindingOptions& o = {}) {
    const cplx c[4] = {{r.re_min, r.im_min}, {r.re_max, r.im_min}, {r.re_max, r.im_max}, {r.re_min, r.im_max}};
    double total = 0.0;
    for (int k = 0; k < 4; ++k) total += detail::segment_phase(f, c[k], c[(k + 1) % 4], spacing, o);
    return detail::round_winding(total);
}

// Zero count inside r; the rectangle is pushed outward slightly when a zero
// sits on its boundary.
inline int count_zeros(const AnalyticFn& f, Rect r, const WindingOptions& o = {}) {
    for (int nudge = 0;; ++nudge) {
        try {
            return winding_count(f, r, default_spacing, o);
        } catch (const BoundaryZero&) {
            if (nudge >= o.max_nudges) throw;
            const double e = 1e-6 * (1.0 + std::max(std::abs(r.re_max), std::abs(r.re_min))) * (nudge + 1) * 1.618;
            r.re_min -= e;
            r.re_max += e * 0.77;
            r.im_min -= e * 0.91;
            r.im_max += e * 1.13;
        }
    }
}

// Winding count on a circle (inscribed polygon with n vertices).
inline int circle_count(const AnalyticFn& f, cplx z0, double radius, int n = 16, const WindingOptions& o = {}) {
    std::vector<cplx> pts(n), vals(n);
    for (int k = 0; k < n; ++k) {
        pts[k] = z0 + std::polar(radius, 2.0 * std::numbers::pi * (k + 0.5) / n);
        vals[k] = detail::value_of(f, pts[k]);
    }
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        const int j = (k + 1) % n;
        total += detail::phase_step(f, pts[k], pts[j], vals[k], vals[j], o.max_bisection);
    }
    return detail::round_winding(total);
}

// Algebraic multiplicity at z0: counts on radius, radius/2, radius/4 must agree.
inline int multiplicity_probe(const AnalyticFn& f, cplx z0, double radius, const WindingOptions& o = {}) {
    if (!(radius > 0.0)) throw ValidationError("probe radius must be > 0");
    const int c0 = circle_count(f, z0, radius, 16, o);
    const int c1 = circle_count(f, z0, radius / 2, 16, o);
    const int c2 = circle_count(f, z0, radius / 4, 16, o);
    if (c0 != c1 || c1 != c2)
        throw ComputationError("multiplicity probe unstable across radii (" + std::to_string(c0) + ", " +
                               std::to_string(c1) + ", " + std::to_string(c2) + ")");
    return c0;
}

} // namespace sturmdisc
