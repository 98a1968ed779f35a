#pragma once

#include <sturmdisc/spectrum.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace sturmdisc {

// ---------------------------------------------------------------- products

// C * prod_{n<N} (1 - lambda/x_n), optionally times exp(-lambda * tail) with
// tail = sum_{n>=N} 1/x_n supplied analytically.
struct ProductModel {
    ZeroSequence zeros;
    cplx constant{1.0};
    std::size_t truncation = 0;
    std::optional<cplx> tail_reciprocal_sum;

    void validate() const {
        if (truncation > zeros.size()) throw ValidationError("truncation exceeds the number of available zeros");
        for (std::size_t n = 0; n < truncation; ++n)
            if (zeros[n] == cplx{}) throw ValidationError("product zeros must be nonzero (shift q so that 0 is not a zero)");
    }
};

struct ProductValue {
    ScaledValue full;  // N factors
    ScaledValue half;  // N/2 factors, for convergence assessment
};

namespace detail {

// exp(s) as a mantissa / log-scale pair.
inline ScaledValue from_log(cplx s, cplx c) {
    if (c == cplx{}) return {};
    if (s.real() < fold_threshold) return ScaledValue{c * std::exp(s), 0.0, 0.0};
    return ScaledValue{c * std::exp(cplx(0.0, s.imag())), s.real(), 0.0};
}

} // namespace detail

inline ProductValue truncated_product(const ProductModel& model, cplx lambda) {
    model.validate();
    const std::size_t N = model.truncation, half = N / 2;
    cplx s{};
    bool zero = false;
    ProductValue out;
    for (std::size_t n = 0; n < N; ++n) {
        if (n == half) out.half = zero ? ScaledValue{} : detail::from_log(s, model.constant);
        const cplx f = 1.0 - lambda / model.zeros[n];
        if (f == cplx{}) zero = true;
        else s += std::log(f);
    }
    if (N == half) out.half = detail::from_log(s, model.constant);
    if (model.tail_reciprocal_sum) s -= lambda * *model.tail_reciprocal_sum;
    out.full = zero ? ScaledValue{} : detail::from_log(s, model.constant);
    return out;
}

inline cplx true_value(const ScaledValue& v) { return v.value * std::exp(std::min(v.log_scale, 700.0)); }

// ---------------------------------------------------------------- constants

struct ConstantFit {
    cplx constant{};      // Delta(0) (or Delta_inf(0))
    cplx median_ratio{};  // median of Delta / G_N over the sample circle
    double relative_gap = 0.0;
    double budget = 0.0;  // truncation error estimate from |G_N - G_{N/2}|
    bool consistent = false;
};

inline ConstantFit fit_constant(const Problem& p, Which which, const ZeroSequence& seq, const OdeOptions& opts = {}) {
    p.validate();
    CharSample at0 = char_delta(p, 0.0, 0, opts);
    const cplx c = which == Which::B ? at0.delta : at0.delta_inf;
    const cplx other = which == Which::B ? at0.delta_inf : at0.delta;
    if (std::abs(c) < 1e-10 * (1.0 + std::abs(other)))
        throw ComputationError("characteristic function vanishes at 0; shift q by a constant first");
    ConstantFit fit;
    fit.constant = c;
    if (seq.size() == 0) {
        fit.median_ratio = c;
        fit.consistent = true;
        return fit;
    }

    ProductModel model{seq, 1.0, seq.size(), std::nullopt};
    const double r = 0.5 * std::abs(seq[0]);
    std::vector<double> re, im;
    for (int k = 0; k < 8; ++k) {
        const cplx z = std::polar(r, 2.0 * pi * (k + 0.37) / 8);
        CharValue cv = characteristic(p, which, z, 0, opts);
        ProductValue pv = truncated_product(model, z);
        const cplx g = true_value(pv.full), gh = true_value(pv.half);
        const cplx ratio = cv.d[0] * std::exp(cv.log_scale) / g;
        re.push_back(ratio.real());
        im.push_back(ratio.imag());
        fit.budget = std::max(fit.budget, std::abs(g - gh) / std::abs(g));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    fit.median_ratio = {median(re), median(im)};
    fit.relative_gap = std::abs(fit.median_ratio - c) / std::abs(c);
    fit.consistent = fit.relative_gap <= 2.0 * fit.budget + 1e-8;
    return fit;
}

// ---------------------------------------------------------------- growth

// Geometric grid lo, lo*10^{1/per_decade}, ..., hi.
inline std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0 && hi > lo && per_decade > 0)) throw ValidationError("geometric grid needs 0 < lo < hi");
    const int n = int(std::round(std::log10(hi / lo) * per_decade));
    std::vector<double> g;
    for (int k = 0; k <= n; ++k) g.push_back(lo * std::pow(10.0, double(k) / per_decade));
    g.back() = hi;
    return g;
}

// |Im sqrt(iy)| = sqrt(|y|/2) on the principal branch.
inline double ray_growth(double y) { return std::sqrt(std::abs(y) / 2.0); }

struct GrowthFit {
    std::vector<double> y, log_abs;
    double c = 0.0;         // coefficient of sqrt(|y|/2)
    double p = 0.0;         // power of |y|
    double constant = 0.0;
    double residual = 0.0;  // RMS of the fit

    double prediction(double yy) const { return c * ray_growth(yy) + p * std::log(std::abs(yy)) + constant; }
};

// Least squares log|f(iy)| = c sqrt(|y|/2) + p log|y| + const.
inline GrowthFit growth_fit(const std::vector<double>& y, const std::vector<double>& log_abs) {
    if (y.size() != log_abs.size()) throw ValidationError("growth_fit: sample arrays differ in length");
    if (y.size() < 8) throw ValidationError("growth_fit needs at least 8 samples");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : y) {
        if (!(std::abs(v) > 0.0) || !std::isfinite(v)) throw ValidationError("growth_fit: y must be finite and nonzero");
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
    }
    if (hi / lo < 1e3) throw ValidationError("growth_fit: samples must span at least 3 decades");
    const Eigen::Index n = Eigen::Index(y.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = ray_growth(y[i]);
        A(i, 1) = std::log(std::abs(y[i]));
        A(i, 2) = 1.0;
        b(i) = log_abs[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 3) throw ComputationError("growth_fit: degenerate design matrix (samples too clustered)");
    const Eigen::VectorXd x = qr.solve(b);
    GrowthFit g;
    g.y = y;
    g.log_abs = log_abs;
    g.c = x(0);
    g.p = x(1);
    g.constant = x(2);
    g.residual = std::sqrt((A * x - b).squaredNorm() / double(n));
    return g;
}

// log|Delta(iy)| (or Delta_inf) along the ray.
inline std::vector<double> ray_log_abs(const Problem& p, Which which, const std::vector<double>& y,
                                       const OdeOptions& opts = {}) {
    std::vector<double> out;
    for (double v : y) {
        CharSample cs = char_delta(p, cplx(0.0, v), 0, opts);
        out.push_back(which == Which::B ? cs.log_abs_delta() : cs.log_abs_delta_inf());
    }
    return out;
}

// ---------------------------------------------------------------- counting

struct CountingMargin {
    double margin = 0.0;  // min of N_X - l1 N_B - l2 N_Binf - l3
    double t_at = 0.0;
};

// Evaluated at every jump of the three counting functions inside [t_lo, t_hi]
// (just before and just after), plus the endpoints.
inline CountingMargin check_counting_bound(const ZeroSequence& X, const ZeroSequence& sB, const ZeroSequence& sBinf,
                                           double l1, double l2, double l3, double t_lo, double t_hi) {
    if (!(t_lo >= 0.0 && t_hi >= t_lo)) throw ValidationError("counting range must satisfy 0 <= t_lo <= t_hi");
    std::vector<double> ts{t_lo, t_hi};
    for (const ZeroSequence* s : {&X, &sB, &sBinf})
        for (const auto& r : s->records) {
            const double a = std::abs(r.lambda);
            for (double t : {a, std::nextafter(a, std::numeric_limits<double>::infinity())})
                if (t >= t_lo && t <= t_hi) ts.push_back(t);
        }
    std::sort(ts.begin(), ts.end());
    CountingMargin cm{std::numeric_limits<double>::infinity(), t_lo};
    for (double t : ts) {
        const double v = counting_function(X, t) - l1 * counting_function(sB, t) - l2 * counting_function(sBinf, t) - l3;
        if (v < cm.margin) cm = {v, t};
    }
    return cm;
}

// ---------------------------------------------------------------- spectral products along rays

// G = (Delta/Delta(0))^{power_B} (Delta_inf/Delta_inf(0))^{power_B_inf}
//     * prod_{extra} (1 - lambda/z) / prod_{removed} (1 - lambda/z).
// This is the full canonical product over sigma(B)^{power_B} u sigma(B_inf)^{power_B_inf}
// with finitely many zeros added or taken out; no truncation error.
struct SpectralProduct {
    Problem problem;
    int power_B = 0;
    int power_B_inf = 0;
    std::vector<cplx> removed;
    std::vector<cplx> extra;

    // log |G(lambda)|
    double log_abs(cplx lambda, const OdeOptions& opts = {}) const {
        double s = 0.0;
        if (power_B != 0 || power_B_inf != 0) {
            CharSample at0 = char_delta(problem, 0.0, 0, opts);
            CharSample cs = char_delta(problem, lambda, 0, opts);
            if (power_B != 0) {
                if (at0.delta == cplx{}) throw ComputationError("Delta(0) = 0; shift q by a constant");
                s += power_B * (cs.log_abs_delta() - at0.log_abs_delta());
            }
            if (power_B_inf != 0) {
                if (at0.delta_inf == cplx{}) throw ComputationError("Delta_inf(0) = 0; shift q by a constant");
                s += power_B_inf * (cs.log_abs_delta_inf() - at0.log_abs_delta_inf());
            }
        }
        for (cplx z : extra) {
            if (z == cplx{}) throw ValidationError("product zeros must be nonzero");
            s += std::log(std::abs(1.0 - lambda / z));
        }
        for (cplx z : removed) {
            if (z == cplx{}) throw ValidationError("product zeros must be nonzero");
            s -= std::log(std::abs(1.0 - lambda / z));
        }
        return s;
    }
};

struct RayBound {
    std::vector<double> y;
    std::vector<double> log_quantity;  // log(|G(iy)| |y|^{-(l1/2+l3)} e^{-pi(l1+l2)|Im sqrt(iy)|})
    double minimum = 0.0;              // min of the quantity itself
    double tail_slope = 0.0;           // d log(quantity) / d log y over the upper half of the samples
    bool bounded_below = false;        // minimum > 0 and tail_slope >= -0.05
};

template <class LogAbsG>
RayBound number_ray_bound(LogAbsG&& log_abs_g, double l1, double l2, double l3, const std::vector<double>& ys) {
    if (ys.size() < 4) throw ValidationError("ray bound needs at least 4 samples");
    RayBound rb;
    rb.y = ys;
    double mn = std::numeric_limits<double>::infinity();
    for (double y : ys) {
        const double lq = log_abs_g(cplx(0.0, y)) - (l1 / 2.0 + l3) * std::log(std::abs(y)) -
                          pi * (l1 + l2) * ray_growth(y);
        rb.log_quantity.push_back(lq);
        mn = std::min(mn, lq);
    }
    rb.minimum = std::exp(mn);
    const std::size_t h = ys.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(ys.size() - h);
    for (std::size_t i = h; i < ys.size(); ++i) {
        const double x = std::log(ys[i]), v = rb.log_quantity[i];
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    rb.tail_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rb.bounded_below = rb.minimum > 0.0 && std::isfinite(mn) && rb.tail_slope >= -0.05;
    return rb;
}

} // namespace sturmdisc
