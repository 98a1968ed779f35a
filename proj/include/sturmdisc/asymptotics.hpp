#pragma once

#include <sturmdisc/charfn.hpp>
#include <sturmdisc/fit.hpp>
#include <sturmdisc/funcspace.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sturmdisc {

// (+-)_j: -1 for j = 0, 1 (mod 4), +1 for j = 2, 3 (mod 4).
inline int sign_pm(int j) {
    const int r = ((j % 4) + 4) % 4;
    return r <= 1 ? -1 : 1;
}

// nu_{2s} = sin(sqrt(lambda) x) / (2 sqrt(lambda))^{2s}, nu_{2s+1} = cos(sqrt(lambda) x) / (2 sqrt(lambda))^{2s+1}.
inline cplx nu(int j, double x, cplx lambda) {
    if (j < 0) throw ValidationError("nu_j needs j >= 0");
    const cplx k = std::sqrt(lambda);
    const cplx den = std::pow(2.0 * k, j);
    return (j % 2 == 0 ? std::sin(k * x) : std::cos(k * x)) / den;
}

// d/dx nu_j(x, lambda)
inline cplx nu_dx(int j, double x, cplx lambda) {
    const cplx k = std::sqrt(lambda);
    const cplx den = std::pow(2.0 * k, j);
    return (j % 2 == 0 ? k * std::cos(k * x) : -k * std::sin(k * x)) / den;
}

// Leading terms of phi and phi': cos(sqrt(lambda) x) before d,
// b1 cos(sqrt(lambda) x) + b2 cos(sqrt(lambda)(2d - x)) after it.
inline std::pair<cplx, cplx> leading_phi(const Problem& p, double x, cplx lambda) {
    if (x == p.d) throw ValidationError("leading_phi is two-valued at x = d");
    if (!(x >= 0.0 && x <= pi)) throw ValidationError("x outside [0, pi]");
    const cplx k = std::sqrt(lambda);
    if (x < p.d) return {std::cos(k * x), -k * std::sin(k * x)};
    const double b1 = p.b1(), b2 = p.b2();
    return {b1 * std::cos(k * x) + b2 * std::cos(k * (2.0 * p.d - x)),
            k * (-b1 * std::sin(k * x) + b2 * std::sin(k * (2.0 * p.d - x)))};
}

// ---------------------------------------------------------------- expansion table

struct ExpansionTable {
    int m = 0;
    double x_max = 0.0;
    SmoothFn::Kind backend = SmoothFn::Kind::poly;
    SmoothFn q;      // the potential on [0, x_max]
    SmoothFn q_m;    // q^{(m)}
    SmoothFn sigma;  // int_0^x q
    std::vector<std::vector<SmoothFn>> f;  // f[p][j], p, j = 1..m+2 (index 0 unused)
    std::vector<SmoothFn> a;               // a[j], j = 1..m+2 (index 0 unused)
    std::vector<SmoothFn> b;               // b[j], j = 0..m+1
    std::vector<double> grid;

    const SmoothFn& F(int p, int j) const { return f.at(p).at(j); }

    // Row-major samples of f_{p,j} on the grid.
    std::vector<cplx> sample_f(int p, int j) const {
        std::vector<cplx> v;
        for (double x : grid) v.push_back(F(p, j)(x));
        return v;
    }
};

inline ExpansionTable build_expansion(const PotentialExpr& q, int m, const std::vector<double>& x_grid,
                                      int cheb_nodes = 48) {
    if (m < 0) throw ValidationError("expansion order m must be >= 0");
    if (x_grid.empty()) throw ValidationError("x_grid must not be empty");
    double X = 0.0;
    for (double x : x_grid) {
        if (!(x >= 0.0 && x <= pi)) throw ValidationError("grid point outside [0, pi]");
        X = std::max(X, x);
    }
    if (!(X > 0.0)) throw ValidationError("x_grid must reach beyond 0");
    for (double bp : q.breakpoints())
        if (bp > 0.0 && bp < X)
            throw ValidationError("q has a piece boundary inside [0, " + expr::format_double(X) +
                                  "]; the order m exceeds its differentiability there");
    const Expr ast = q.pieces()[q.piece_index(0.0, Side::right)].ast;

    ExpansionTable t;
    t.m = m;
    t.x_max = X;
    t.grid = x_grid;

    const auto poly = expr::as_polynomial(ast);
    t.backend = poly ? SmoothFn::Kind::poly : SmoothFn::Kind::cheb;
    auto q_deriv = [&](int k) {
        if (poly) return SmoothFn::polynomial(*poly, X).derivative(k);
        const Expr d = expr::differentiate(ast, unsigned(k));
        return SmoothFn::chebyshev([&](double x) { return expr::eval(d, x); }, X, cheb_nodes);
    };
    t.q = q_deriv(0);
    t.q_m = q_deriv(m);
    t.sigma = t.q.antiderivative();

    const int J = m + 2;
    auto constant = [&](cplx v) { return SmoothFn::constant(v, X); };
    t.f.assign(J + 1, std::vector<SmoothFn>(J + 1, constant(0.0)));

    // f_{1,j} = (+-)_j (sigma^{(j-1)}(x) - (-1)^{j-1} sigma^{(j-1)}(0))
    for (int j = 1; j <= J; ++j) {
        const SmoothFn s = j == 1 ? t.sigma : q_deriv(j - 2);
        const double sgn = (j - 1) % 2 == 0 ? 1.0 : -1.0;
        t.f[1][j] = cplx(sign_pm(j)) * (s - constant(sgn * s(0.0)));
    }
    for (int p = 2; p <= J; ++p) {
        // f_{p,p} = (-1)^p int_0^x q f_{p-1,p-1}
        t.f[p][p] = cplx(p % 2 == 0 ? 1.0 : -1.0) * (t.q * t.f[p - 1][p - 1]).antiderivative();
        for (int j = p + 1; j <= J; ++j) {
            SmoothFn acc = constant(0.0);
            const double sgn_j = (j - 1) % 2 == 0 ? 1.0 : -1.0;
            for (int s = 1; s <= j - 2; ++s) {
                const SmoothFn g = (t.q * t.f[p - 1][s]).derivative(j - s - 2);
                acc = acc - cplx(sign_pm(s) * sign_pm(j)) * (g - constant(sgn_j * g(0.0)));
            }
            acc = acc + cplx(j % 2 == 0 ? 1.0 : -1.0) * (t.q * t.f[p - 1][j - 1]).antiderivative();
            t.f[p][j] = acc;
        }
    }

    t.a.assign(J + 1, constant(0.0));
    for (int j = 1; j <= J; ++j)
        for (int p = (j == J ? 2 : 1); p <= J; ++p) t.a[j] = t.a[j] + t.f[p][j];

    t.b.assign(J, constant(0.0));
    t.b[0] = cplx(-0.5) * t.f[1][1];
    for (int j = 1; j <= m + 1; ++j) {
        const double sg = (j + 1) % 2 == 0 ? 1.0 : -1.0;
        for (int p = (j == m + 1 ? 2 : 1); p <= J; ++p)
            t.b[j] = t.b[j] + t.f[p][j].derivative() + cplx(0.5 * sg) * t.f[p][j + 1];
    }
    return t;
}

namespace detail {

template <class G>
cplx integrate_complex(G&& g, double a, double b) {
    if (a == b) return {};
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 61>::integrate([&](double t) { return g(t).real(); }, a, b, 15, 1e-13);
    const double im = gauss_kronrod<double, 61>::integrate([&](double t) { return g(t).imag(); }, a, b, 15, 1e-13);
    return {re, im};
}

} // namespace detail

// Truncated combined expansion of (y_2, y_2') at x; with_integral adds the
// q^{(m)} integral terms (evaluated by adaptive Gauss-Kronrod).
inline std::pair<cplx, cplx> expansion_y2(const ExpansionTable& t, double x, cplx lambda, bool with_integral = true) {
    if (!(x >= 0.0 && x <= t.x_max)) throw ValidationError("x outside the expansion interval");
    const cplx k = std::sqrt(lambda);
    const int J = t.m + 2;
    cplx y = std::sin(k * x) / k, dy = std::cos(k * x);
    for (int j = 1; j <= J; ++j) y += t.a[j](x) * nu(j, x, lambda) / k;
    for (int j = 0; j <= J - 1; ++j) dy += t.b[j](x) * nu(j, x, lambda) / k;
    if (with_integral) {
        const double s = sign_pm(t.m + 2);
        y += s / k * detail::integrate_complex([&](double u) { return nu(t.m + 1, x - 2 * u, lambda) * t.q_m(u); }, 0.0, x);
        dy += s / k * detail::integrate_complex([&](double u) { return nu_dx(t.m + 1, x - 2 * u, lambda) * t.q_m(u); }, 0.0, x);
    }
    return {y, dy};
}

// ---------------------------------------------------------------- S_p, C_p

struct SSeries {
    std::vector<cplx> S, C;                    // partial sums sum_{p<=P}
    std::vector<cplx> terms_S, terms_C;        // S_p, C_p
    std::vector<double> magnitudes;            // |S_p|
};

// y_2 = sum S_p, y_2' = sum C_p with S_0 = sin(sqrt(lambda) x)/sqrt(lambda) and
// S_p'' + lambda S_p = q S_{p-1}, S_p(0) = S_p'(0) = 0, C_p = S_p'.
// (This cascade is the differential form of the iterated integrals.)
inline SSeries s_series(const PotentialExpr& q, double x, cplx lambda, int P, const OdeOptions& opts = {}) {
    if (P < 0) throw ValidationError("P must be >= 0");
    if (!(x >= 0.0 && x <= pi)) throw ValidationError("x outside [0, pi]");
    check_finite(lambda);
    const std::size_t n = std::size_t(P + 1);
    std::vector<cplx> y(2 * n, cplx{});
    y[n] = 1.0;  // S_0'(0)
    std::vector<double> stops{0.0};
    for (double bp : q.breakpoints())
        if (bp > 0.0 && bp < x) stops.push_back(bp);
    stops.push_back(x);
    ComplexIntegrator integ(opts);
    const double h_hint = std::min(0.05, 0.5 / frequency_scale(lambda));
    for (std::size_t s = 0; s + 1 < stops.size(); ++s) {
        const double lo = stops[s], hi = stops[s + 1];
        if (hi <= lo) continue;
        auto rhs = [&](double t, const cplx* u, cplx* du) {
            const Side side = t <= lo ? Side::right : (t >= hi ? Side::left : Side::interior);
            const cplx qv = q(std::clamp(t, lo, hi), side);
            for (std::size_t p = 0; p < n; ++p) {
                du[p] = u[n + p];
                du[n + p] = -lambda * u[p] + (p > 0 ? qv * u[p - 1] : cplx{});
            }
        };
        integ.integrate(rhs, y, lo, hi, 2 * n, h_hint);
    }
    SSeries out;
    cplx sS{}, sC{};
    for (std::size_t p = 0; p < n; ++p) {
        sS += y[p];
        sC += y[n + p];
        out.terms_S.push_back(y[p]);
        out.terms_C.push_back(y[n + p]);
        out.magnitudes.push_back(std::abs(y[p]));
        out.S.push_back(sS);
        out.C.push_back(sC);
    }
    return out;
}

// ---------------------------------------------------------------- decay fits

enum class Combination { w1111, w1112, w1113, w1114 };

inline const char* to_string(Combination c) {
    switch (c) {
    case Combination::w1111: return "1111";
    case Combination::w1112: return "1112";
    case Combination::w1113: return "1113";
    case Combination::w1114: return "1114";
    }
    return "?";
}

inline Combination parse_combination(const std::string& s) {
    if (s == "1111") return Combination::w1111;
    if (s == "1112") return Combination::w1112;
    if (s == "1113") return Combination::w1113;
    if (s == "1114") return Combination::w1114;
    throw ValidationError("unknown combination '" + s + "' (expected 1111, 1112, 1113 or 1114)");
}

// Claimed decay exponent in powers of |sqrt(lambda)|.
inline int claimed_exponent(Combination c, int m) {
    switch (c) {
    case Combination::w1111: return m + 1;
    case Combination::w1112:
    case Combination::w1113: return m + 2;
    case Combination::w1114: return m + 3;
    }
    return m + 1;
}

enum class DecayStatus { fitted, identically_zero, below_floor };

inline const char* to_string(DecayStatus s) {
    switch (s) {
    case DecayStatus::fitted: return "fitted";
    case DecayStatus::identically_zero: return "identically zero";
    case DecayStatus::below_floor: return "decayed below measurement floor";
    }
    return "?";
}

struct DecayFit {
    std::string label;
    double claimed = 0.0;   // claimed decay exponent (positive)
    double threshold = 0.0; // pass iff slope <= threshold
    std::vector<double> y;
    std::vector<double> normalized;  // |W(iy)| e^{-2|Im sqrt(iy)| L}
    std::vector<double> floor;
    std::vector<bool> used;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double fit_residual = 0.0;
    DecayStatus status = DecayStatus::fitted;
    bool pass = false;
};

struct DecayOptions {
    double y_min = 1e2;
    double y_max = 1e6;
    int per_decade = 2;
    double delta = 0.2;    // smoothness window [x0 - delta, x0]
    double margin = 0.3;   // pass iff slope <= -claimed + margin
    bool check_matching = true;
    OdeOptions ode{};
};

namespace detail {

inline std::vector<double> ray_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0 && hi > lo && per_decade > 0)) throw ValidationError("ray grid needs 0 < y_min < y_max");
    const int n = int(std::round(std::log10(hi / lo) * per_decade));
    std::vector<double> g;
    for (int k = 0; k <= n; ++k) g.push_back(lo * std::pow(10.0, double(k) / per_decade));
    g.back() = hi;
    return g;
}

// Fits log(normalized) against abscissa(y) using the points above the floor.
inline void finish_decay_fit(DecayFit& df, const std::vector<double>& magnitudes, double rtol,
                             double (*abscissa)(double)) {
    const double floor_factor = rtol + 1e3 * std::numeric_limits<double>::epsilon();
    bool all_zero = true;
    std::vector<double> u, v;
    for (std::size_t i = 0; i < df.y.size(); ++i) {
        const double fl = floor_factor * magnitudes[i];
        df.floor.push_back(fl);
        if (df.normalized[i] != 0.0 || magnitudes[i] != 0.0) all_zero = false;
        const bool ok = df.normalized[i] > fl && df.normalized[i] > 0.0;
        df.used.push_back(ok);
        if (ok) {
            u.push_back(abscissa(df.y[i]));
            v.push_back(std::log(df.normalized[i]));
        }
    }
    if (all_zero) {
        df.status = DecayStatus::identically_zero;
        df.pass = true;
        return;
    }
    if (u.size() < 3) {
        df.status = DecayStatus::below_floor;
        df.pass = true;
        return;
    }
    const LineFit lf = line_fit(u, v);
    df.slope = lf.slope;
    df.intercept = lf.intercept;
    df.fit_residual = lf.residual;
    df.status = DecayStatus::fitted;
    df.pass = df.slope <= df.threshold;
}

inline double log_sqrt_abs(double y) { return 0.5 * std::log(std::abs(y)); }

// q_A^{(j)}(x0-) = q_B^{(j)}(x0-) for j = 0..m, and no piece boundary in (x0 - delta, x0).
inline void check_left_matching(const PotentialExpr& qa, const PotentialExpr& qb, double x0, int m, double delta) {
    for (const PotentialExpr* q : {&qa, &qb})
        for (double bp : q->breakpoints())
            if (bp > x0 - delta && bp < x0)
                throw ValidationError("potential is not smooth on [x0 - delta, x0] (piece boundary at " +
                                      expr::format_double(bp) + ")");
    const Expr a = qa.pieces()[qa.piece_index(x0, Side::left)].ast;
    const Expr b = qb.pieces()[qb.piece_index(x0, Side::left)].ast;
    for (int j = 0; j <= m; ++j) {
        const cplx va = expr::eval(expr::differentiate(a, unsigned(j)), x0);
        const cplx vb = expr::eval(expr::differentiate(b, unsigned(j)), x0);
        if (std::abs(va - vb) > 1e-9 * (1.0 + std::abs(va)))
            throw ValidationError("derivative " + std::to_string(j) + " of the two potentials differs at x0");
    }
}

} // namespace detail

// Wronskian combination of the fundamental pairs y_{i,r} (problem A) and
// y~_{i,r} (problem B) at x0 along lambda = iy, normalized by
// e^{-2|Im sqrt(iy)|(x0 - r)}; slope fitted against log|sqrt(iy)|.
// m = -1 is the L^1 case (no matching required).
inline DecayFit decay_order_fit(const Problem& A, const Problem& B, double r, double x0, int m, Combination c,
                                const DecayOptions& o = {}) {
    if (m < -1) throw ValidationError("m must be >= -1");
    if (!(r >= 0.0 && r < x0 && x0 <= pi)) throw ValidationError("need 0 <= r < x0 <= pi");
    if (o.check_matching && m >= 0) detail::check_left_matching(A.q, B.q, x0, m, o.delta);
    const std::pair<cplx, cplx> e1{1.0, 0.0}, e2{0.0, 1.0};
    std::pair<cplx, cplx> ia = e1, ib = e1;
    switch (c) {
    case Combination::w1111: break;
    case Combination::w1112: ib = e2; break;
    case Combination::w1113: ia = e2; break;
    case Combination::w1114: ia = e2; ib = e2; break;
    }
    DecayFit df;
    df.label = to_string(c);
    df.claimed = claimed_exponent(c, m);
    df.threshold = -df.claimed + o.margin;
    df.y = detail::ray_grid(o.y_min, o.y_max, o.per_decade);
    std::vector<double> mags;
    for (double y : df.y) {
        CrossBracket cb = cross_bracket(A, ia, B, ib, cplx(0.0, y), r, x0, o.ode);
        df.normalized.push_back(std::abs(cb.integral_form));
        mags.push_back(cb.magnitude);
    }
    detail::finish_decay_fit(df, mags, o.ode.rtol, detail::log_sqrt_abs);
    return df;
}

} // namespace sturmdisc
