#pragma once

#include <sturmdisc/ode.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace sturmdisc {

enum class Which { B, B_inf };

inline const char* to_string(Which w) { return w == Which::B ? "B" : "B_inf"; }

// Values are mantissas: the true value is e^{log_scale} times the stored one.
// log_scale is zero unless the true values would overflow (|Im sqrt(lambda)| pi > 600).
struct CharSample {
    cplx lambda{};
    cplx delta{};
    cplx delta_inf{};
    std::vector<cplx> derivatives;      // Delta^{(j)}, j = 0..k
    std::vector<cplx> derivatives_inf;  // Delta_inf^{(j)}, j = 0..k
    double log_scale = 0.0;

    double log_abs_delta() const { return std::log(std::abs(delta)) + log_scale; }
    double log_abs_delta_inf() const { return std::log(std::abs(delta_inf)) + log_scale; }
    const std::vector<cplx>& of(Which w) const { return w == Which::B ? derivatives : derivatives_inf; }
};

inline constexpr double fold_threshold = 600.0;

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Delta = phi'(pi) + H phi(pi) (Dirichlet at pi: Delta = Delta_inf), Delta_inf = -phi(pi),
// derivatives from the lambda-chain: Delta^{(j)} = j! (phi_j'(pi) + H phi_j(pi)).
inline CharSample char_delta(const Problem& p, cplx lambda, int k = 0, const OdeOptions& opts = {}) {
    if (k < 0) throw ValidationError("derivative order must be >= 0");
    SolutionChain ch = solve_chain(p, lambda, ChainKind::phi, k, {}, opts);
    const ChainState& end = ch.states.back();
    CharSample cs;
    cs.lambda = lambda;
    double scale = 1.0;
    if (end.log_scale > fold_threshold) cs.log_scale = end.log_scale;
    else scale = std::exp(end.log_scale);
    for (int j = 0; j <= k; ++j) {
        const auto& [y, dy] = end.values[j];
        const double f = factorial(j) * scale;
        const cplx dinf = -f * y;
        cplx dr;
        if (auto* r = std::get_if<Robin>(&p.H)) dr = f * (dy + r->H * y);
        else dr = dinf;
        cs.derivatives.push_back(dr);
        cs.derivatives_inf.push_back(dinf);
    }
    cs.delta = cs.derivatives[0];
    cs.delta_inf = cs.derivatives_inf[0];
    return cs;
}

// The same Delta from the psi side: Delta = -U(psi) = -(psi'(0) - h psi(0)).
inline cplx char_delta_via_psi(const Problem& p, cplx lambda, Which which = Which::B, const OdeOptions& opts = {}) {
    SolutionChain ch = solve_chain(p, lambda, which == Which::B ? ChainKind::psi : ChainKind::psi_inf, 0, {}, opts);
    const ChainState& st = ch.states.front();
    return -(st.dy() - p.h * st.y());
}

// Characteristic function of B or B_inf with derivatives up to k, as mantissas
// sharing one log scale.
struct CharValue {
    std::vector<cplx> d;
    double log_scale = 0.0;
};

inline CharValue characteristic(const Problem& p, Which which, cplx lambda, int k = 0, const OdeOptions& opts = {}) {
    CharSample cs = char_delta(p, lambda, k, opts);
    return CharValue{which == Which::B ? cs.derivatives : cs.derivatives_inf, cs.log_scale};
}

// M = Delta_inf / Delta; nullopt marks a pole (|Delta| < 1e-10 (1 + |Delta_inf|)).
inline std::optional<cplx> weyl_m(const Problem& p, cplx lambda, const OdeOptions& opts = {}) {
    CharSample cs = char_delta(p, lambda, 0, opts);
    const double e = std::exp(std::min(cs.log_scale, 700.0));
    if (std::abs(cs.delta) * e < 1e-10 * (1.0 + std::abs(cs.delta_inf) * e)) return std::nullopt;
    return cs.delta_inf / cs.delta;
}

// ---------------------------------------------------------------- pair functions

struct EvalPoint {
    enum Kind { pi_end, at_b, d_jump } kind = pi_end;
    double b = pi;

    static EvalPoint at_pi() { return {pi_end, pi}; }
    static EvalPoint at(double b) { return {at_b, b}; }
    static EvalPoint jump() { return {d_jump, 0.0}; }
};

// F = <phi, phi~> at the evaluation point (with the jump-difference term when
// b < d), F1 = phi - phi~, F2 = phi' - phi~' at that point.
// F carries e^{2 log_scale}, F1 and F2 carry e^{log_scale}; log_scale is zero
// unless the values would overflow.
struct PairSample {
    cplx lambda{};
    cplx F{}, F1{}, F2{};
    double x = pi;
    Side side = Side::interior;
    double log_scale = 0.0;
};

inline PairSample f_function(const Problem& a, const Problem& b, cplx lambda, EvalPoint at = EvalPoint::at_pi(),
                             const OdeOptions& opts = {}) {
    if (at.kind != EvalPoint::pi_end && a.d != b.d)
        throw ValidationError("pair functions away from pi need a common transmission point d");
    double xe = pi;
    Side side = Side::interior;
    bool add_jump = false;
    if (at.kind == EvalPoint::d_jump) {
        xe = a.d;
        side = Side::right;
    } else if (at.kind == EvalPoint::at_b) {
        if (!(at.b >= 0.0 && at.b <= pi)) throw ValidationError("evaluation point b outside [0, pi]");
        xe = at.b;
        if (xe == a.d) side = Side::right;
        else if (xe < a.d) add_jump = true;
    }

    Shooter sh(lambda, 0.0, pi, opts);
    const int ta = sh.add_track(a, 0, 1.0, a.h);
    const int tb = sh.add_track(b, 0, 1.0, b.h);
    sh.record_at({xe});
    sh.run();

    auto values = [&](const Snapshot& sn) {
        auto [y, dy] = sh.scaled(sn, ta, 0);
        auto [z, dz] = sh.scaled(sn, tb, 0);
        return std::array<cplx, 4>{y, dy, z, dz};
    };
    auto br = [](const std::array<cplx, 4>& v) { return v[0] * v[3] - v[1] * v[2]; };

    const Snapshot& sn = sh.at(xe, side);
    const auto v = values(sn);
    PairSample ps;
    ps.lambda = lambda;
    ps.x = xe;
    ps.side = sn.side;
    ps.log_scale = sn.log_scale;
    ps.F = br(v);
    ps.F1 = v[0] - v[2];
    ps.F2 = v[1] - v[3];
    if (add_jump) {
        // F = <phi, phi~>(b) + <phi, phi~>|_{d-0}^{d+0}, expressed at the scale of d.
        const Snapshot& l = sh.at(a.d, Side::left);
        const Snapshot& r = sh.at(a.d, Side::right);
        const double shift = std::exp(-2.0 * (l.log_scale - sn.log_scale));
        ps.F = ps.F * shift + (br(values(r)) - br(values(l)));
        const double shift1 = std::exp(-(l.log_scale - sn.log_scale));
        ps.F1 *= shift1;
        ps.F2 *= shift1;
        ps.log_scale = l.log_scale;
    }
    if (2.0 * ps.log_scale < fold_threshold) {
        const double e = std::exp(ps.log_scale);
        ps.F *= e * e;
        ps.F1 *= e;
        ps.F2 *= e;
        ps.log_scale = 0.0;
    }
    return ps;
}

// F(x) = <phi, phi~>(x) through its integral form
//   (h~ - h) + int_0^x (q~ - q) phi phi~ + bracket jumps,
// returned as a mantissa with scale e^{log_scale}.
struct ScaledValue {
    cplx value{};
    double log_scale = 0.0;
    double magnitude = 0.0;  // same scale as value

    double log_abs() const { return std::log(std::abs(value)) + log_scale; }
};

inline ScaledValue f_function_integral(const Problem& a, const Problem& b, cplx lambda, double x_end = pi,
                                       const OdeOptions& opts = {}) {
    CrossBracket cb = cross_bracket(a, {1.0, a.h}, b, {1.0, b.h}, lambda, 0.0, x_end, opts);
    return ScaledValue{cb.integral_form, cb.log_scale, cb.magnitude};
}

} // namespace sturmdisc
