#pragma once

#include <sturmdisc/asymptotics.hpp>
#include <sturmdisc/entire.hpp>
#include <sturmdisc/parallel.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace sturmdisc {

// Two problems agreeing on [b, pi], with C^m matching of the potentials at b
// (m = -1: no smoothness, L^1 only).
struct PairExperiment {
    Problem a;
    Problem b;
    double b_point = pi;
    int m = 0;

    bool common_d() const { return a.d == b.d; }

    void validate() const {
        a.validate();
        b.validate();
        if (!(b_point > 0.0 && b_point <= pi)) throw ValidationError("agreement point b must lie in (0, pi]");
        if (m < -1) throw ValidationError("matching order m must be >= -1");
        constexpr int samples = 257;
        for (int i = 0; i < samples; ++i) {
            const double x = b_point + (pi - b_point) * i / (samples - 1);
            const Side side = i == 0 ? Side::right : (i == samples - 1 ? Side::left : Side::interior);
            const cplx qa = a.q(x, side), qb = b.q(x, side);
            if (std::abs(qa - qb) > 1e-12 * (1.0 + std::abs(qa)))
                throw ValidationError("potentials differ on [b, pi] at x = " + expr::format_double(x));
        }
    }
};

// q_B = q_A on [b, pi], q_A + (x - b)^{m+1} w(x) on [0, b).
inline PotentialExpr splice_potential(const PotentialExpr& qa, double b, int m, const std::string& w = "1") {
    if (!(b > 0.0 && b <= pi)) throw ValidationError("splice point b must lie in (0, pi]");
    if (m < -1) throw ValidationError("matching order m must be >= -1");
    const std::string bump = m == -1 ? "(" + w + ")"
                                     : "(x - " + expr::format_double(b) + ")^" + std::to_string(m + 1) + " * (" + w + ")";
    std::vector<Piece> out;
    for (const Piece& p : qa.pieces()) {
        if (p.from < b) {
            const double to = std::min(p.to, b);
            out.push_back(Piece{p.from, to, "(" + p.source + ") + " + bump, nullptr});
        }
        if (p.to > b) out.push_back(Piece{std::max(p.from, b), p.to, p.source, p.ast});
    }
    return PotentialExpr(std::move(out));
}

inline PairExperiment splice_pair(const Problem& a, double b, int m, const std::string& w = "1") {
    PairExperiment e;
    e.a = a;
    e.b = a;
    e.b.q = splice_potential(a.q, b, m, w);
    e.b_point = b;
    e.m = m;
    return e;
}

namespace detail {

inline bool tail_decreasing(const std::vector<double>& v) {
    for (std::size_t i = v.size() / 2; i + 1 < v.size(); ++i)
        if (!(v[i + 1] < v[i])) return false;
    return true;
}

inline double log_abs_y(double y) { return std::log(std::abs(y)); }

} // namespace detail

// |F(iy)| e^{-2|Im sqrt(iy)| b} against log y; claimed slope -(m+1)/2.
// m = -1 additionally requires the tail to decrease (o(1) rather than O(1)).
inline DecayFit lemma_iy_probe(const PairExperiment& e, const DecayOptions& o = {}) {
    e.validate();
    if (!e.common_d()) throw ValidationError("the decay of F along iy needs a common transmission point d");
    if (!(e.b_point > e.a.d)) throw ValidationError("the iy decay lemma needs b > d");
    if (o.check_matching && e.m >= 0) detail::check_left_matching(e.a.q, e.b.q, e.b_point, e.m, o.delta);
    DecayFit df;
    df.label = "F(iy)";
    df.claimed = 0.5 * (e.m + 1);
    df.threshold = -df.claimed + 0.15;
    df.y = detail::ray_grid(o.y_min, o.y_max, o.per_decade);
    const auto vals = parallel_map(df.y, [&](double y) {
        return f_function_integral(e.a, e.b, cplx(0.0, y), e.b_point, o.ode);
    });
    std::vector<double> mags;
    for (const auto& v : vals) {
        df.normalized.push_back(std::abs(v.value));
        mags.push_back(v.magnitude);
    }
    detail::finish_decay_fit(df, mags, o.ode.rtol, detail::log_abs_y);
    if (e.m == -1 && df.status == DecayStatus::fitted) {
        std::vector<double> logs;
        for (double v : df.normalized) logs.push_back(std::log(v));
        df.pass = df.pass && detail::tail_decreasing(logs);
    }
    return df;
}

// ---------------------------------------------------------------- Fqh

enum class FqhCase { b_after_d, b_at_d, b_before_d };

inline const char* to_string(FqhCase c) {
    switch (c) {
    case FqhCase::b_after_d: return "b > d";
    case FqhCase::b_at_d: return "b = d";
    case FqhCase::b_before_d: return "b < d";
    }
    return "?";
}

struct FqhSample {
    cplx lambda{};
    std::vector<std::string> formulas;
    std::vector<cplx> values;  // all at the common scale e^{2 log_scale}
    double log_scale = 0.0;
    double discrepancy = 0.0;
};

struct FqhReport {
    FqhCase which_case = FqhCase::b_after_d;
    std::vector<FqhSample> samples;
    double worst = 0.0;
};

// F evaluated by every applicable formula: the bracket at pi, the bracket at
// the agreement point (d+0 when b = d, plus the jump difference when b < d),
// and the integral form over [0, pi] (and over [0, b] when b > d).
inline FqhReport fqh_consistency(const PairExperiment& e, const std::vector<cplx>& lambdas, const OdeOptions& opts = {}) {
    e.validate();
    if (!e.common_d()) throw ValidationError("evaluation-point formulas for F need a common transmission point d");
    FqhReport rep;
    const double b = e.b_point, d = e.a.d;
    rep.which_case = b > d ? FqhCase::b_after_d : (b == d ? FqhCase::b_at_d : FqhCase::b_before_d);

    rep.samples = parallel_map(lambdas, [&](cplx lambda) {
        FqhSample s;
        s.lambda = lambda;
        std::vector<std::pair<cplx, double>> raw;  // value, log of its scale
        auto add = [&](const std::string& name, cplx v, double log_scale) {
            s.formulas.push_back(name);
            raw.emplace_back(v, log_scale);
        };
        const PairSample at_pi = f_function(e.a, e.b, lambda, EvalPoint::at_pi(), opts);
        add("bracket at pi", at_pi.F, 2.0 * at_pi.log_scale);
        const PairSample at_b =
            f_function(e.a, e.b, lambda, rep.which_case == FqhCase::b_at_d ? EvalPoint::jump() : EvalPoint::at(b), opts);
        add(rep.which_case == FqhCase::b_at_d       ? "bracket at d+0"
            : rep.which_case == FqhCase::b_before_d ? "bracket at b plus jump difference"
                                                    : "bracket at b",
            at_b.F, 2.0 * at_b.log_scale);
        const ScaledValue full = f_function_integral(e.a, e.b, lambda, pi, opts);
        add("integral form on [0, pi]", full.value, full.log_scale);
        if (rep.which_case == FqhCase::b_after_d) {
            const ScaledValue part = f_function_integral(e.a, e.b, lambda, b, opts);
            add("integral form on [0, b]", part.value, part.log_scale);
        }
        double ref = -std::numeric_limits<double>::infinity();
        for (const auto& [v, ls] : raw) ref = std::max(ref, ls);
        s.log_scale = 0.5 * ref;
        for (const auto& [v, ls] : raw) s.values.push_back(v * std::exp(ls - ref));
        for (std::size_t i = 0; i < s.values.size(); ++i)
            for (std::size_t j = i + 1; j < s.values.size(); ++j) {
                const double den = std::max(std::abs(s.values[i]), std::abs(s.values[j]));
                if (den == 0.0) continue;
                s.discrepancy = std::max(s.discrepancy, std::abs(s.values[i] - s.values[j]) / den);
            }
        return s;
    });
    for (const auto& s : rep.samples) rep.worst = std::max(rep.worst, s.discrepancy);
    return rep;
}

// Default 20-point grid: sqrt(lambda) = k + i t with k in [0.5, 6], |t| <= 0.5.
// Away from this strip the bracket at pi cancels against e^{2|Im sqrt(lambda)| pi}.
inline std::vector<cplx> default_lambda_grid(int n = 20) {
    std::vector<cplx> g;
    for (int j = 0; j < n; ++j) {
        const double k = 0.5 + 5.5 * j / std::max(1, n - 1);
        const double t = (j % 2 == 0 ? 1.0 : -1.0) * (0.1 + 0.4 * ((j * 7) % n) / std::max(1, n - 1));
        g.push_back(cplx(k, t) * cplx(k, t));
    }
    return g;
}

// ---------------------------------------------------------------- ratio probes

enum class RatioKind {
    f_over_g,             // |F| / |G_Xi|
    f1_over_g,            // |F1| / |G_Theta|, F1 = phi(b) - phi~(b)
    f_over_g_phi          // |F| / (|G_Theta| |phi(b)|)
};

inline const char* to_string(RatioKind k) {
    switch (k) {
    case RatioKind::f_over_g: return "F/G";
    case RatioKind::f1_over_g: return "F1/G";
    case RatioKind::f_over_g_phi: return "F/(G phi(b))";
    }
    return "?";
}

// G as a spectral product of problem A's spectra, plus the coefficients of the
// counting inequality it is meant to satisfy.
struct ProductSpec {
    RatioKind kind = RatioKind::f_over_g;
    SpectralProduct g;
    double A = 1.0;          // free constant of the counting hypothesis
    double epsilon = 0.1;    // strict margin for the G_Theta hypothesis
    double spectrum_bound = 400.0;  // spectra computed for |lambda| < bound for the counting check
    double t_lo = 0.0;

    // l1, l2, l3 of N_X >= l1 N_B + l2 N_Binf + l3.
    std::array<double, 3> counting_coefficients(double b, int m) const {
        if (kind == RatioKind::f_over_g) return {A, 2.0 * b / pi - A, -A / 2.0 - (m + 1) / 2.0};
        return {A, b / pi - A, -A / 2.0 + epsilon};
    }
};

struct RatioProbe {
    RatioKind kind = RatioKind::f_over_g;
    std::vector<double> y;
    std::vector<double> log_ratio;
    CountingMargin counting;
    bool counting_ok = false;
    double tail_slope = std::numeric_limits<double>::quiet_NaN();
    bool tail_decreasing = false;
    bool identically_zero = false;
    bool pass = false;
};

namespace detail {

inline double log_abs_phi_at(const Problem& p, cplx lambda, double x, const OdeOptions& opts) {
    Shooter sh(lambda, 0.0, pi, opts);
    const int t = sh.add_track(p, 0, 1.0, p.h);
    sh.record_at({x});
    sh.run();
    const Snapshot& sn = sh.at(x, x == p.d ? Side::right : Side::interior);
    return std::log(std::abs(sh.scaled(sn, t, 0).first)) + sn.log_scale;
}

// The zero sequence X that spec.g stands for, truncated at the bound.
inline ZeroSequence product_sequence(const ProductSpec& spec, const ZeroSequence& sB, const ZeroSequence& sBinf) {
    std::vector<cplx> xs;
    for (int k = 0; k < spec.g.power_B; ++k)
        for (cplx z : sB.values()) xs.push_back(z);
    for (int k = 0; k < spec.g.power_B_inf; ++k)
        for (cplx z : sBinf.values()) xs.push_back(z);
    for (cplx z : spec.g.extra)
        if (std::abs(z) < spec.spectrum_bound) xs.push_back(z);
    for (cplx z : spec.g.removed) {
        if (std::abs(z) >= spec.spectrum_bound) continue;
        std::size_t best = xs.size();
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (std::abs(xs[i] - z) <= 1e-6 * (1.0 + std::abs(z)) &&
                (best == xs.size() || std::abs(xs[i] - z) < std::abs(xs[best] - z)))
                best = i;
        if (best == xs.size())
            throw ValidationError("removed zero " + expr::format_constant(z) + " is not in the product's spectra");
        xs.erase(xs.begin() + std::ptrdiff_t(best));
    }
    return sequence_from_values(xs);
}

} // namespace detail

// Samples the ratio along lambda = iy. The counting hypothesis is checked on
// the computed spectra first; the probe passes when it holds and the upper half
// of the samples decreases monotonically.
inline RatioProbe theorem_ratio_probe(const PairExperiment& e, const ProductSpec& spec, const std::vector<double>& ys,
                                      const SearchOptions& search = {}, const OdeOptions& opts = {}) {
    e.validate();
    if (ys.size() < 4) throw ValidationError("ratio probe needs at least 4 ray samples");
    if (spec.kind != RatioKind::f_over_g && !e.common_d())
        throw ValidationError("values at b need a common transmission point d");
    RatioProbe rp;
    rp.kind = spec.kind;
    rp.y = ys;

    const ZeroSequence sB = find_eigenvalues(spec.g.problem, Which::B, spec.spectrum_bound, search, opts);
    const ZeroSequence sBinf = find_eigenvalues(spec.g.problem, Which::B_inf, spec.spectrum_bound, search, opts);
    const ZeroSequence X = detail::product_sequence(spec, sB, sBinf);
    const auto [l1, l2, l3] = spec.counting_coefficients(e.b_point, e.m);
    rp.counting = check_counting_bound(X, sB, sBinf, l1, l2, l3, spec.t_lo, std::nextafter(spec.spectrum_bound, 0.0));
    rp.counting_ok = rp.counting.margin >= 0.0;

    rp.log_ratio = parallel_map(ys, [&](double y) {
        const cplx lambda(0.0, y);
        double num;
        if (spec.kind == RatioKind::f1_over_g) {
            const PairSample ps = f_function(e.a, e.b, lambda, EvalPoint::at(e.b_point), opts);
            num = std::log(std::abs(ps.F1)) + ps.log_scale;
        } else {
            // The bracket at pi cancels along the ray; the integral form does not.
            const double x_end = e.common_d() && e.b_point > e.a.d ? e.b_point : pi;
            const ScaledValue f = f_function_integral(e.a, e.b, lambda, x_end, opts);
            if (f.value == cplx{} && f.magnitude != 0.0) throw ComputationError("F underflows along the ray");
            num = f.log_abs();
        }
        double den = spec.g.log_abs(lambda, opts);
        if (!std::isfinite(den)) throw ComputationError("G vanishes at a ray sample; move the samples off its zeros");
        if (spec.kind == RatioKind::f_over_g_phi) den += detail::log_abs_phi_at(e.a, lambda, e.b_point, opts);
        return num - den;
    });

    bool all_zero = true;
    for (double v : rp.log_ratio)
        if (std::isfinite(v) || v > 0) all_zero = false;
    if (all_zero) {
        rp.identically_zero = true;
        rp.tail_decreasing = true;
        rp.pass = rp.counting_ok;
        return rp;
    }
    std::vector<double> u, v;
    for (std::size_t i = ys.size() / 2; i < ys.size(); ++i) {
        u.push_back(std::log(ys[i]));
        v.push_back(rp.log_ratio[i]);
    }
    rp.tail_slope = line_fit(u, v).slope;
    rp.tail_decreasing = detail::tail_decreasing(rp.log_ratio);
    rp.pass = rp.counting_ok && rp.tail_decreasing;
    return rp;
}

} // namespace sturmdisc
