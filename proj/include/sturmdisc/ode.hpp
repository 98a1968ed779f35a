#pragma once

// Shooting engine for -y'' + q y = lambda y and its lambda-derivative chain
//   -y_nu'' + q y_nu = lambda y_nu + y_{nu-1}
// across the transmission point d.
//
// All solutions are carried in exponent-factored form: with s = |Im sqrt(lambda)|,
// t = |x - x_start| and w = max(1, |sqrt(lambda)|) the state holds
//   u = e^{-s t} y,   v = e^{-s t} y' / w.
// This is an exact change of variables. It keeps u, v bounded along the
// imaginary ray (where y itself grows like e^{s x} and overflows near
// |lambda| ~ 1e5) and puts y and y' on a common scale for error control.

#include <sturmdisc/problem.hpp>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

namespace sturmdisc {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    std::size_t max_steps = 5'000'000;
};

inline cplx principal_sqrt(cplx z) { return std::sqrt(z); }

inline double growth_rate(cplx lambda) { return std::abs(std::sqrt(lambda).imag()); }

inline double frequency_scale(cplx lambda) { return std::max(1.0, std::abs(std::sqrt(lambda))); }

inline void check_finite(cplx lambda) {
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
        throw ValidationError("lambda must be finite");
}

// ---------------------------------------------------------------- integrator

// Adaptive Runge-Kutta-Fehlberg 7(8) on a complex state. Only the first
// `controlled` complex components take part in step-size control; the rest are
// quadrature components riding on the same steps.
class ComplexIntegrator {
public:
    using state_t = std::vector<double>;

    explicit ComplexIntegrator(OdeOptions opts) : opts_(opts) {}

    // rhs(t, const cplx* y, cplx* dy)
    template <class Rhs>
    void integrate(Rhs&& rhs, std::vector<cplx>& y, double t0, double t1, std::size_t controlled,
                   double h_hint) {
        if (t1 == t0) return;
        const std::size_t n = y.size();
        state_t x(2 * n), out(2 * n), err(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            x[2 * i] = y[i].real();
            x[2 * i + 1] = y[i].imag();
        }
        auto sys = [&rhs](const state_t& s, state_t& ds, double t) {
            rhs(t, reinterpret_cast<const cplx*>(s.data()), reinterpret_cast<cplx*>(ds.data()));
        };
        const double len = t1 - t0;
        double t = t0;
        if (h_prop_ <= 0.0) h_prop_ = h_hint;
        double worst = 0.0;
        while (t < t1) {
            if (++steps_ > opts_.max_steps)
                throw IntegrationError("integrator exceeded the step budget", worst);
            double h = h_prop_;
            bool last = false;
            if (t + h >= t1 || t1 - (t + h) < 1e-12 * len) {
                h = t1 - t;
                last = true;
            }
            stepper_.do_step(sys, x, t, out, h, err);
            double e = 0.0;
            for (std::size_t i = 0; i < controlled; ++i) {
                double ea = std::hypot(err[2 * i], err[2 * i + 1]);
                double ya = std::max(std::hypot(x[2 * i], x[2 * i + 1]), std::hypot(out[2 * i], out[2 * i + 1]));
                e = std::max(e, ea / (opts_.atol + opts_.rtol * ya));
            }
            if (!std::isfinite(e)) e = 1e10;
            if (e <= 1.0) {
                t = last ? t1 : t + h;
                x.swap(out);
                const double grown = h * std::clamp(e > 0 ? 0.9 * std::pow(e, -1.0 / 8.0) : 5.0, 0.2, 5.0);
                h_prop_ = (last && h < h_prop_) ? std::max(h_prop_, grown) : grown;
            } else {
                worst = std::max(worst, e);
                h_prop_ = h * std::clamp(0.9 * std::pow(e, -1.0 / 8.0), 0.1, 0.9);
                if (h_prop_ < 1e-14 * len) throw IntegrationError("step size underflow", e);
            }
        }
        for (std::size_t i = 0; i < n; ++i) y[i] = cplx{x[2 * i], x[2 * i + 1]};
    }

    std::size_t steps() const { return steps_; }

private:
    OdeOptions opts_;
    boost::numeric::odeint::runge_kutta_fehlberg78<state_t> stepper_;
    double h_prop_ = 0.0;
    std::size_t steps_ = 0;
};

// ---------------------------------------------------------------- shooter

struct Accumulator {
    // d/dx acc = w(x) * y_{track_a, nu_a} * y_{track_b, nu_b},
    // w = 1 or w = q_b(x) - q_a(x).
    int track_a = 0;
    int nu_a = 0;
    int track_b = 0;
    int nu_b = 0;
    bool q_difference = false;
    bool absolute = false;  // integrate |integrand| instead (error scale estimates)
};

struct Snapshot {
    double x = 0.0;
    Side side = Side::interior;  // left/right only at a jump point
    double log_scale = 0.0;      // true value = e^{log_scale} * stored (accumulators: e^{2 log_scale})
    std::vector<cplx> state;
};

// Integrates a set of solution chains of (possibly different) problems at a
// common lambda from x_start to x_end, applying each problem's jump at its own d.
class Shooter {
public:
    Shooter(cplx lambda, double x_start, double x_end, OdeOptions opts = {})
        : lambda_(lambda), x0_(x_start), x1_(x_end), opts_(opts) {
        check_finite(lambda);
        if (!(x_start >= 0.0 && x_start <= pi && x_end >= 0.0 && x_end <= pi) || x_start == x_end)
            throw ValidationError("integration interval must be a non-empty subinterval of [0, pi]");
        s_ = growth_rate(lambda);
        w_ = frequency_scale(lambda);
        dir_ = x_end > x_start ? 1.0 : -1.0;
    }

    // Chain of length nu_max+1 with (y_0, y_0') = (y0, dy0) at x_start and zero data for nu >= 1.
    int add_track(const Problem& p, int nu_max, cplx y0, cplx dy0) {
        p.validate();
        tracks_.push_back(Track{&p, nu_max, offset_, y0, dy0});
        offset_ += 2 * (nu_max + 1);
        return int(tracks_.size()) - 1;
    }

    int add_accumulator(const Accumulator& a) {
        accs_.push_back(a);
        return int(accs_.size()) - 1;
    }

    void record_at(const std::vector<double>& xs) { record_.insert(record_.end(), xs.begin(), xs.end()); }

    double omega() const { return w_; }
    double s() const { return s_; }

    void run() {
        const std::size_t n = offset_ + accs_.size();
        std::vector<cplx> y(n, cplx{});
        for (const auto& tr : tracks_) {
            y[tr.offset] = tr.y0;
            y[tr.offset + 1] = tr.dy0 / w_;
        }

        // Stop points in integration order: jumps, piece boundaries, requested points.
        std::vector<double> stops{x0_, x1_};
        for (const auto& tr : tracks_) {
            stops.push_back(tr.p->d);
            for (double b : tr.p->q.breakpoints()) stops.push_back(b);
        }
        for (double r : record_) stops.push_back(r);
        const double lo = std::min(x0_, x1_), hi = std::max(x0_, x1_);
        std::erase_if(stops, [&](double v) { return v < lo || v > hi; });
        std::sort(stops.begin(), stops.end());
        stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
        if (dir_ < 0) std::reverse(stops.begin(), stops.end());

        ComplexIntegrator integ(opts_);
        const double h_hint = std::min(0.05, 0.5 / (w_ + s_));
        snapshots_.clear();
        for (std::size_t k = 0; k < stops.size(); ++k) {
            const double x = stops[k];
            if (k > 0) {
                const double xa = stops[k - 1];
                const double seg_lo = std::min(xa, x), seg_hi = std::max(xa, x);
                auto rhs = [&](double t, const cplx* u, cplx* du) { eval_rhs(t, u, du, seg_lo, seg_hi); };
                integ.integrate(rhs, y, std::abs(xa - x0_), std::abs(x - x0_), offset_, h_hint);
            }
            bool jump_here = false;
            for (const auto& tr : tracks_)
                if (tr.p->d == x && x != x0_ && x != x1_) jump_here = true;
            if (jump_here) {
                // Entering side first, then the side after the jump.
                snapshots_.push_back(snap(x, dir_ > 0 ? Side::left : Side::right, y));
                for (const auto& tr : tracks_)
                    if (tr.p->d == x) apply_jump(tr, y);
                snapshots_.push_back(snap(x, dir_ > 0 ? Side::right : Side::left, y));
            } else {
                snapshots_.push_back(snap(x, Side::interior, y));
            }
        }
        steps_ = integ.steps();
    }

    const std::vector<Snapshot>& snapshots() const { return snapshots_; }
    const Snapshot& final_snapshot() const { return snapshots_.back(); }

    // First snapshot at x (for a jump point, the requested side).
    const Snapshot& at(double x, Side side = Side::interior) const {
        for (const auto& sn : snapshots_)
            if (sn.x == x && (sn.side == side || sn.side == Side::interior || side == Side::interior)) return sn;
        throw ValidationError("no snapshot recorded at the requested point");
    }

    // Scaled (u, v*w) = e^{-log_scale} (y, y') for a track component.
    std::pair<cplx, cplx> scaled(const Snapshot& sn, int track, int nu) const {
        const auto& tr = tracks_[track];
        std::size_t o = tr.offset + 2 * nu;
        return {sn.state[o], sn.state[o + 1] * w_};
    }

    cplx accumulator(const Snapshot& sn, int k) const { return sn.state[offset_ + k]; }

    std::size_t steps() const { return steps_; }

private:
    struct Track {
        const Problem* p;
        int nu_max;
        std::size_t offset;
        cplx y0, dy0;
    };

    Snapshot snap(double x, Side side, const std::vector<cplx>& y) const {
        return Snapshot{x, side, s_ * std::abs(x - x0_), y};
    }

    void apply_jump(const Track& tr, std::vector<cplx>& y) const {
        const double beta = tr.p->beta;
        const cplx g = tr.p->gamma;
        for (int nu = 0; nu <= tr.nu_max; ++nu) {
            cplx& u = y[tr.offset + 2 * nu];
            cplx& v = y[tr.offset + 2 * nu + 1];
            if (dir_ > 0) {
                cplx um = u;
                u = beta * um;
                v = v / beta + g * um / w_;
            } else {
                cplx up = u;
                u = up / beta;
                v = beta * v - g * up / w_;
            }
        }
    }

    void eval_rhs(double t, const cplx* u, cplx* du, double seg_lo, double seg_hi) const {
        const double x = x0_ + dir_ * t;
        const Side side = x <= seg_lo ? Side::right : (x >= seg_hi ? Side::left : Side::interior);
        const double xc = std::clamp(x, seg_lo, seg_hi);
        for (const auto& tr : tracks_) {
            const cplx qm = tr.p->q(xc, side) - lambda_;
            for (int nu = 0; nu <= tr.nu_max; ++nu) {
                const std::size_t o = tr.offset + 2 * nu;
                const cplx y = u[o], v = u[o + 1];
                du[o] = dir_ * w_ * v - s_ * y;
                cplx src = qm * y;
                if (nu > 0) src -= u[o - 2];
                du[o + 1] = dir_ * src / w_ - s_ * v;
            }
        }
        for (std::size_t k = 0; k < accs_.size(); ++k) {
            const auto& a = accs_[k];
            const auto& ta = tracks_[a.track_a];
            const auto& tb = tracks_[a.track_b];
            cplx prod = u[ta.offset + 2 * a.nu_a] * u[tb.offset + 2 * a.nu_b];
            if (a.q_difference) prod *= tb.p->q(xc, side) - ta.p->q(xc, side);
            if (a.absolute) prod = std::abs(prod);
            du[offset_ + k] = dir_ * prod - 2.0 * s_ * u[offset_ + k];
        }
    }

    cplx lambda_;
    double x0_, x1_;
    OdeOptions opts_;
    double s_ = 0.0, w_ = 1.0, dir_ = 1.0;
    std::vector<Track> tracks_;
    std::vector<Accumulator> accs_;
    std::size_t offset_ = 0;
    std::vector<double> record_;
    std::vector<Snapshot> snapshots_;
    std::size_t steps_ = 0;
};

// ---------------------------------------------------------------- chains

enum class ChainKind { phi, psi, psi_inf, fundamental };

struct ChainState {
    double x = 0.0;
    Side side = Side::interior;
    double log_scale = 0.0;
    std::vector<std::pair<cplx, cplx>> values;  // scaled (y_nu, y_nu'); true = e^{log_scale} * scaled

    cplx y(int nu = 0) const { return std::exp(log_scale) * values[nu].first; }
    cplx dy(int nu = 0) const { return std::exp(log_scale) * values[nu].second; }
};

struct SolutionChain {
    cplx lambda{};
    ChainKind kind = ChainKind::phi;
    int fundamental_index = 0;  // 1 or 2 for ChainKind::fundamental
    double r = 0.0;             // start point for ChainKind::fundamental
    std::vector<ChainState> states;  // ascending x; d appears twice (left, right) when crossed

    const ChainState& at(double x, Side side = Side::interior) const {
        for (const auto& st : states)
            if (st.x == x && (st.side == side || st.side == Side::interior || side == Side::interior)) return st;
        throw ValidationError("requested x is not on the chain grid");
    }
};

namespace detail {

inline std::pair<cplx, cplx> initial_data(const Problem& p, ChainKind kind, int index) {
    switch (kind) {
    case ChainKind::phi: return {1.0, p.h};
    case ChainKind::psi:
        if (auto* r = std::get_if<Robin>(&p.H)) return {1.0, -r->H};
        return {0.0, 1.0};
    case ChainKind::psi_inf: return {0.0, 1.0};
    case ChainKind::fundamental: return index == 1 ? std::pair<cplx, cplx>{1.0, 0.0} : std::pair<cplx, cplx>{0.0, 1.0};
    }
    return {1.0, 0.0};
}

inline SolutionChain collect(const Shooter& sh, int track, int nu_max, cplx lambda, ChainKind kind) {
    SolutionChain ch;
    ch.lambda = lambda;
    ch.kind = kind;
    for (const auto& sn : sh.snapshots()) {
        ChainState st;
        st.x = sn.x;
        st.side = sn.side;
        st.log_scale = sn.log_scale;
        for (int nu = 0; nu <= nu_max; ++nu) st.values.push_back(sh.scaled(sn, track, nu));
        ch.states.push_back(std::move(st));
    }
    std::stable_sort(ch.states.begin(), ch.states.end(), [](const ChainState& a, const ChainState& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.side == Side::left && b.side != Side::left;
    });
    return ch;
}

} // namespace detail

// phi starts at 0, psi and psi_inf at pi. The grid always contains both
// endpoints and, when crossed, both sides of d.
inline SolutionChain solve_chain(const Problem& p, cplx lambda, ChainKind kind, int nu_max,
                                 const std::vector<double>& grid = {}, const OdeOptions& opts = {}) {
    if (nu_max < 0) throw ValidationError("nu_max must be >= 0");
    if (kind == ChainKind::fundamental) throw ValidationError("use solve_fundamental for fundamental chains");
    for (double x : grid)
        if (!(x >= 0.0 && x <= pi)) throw ValidationError("grid point outside [0, pi]");
    const bool forward = kind == ChainKind::phi;
    Shooter sh(lambda, forward ? 0.0 : pi, forward ? pi : 0.0, opts);
    auto [y0, dy0] = detail::initial_data(p, kind, 0);
    int tr = sh.add_track(p, nu_max, y0, dy0);
    sh.record_at(grid);
    sh.run();
    return detail::collect(sh, tr, nu_max, lambda, kind);
}

// y_{i,r}: y_{1,r}(r) = 1, y_{1,r}'(r) = 0; y_{2,r}(r) = 0, y_{2,r}'(r) = 1.
inline SolutionChain solve_fundamental(const Problem& p, cplx lambda, int index, double r, double x_end,
                                       int nu_max = 0, const std::vector<double>& grid = {},
                                       const OdeOptions& opts = {}) {
    if (index != 1 && index != 2) throw ValidationError("fundamental index must be 1 or 2");
    if (!(r >= 0.0 && r < x_end && x_end <= pi)) throw ValidationError("need 0 <= r < x0 <= pi");
    Shooter sh(lambda, r, x_end, opts);
    auto [y0, dy0] = detail::initial_data(p, ChainKind::fundamental, index);
    int tr = sh.add_track(p, nu_max, y0, dy0);
    std::vector<double> g;
    for (double x : grid)
        if (x >= r && x <= x_end) g.push_back(x);
    sh.record_at(g);
    sh.run();
    SolutionChain ch = detail::collect(sh, tr, nu_max, lambda, ChainKind::fundamental);
    ch.fundamental_index = index;
    ch.r = r;
    return ch;
}

struct FundamentalPair {
    ChainState y1, y2;  // at x0
};

inline FundamentalPair fundamental_pair(const Problem& p, double r, double x0, cplx lambda,
                                        const OdeOptions& opts = {}) {
    if (!(r >= 0.0 && r < x0 && x0 <= pi)) throw ValidationError("need 0 <= r < x0 <= pi");
    Shooter sh(lambda, r, x0, opts);
    int t1 = sh.add_track(p, 0, 1.0, 0.0);
    int t2 = sh.add_track(p, 0, 0.0, 1.0);
    sh.run();
    const Snapshot& sn = sh.final_snapshot();
    FundamentalPair fp;
    fp.y1 = ChainState{x0, Side::interior, sn.log_scale, {sh.scaled(sn, t1, 0)}};
    fp.y2 = ChainState{x0, Side::interior, sn.log_scale, {sh.scaled(sn, t2, 0)}};
    return fp;
}

// <y, z> = y z' - y' z, on true values.
inline cplx bracket(const ChainState& a, const ChainState& b, int nu_a = 0, int nu_b = 0) {
    const auto& [ya, da] = a.values[nu_a];
    const auto& [yb, db] = b.values[nu_b];
    return std::exp(a.log_scale + b.log_scale) * (ya * db - da * yb);
}

// Largest |<y, z>(x) - <y, z>(x_first)| over the shared grid.
inline double wronskian_check(const SolutionChain& a, const SolutionChain& b, int nu_a = 0, int nu_b = 0) {
    if (a.states.size() != b.states.size()) throw ValidationError("wronskian_check: mismatched grids");
    for (std::size_t i = 0; i < a.states.size(); ++i)
        if (a.states[i].x != b.states[i].x || a.states[i].side != b.states[i].side)
            throw ValidationError("wronskian_check: mismatched grids");
    if (a.states.empty()) return 0.0;
    const cplx w0 = bracket(a.states.front(), b.states.front(), nu_a, nu_b);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        dev = std::max(dev, std::abs(bracket(a.states[i], b.states[i], nu_a, nu_b) - w0));
    return dev;
}

// <y, z>(x_end) for y solving problem a and z solving problem b, both started
// at x_start. Besides the direct endpoint bracket, the value is also assembled
// from  d/dx <y, z> = (q_b - q_a) y z  plus the bracket jumps at the
// transmission points; that integral form stays accurate when the bracket is
// far smaller than the products it is made of.
struct CrossBracket {
    cplx direct;          // all three scaled: true = e^{log_scale} * value
    cplx integral_form;
    double magnitude = 0; // sum of |contributions| entering integral_form
    double log_scale = 0; // 2 |Im sqrt(lambda)| |x_end - x_start|
    ChainState y, z;      // endpoint states
};

inline CrossBracket cross_bracket(const Problem& a, std::pair<cplx, cplx> init_a, const Problem& b,
                                  std::pair<cplx, cplx> init_b, cplx lambda, double x_start, double x_end,
                                  const OdeOptions& opts = {}) {
    Shooter sh(lambda, x_start, x_end, opts);
    const int ta = sh.add_track(a, 0, init_a.first, init_a.second);
    const int tb = sh.add_track(b, 0, init_b.first, init_b.second);
    const int acc = sh.add_accumulator(Accumulator{ta, 0, tb, 0, true, false});
    const int mag = sh.add_accumulator(Accumulator{ta, 0, tb, 0, true, true});
    sh.run();
    const Snapshot& end = sh.final_snapshot();
    const double s = sh.s();
    auto scaled_bracket = [&](const Snapshot& sn) {
        auto [y, dy] = sh.scaled(sn, ta, 0);
        auto [z, dz] = sh.scaled(sn, tb, 0);
        return y * dz - dy * z;
    };
    CrossBracket out;
    out.log_scale = 2.0 * end.log_scale;
    out.direct = scaled_bracket(end);
    const cplx w0 = init_a.first * init_b.second - init_a.second * init_b.first;
    const double decay_all = std::exp(-out.log_scale);
    out.integral_form = w0 * decay_all + sh.accumulator(end, acc);
    out.magnitude = std::abs(w0) * decay_all + std::abs(sh.accumulator(end, mag).real());
    const auto& snaps = sh.snapshots();
    for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
        if (snaps[i].x != snaps[i + 1].x || snaps[i].side == Side::interior) continue;
        const cplx jump = scaled_bracket(snaps[i + 1]) - scaled_bracket(snaps[i]);
        const double w = std::exp(-2.0 * s * std::abs(x_end - snaps[i].x));
        out.integral_form += jump * w;
        out.magnitude += std::abs(jump) * w;
    }
    out.y = ChainState{end.x, Side::interior, end.log_scale, {sh.scaled(end, ta, 0)}};
    out.z = ChainState{end.x, Side::interior, end.log_scale, {sh.scaled(end, tb, 0)}};
    return out;
}

} // namespace sturmdisc
