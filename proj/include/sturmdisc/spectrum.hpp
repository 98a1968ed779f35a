#pragma once

#include <sturmdisc/charfn.hpp>
#include <sturmdisc/winding.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace sturmdisc {

struct EigenRecord {
    cplx lambda{};
    int multiplicity = 1;
    double refined_residual = 0.0;  // |f| at the root
};

enum class Origin { B, B_inf, synthetic };

inline const char* to_string(Origin o) {
    switch (o) {
    case Origin::B: return "B";
    case Origin::B_inf: return "B_inf";
    case Origin::synthetic: return "synthetic";
    }
    return "?";
}

inline constexpr const char* tie_break_rule = "equal moduli ordered by ascending principal argument";

// Zeros repeated according to multiplicity, ordered by modulus then argument.
struct ZeroSequence {
    std::vector<EigenRecord> records;
    Origin origin = Origin::synthetic;
    std::string tie_break = tie_break_rule;
    int region_count = 0;  // winding count on the full search region

    std::size_t size() const { return records.size(); }
    cplx operator[](std::size_t i) const { return records[i].lambda; }

    // One record per distinct zero.
    std::vector<EigenRecord> distinct() const {
        std::vector<EigenRecord> out;
        for (std::size_t i = 0; i < records.size(); i += std::max(1, records[i].multiplicity)) out.push_back(records[i]);
        return out;
    }

    std::vector<cplx> values() const {
        std::vector<cplx> v;
        for (const auto& r : records) v.push_back(r.lambda);
        return v;
    }
};

inline bool modulus_order(cplx a, cplx b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-12 * (1.0 + std::max(ma, mb))) return ma < mb;
    return std::arg(a) < std::arg(b);
}

// Sorts, expands each distinct zero into `multiplicity` adjacent records.
inline ZeroSequence make_sequence(std::vector<EigenRecord> distinct, Origin origin) {
    std::stable_sort(distinct.begin(), distinct.end(),
                     [](const EigenRecord& a, const EigenRecord& b) { return modulus_order(a.lambda, b.lambda); });
    ZeroSequence s;
    s.origin = origin;
    for (const auto& r : distinct)
        for (int k = 0; k < r.multiplicity; ++k) s.records.push_back(r);
    return s;
}

// Sequence from plain values (each entry one record, multiplicity counted from repeats).
inline ZeroSequence sequence_from_values(std::vector<cplx> zs, Origin origin = Origin::synthetic) {
    std::stable_sort(zs.begin(), zs.end(), modulus_order);
    ZeroSequence s;
    s.origin = origin;
    for (std::size_t i = 0; i < zs.size();) {
        std::size_t j = i;
        while (j < zs.size() && zs[j] == zs[i]) ++j;
        for (std::size_t k = i; k < j; ++k) s.records.push_back(EigenRecord{zs[i], int(j - i), 0.0});
        i = j;
    }
    return s;
}

// N_X(t) = #{n : |x_n| < t}.
inline int counting_function(const ZeroSequence& seq, double t) {
    int n = 0;
    for (const auto& r : seq.records)
        if (std::abs(r.lambda) < t) ++n;
    return n;
}

// ---------------------------------------------------------------- wrappers

inline AnalyticFn characteristic_fn(const Problem& p, Which which, const OdeOptions& opts = {}) {
    return [p, which, opts](cplx z, int k) { return characteristic(p, which, z, k, opts).d; };
}

inline int count_zeros(const Problem& p, Which which, const Rect& rect, const WindingOptions& o = {}) {
    p.validate();
    return count_zeros(characteristic_fn(p, which), rect, o);
}

inline int multiplicity_probe(const Problem& p, Which which, cplx z0, double radius, const WindingOptions& o = {}) {
    p.validate();
    return multiplicity_probe(characteristic_fn(p, which), z0, radius, o);
}

// ---------------------------------------------------------------- search

struct SearchOptions {
    double c_im = 50.0;
    int max_depth = 60;
    int newton_iterations = 60;
    WindingOptions winding{};
    // Simple roots get a final Newton pass with these tolerances.
    OdeOptions polish{1e-13, 1e-15, 5'000'000};
};

namespace detail {

struct NewtonResult {
    cplx z{};
    bool converged = false;
};

// Newton for a zero of multiplicity k: z <- z - k f/f'.
inline NewtonResult newton(const AnalyticFn& f, cplx z, int k, int iterations) {
    for (int it = 0; it < iterations; ++it) {
        const auto v = f(z, 1);
        if (v[0] == cplx{}) return {z, true};
        if (v[1] == cplx{}) return {z, false};
        const cplx step = double(k) * v[0] / v[1];
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return {z, false};
        z -= step;
        const double tol = (k == 1 ? 1e-14 : 1e-9) * (1.0 + std::abs(z));
        if (std::abs(step) <= tol) {
            if (k == 1) {
                // one more step to settle the last bits
                const auto w = f(z, 1);
                if (w[1] != cplx{} && w[0] != cplx{}) {
                    const cplx s2 = w[0] / w[1];
                    if (std::abs(s2) < 10 * tol) z -= s2;
                }
            }
            return {z, true};
        }
    }
    return {z, false};
}

class ZeroFinder {
public:
    ZeroFinder(const AnalyticFn& f, const SearchOptions& o) : f_(f), o_(o) {}

    int count(const Rect& r) const { return winding_count(f_, r, default_spacing, o_.winding); }

    void search(const Rect& r, int n, int depth) {
        if (n == 0) return;
        if (n < 0) throw ComputationError("negative winding count (phase-step failure)");
        if (depth > o_.max_depth) throw ComputationError("subdivision depth exhausted");

        const double diam = std::hypot(r.width(), r.height());
        const cplx c = r.center();
        if (n == 1 || diam < 1e-6 * (1.0 + std::abs(c))) {
            NewtonResult nr = newton(f_, c, n, o_.newton_iterations);
            if (nr.converged && r.contains(nr.z, 1e-12 * (1.0 + std::abs(nr.z)))) {
                found_.push_back(EigenRecord{nr.z, n, 0.0});
                return;
            }
            if (diam < 1e-11 * (1.0 + std::abs(c))) throw ComputationError("refinement did not converge");
        }

        // Split the longer side slightly off-centre (symmetric spectra put zeros on midlines).
        static constexpr double fractions[] = {0.5123, 0.4671, 0.5389, 0.4412};
        for (double frac : fractions) {
            Rect a = r, b = r;
            if (r.width() >= r.height()) {
                const double m = r.re_min + frac * r.width();
                a.re_max = m;
                b.re_min = m;
            } else {
                const double m = r.im_min + frac * r.height();
                a.im_max = m;
                b.im_min = m;
            }
            int na, nb;
            try {
                na = count(a);
                nb = count(b);
            } catch (const BoundaryZero&) {
                continue;
            }
            if (na + nb != n) throw ComputationError("zero counts are not additive across a split");
            search(a, na, depth + 1);
            search(b, nb, depth + 1);
            return;
        }
        throw ComputationError("could not place a split line clear of zeros");
    }

    std::vector<EigenRecord>& found() { return found_; }

private:
    const AnalyticFn& f_;
    SearchOptions o_;
    std::vector<EigenRecord> found_;
};

} // namespace detail

// All zeros of f inside region (counted with multiplicity), refined and probed.
// The region is nudged outward when a zero sits on its boundary.
inline ZeroSequence find_zeros(const AnalyticFn& f, Rect region, Origin origin, const SearchOptions& o = {}) {
    detail::ZeroFinder finder(f, o);
    int total = 0;
    for (int nudge = 0;; ++nudge) {
        try {
            total = finder.count(region);
            break;
        } catch (const BoundaryZero&) {
            if (nudge >= o.winding.max_nudges) throw;
            const double e = 1e-3 * (nudge + 1);
            region.re_min -= e;
            region.re_max += 0.7 * e;
            region.im_min -= 0.9 * e;
            region.im_max += 1.1 * e;
        }
    }
    finder.search(region, total, 0);
    auto& found = finder.found();

    // Merge near-duplicates, then re-probe multiplicities.
    std::sort(found.begin(), found.end(),
              [](const EigenRecord& a, const EigenRecord& b) { return modulus_order(a.lambda, b.lambda); });
    std::vector<EigenRecord> merged;
    for (const auto& r : found) {
        bool joined = false;
        for (auto& m : merged)
            if (std::abs(m.lambda - r.lambda) < 1e-8 * (1.0 + std::abs(r.lambda))) {
                m.multiplicity += r.multiplicity;
                joined = true;
            }
        if (!joined) merged.push_back(r);
    }
    for (auto& m : merged) {
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& o2 : merged)
            if (&o2 != &m) gap = std::min(gap, std::abs(o2.lambda - m.lambda));
        const double radius = std::min(1e-3 * (1.0 + std::abs(m.lambda)), 0.4 * gap);
        const int probed = multiplicity_probe(f, m.lambda, radius, o.winding);
        if (probed != m.multiplicity)
            throw ComputationError("multiplicity probe disagrees with the subdivision count at " +
                                   expr::format_constant(m.lambda));
        m.refined_residual = std::abs(f(m.lambda, 0)[0]);
    }
    int sum = 0;
    for (const auto& m : merged) sum += m.multiplicity;
    if (sum != total) throw ComputationError("completeness check failed: multiplicities do not add up to the region count");
    ZeroSequence seq = make_sequence(std::move(merged), origin);
    seq.region_count = total;
    return seq;
}

// Eigenvalues of B or B_inf with |lambda| < modulus_bound and |Im lambda| <= c_im.
inline ZeroSequence find_eigenvalues(const Problem& p, Which which, double modulus_bound, const SearchOptions& o = {},
                                     const OdeOptions& ode = {}) {
    p.validate();
    if (!(modulus_bound > 0.0)) throw ValidationError("modulus_bound must be > 0");
    // The box reaches a little past the bound; records outside are dropped afterwards.
    const double R = modulus_bound * (1.0 + 1e-3) + 0.0137;
    const Rect region{-R, R, -o.c_im, o.c_im};
    AnalyticFn fn = characteristic_fn(p, which, ode);
    ZeroSequence all = find_zeros(fn, region, which == Which::B ? Origin::B : Origin::B_inf, o);
    AnalyticFn tight = characteristic_fn(p, which, o.polish);
    for (auto& r : all.records) {
        if (r.multiplicity != 1) continue;
        detail::NewtonResult nr = detail::newton(tight, r.lambda, 1, 4);
        if (nr.converged && std::abs(nr.z - r.lambda) < 1e-6 * (1.0 + std::abs(r.lambda))) r.lambda = nr.z;
    }
    // Residuals in true units.
    for (auto& r : all.records) {
        CharValue cv = characteristic(p, which, r.lambda, 0, ode);
        r.refined_residual = std::abs(cv.d[0]) * std::exp(std::min(cv.log_scale, 700.0));
    }
    ZeroSequence out;
    out.origin = all.origin;
    out.region_count = all.region_count;
    for (const auto& r : all.records)
        if (std::abs(r.lambda) < modulus_bound) out.records.push_back(r);
    return out;
}

} // namespace sturmdisc
