#pragma once

#include <sturmdisc/spectrum.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace sturmdisc {

struct NormingData {
    EigenRecord eigen;
    Which which = Which::B;
    std::vector<cplx> kappas;  // kappa_{n+nu}, nu = 0..m-1
    std::vector<cplx> alphas;  // alpha_{n+nu}, nu = 0..m-1
    std::vector<double> identity_residuals;
    bool reprobed = false;     // multiplicity was corrected by a second probe
};

namespace detail {

// kappa from the phi-chain at pi; alpha = int_0^pi psi_nu psi_{m-1} dx, accumulated
// alongside the psi-chain (psi or psi_inf) integrated from pi down to 0.
inline NormingData norming_raw(const Problem& p, const EigenRecord& e, Which which, const OdeOptions& opts) {
    const int m = e.multiplicity;
    NormingData nd;
    nd.eigen = e;
    nd.which = which;

    SolutionChain phi = solve_chain(p, e.lambda, ChainKind::phi, m - 1, {}, opts);
    const ChainState& end = phi.states.back();
    for (int nu = 0; nu < m; ++nu) nd.kappas.push_back(which == Which::B ? end.y(nu) : end.dy(nu));

    Shooter sh(e.lambda, pi, 0.0, opts);
    auto [y0, dy0] = initial_data(p, which == Which::B ? ChainKind::psi : ChainKind::psi_inf, 0);
    const int tr = sh.add_track(p, m - 1, y0, dy0);
    std::vector<int> accs;
    for (int nu = 0; nu < m; ++nu) accs.push_back(sh.add_accumulator(Accumulator{tr, nu, tr, m - 1, false, false}));
    sh.run();
    const Snapshot& at0 = sh.final_snapshot();
    const double scale = std::exp(2.0 * at0.log_scale);
    // The accumulator runs from pi to 0, i.e. holds int_pi^0.
    for (int nu = 0; nu < m; ++nu) nd.alphas.push_back(-scale * sh.accumulator(at0, accs[nu]));
    return nd;
}

} // namespace detail

// Residuals |LHS - RHS| / (|LHS| + |RHS| + eps) of
//   Delta^{(m+nu)}(lambda_n) = -(m+nu)! sum_{j<=nu} kappa_{n+j} alpha_{n+nu-j}.
inline std::vector<double> identity_24_residuals(const Problem& p, const NormingData& nd, const OdeOptions& opts = {}) {
    const int m = nd.eigen.multiplicity;
    if (int(nd.kappas.size()) != m || int(nd.alphas.size()) != m)
        throw ValidationError("norming data length does not match the multiplicity");
    CharValue cv = characteristic(p, nd.which, nd.eigen.lambda, 2 * m - 1, opts);
    const double e = std::exp(cv.log_scale);
    std::vector<double> res;
    for (int nu = 0; nu < m; ++nu) {
        const cplx lhs = cv.d[m + nu] * e;
        cplx sum{};
        for (int j = 0; j <= nu; ++j) sum += nd.kappas[j] * nd.alphas[nu - j];
        const cplx rhs = -factorial(m + nu) * sum;
        res.push_back(std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + std::numeric_limits<double>::epsilon()));
    }
    return res;
}

inline double check_identity_24(const Problem& p, const NormingData& nd, const OdeOptions& opts = {}) {
    double worst = 0.0;
    for (double r : identity_24_residuals(p, nd, opts)) worst = std::max(worst, r);
    return worst;
}

struct NormingOptions {
    double identity_tolerance = 1e-6;  // above this the multiplicity is probed again
    OdeOptions ode{};
};

inline NormingData compute_norming(const Problem& p, const EigenRecord& eigen, Which which,
                                   const NormingOptions& o = {}) {
    p.validate();
    if (eigen.multiplicity < 1) throw ValidationError("multiplicity must be >= 1");
    NormingData nd = detail::norming_raw(p, eigen, which, o.ode);
    nd.identity_residuals = identity_24_residuals(p, nd, o.ode);
    double worst = 0.0;
    for (double r : nd.identity_residuals) worst = std::max(worst, r);
    if (worst <= o.identity_tolerance) return nd;

    const int probed = multiplicity_probe(p, which, eigen.lambda, 1e-3 * (1.0 + std::abs(eigen.lambda)));
    if (probed < 1) throw ComputationError("lambda is not a zero of the characteristic function");
    if (probed == eigen.multiplicity) return nd;  // residual stays on record
    EigenRecord e2 = eigen;
    e2.multiplicity = probed;
    NormingData again = detail::norming_raw(p, e2, which, o.ode);
    again.identity_residuals = identity_24_residuals(p, again, o.ode);
    again.reprobed = true;
    return again;
}

} // namespace sturmdisc
