#pragma once

#include <sturmdisc/potential.hpp>

#include <cmath>
#include <string>
#include <variant>

namespace sturmdisc {

struct Robin {
    cplx H{};
};

struct Dirichlet {};

// Condition at x = pi: y'(pi) + H y(pi) = 0, or y(pi) = 0.
using BoundaryAtPi = std::variant<Robin, Dirichlet>;

inline bool is_dirichlet(const BoundaryAtPi& b) { return std::holds_alternative<Dirichlet>(b); }

// -y'' + q y = lambda y on (0, pi), y'(0) - h y(0) = 0, boundary condition at pi,
// y(d+0) = beta y(d-0), y'(d+0) = y'(d-0)/beta + gamma y(d-0).
struct Problem {
    PotentialExpr q;
    cplx h{};
    BoundaryAtPi H = Robin{};
    double beta = 1.0;
    cplx gamma{};
    double d = pi / 2;

    double b1() const { return 0.5 * (beta + 1.0 / beta); }
    double b2() const { return 0.5 * (beta - 1.0 / beta); }

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be a finite real > 0");
        if (!(d > 0.0 && d < pi)) throw ValidationError("d must lie strictly inside (0, pi)");
        auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
        if (!finite(h)) throw ValidationError("h must be finite");
        if (!finite(gamma)) throw ValidationError("gamma must be finite");
        if (auto* r = std::get_if<Robin>(&H); r && !finite(r->H)) throw ValidationError("H must be finite");
    }
};

inline cplx eval_q(const Problem& p, double x, Side side = Side::interior) {
    if (!(x >= 0.0 && x <= pi)) throw ValidationError("eval_q: x outside [0, pi]");
    return p.q(x, side);
}

} // namespace sturmdisc
