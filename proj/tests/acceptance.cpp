// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sturmdisc/sturmdisc.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace sturmdisc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome classical_spectra() {
    Problem neumann, dirichlet;
    dirichlet.H = Dirichlet{};
    const ZeroSequence sb = find_eigenvalues(neumann, Which::B, 375.0);
    const ZeroSequence sd = find_eigenvalues(dirichlet, Which::B, 395.0);
    if (sb.size() < 20 || sd.size() < 20) return {false, "found " + std::to_string(sb.size()) + " and " + std::to_string(sd.size())};
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        worst = std::max(worst, std::abs(sb[n] - double(n * n)));
        worst = std::max(worst, std::abs(sd[n] - (n + 0.5) * (n + 0.5)));
    }
    return {worst < 1e-8, "max error " + num(worst)};
}

// ---------------------------------------------------------------- 2

// roots in k > 0 of -b1 sin(k pi) + b2 sin(k (2d - pi)) by scan and bisection
std::vector<double> jump_roots(double beta, double d, int count) {
    const double b1 = (beta + 1 / beta) / 2, b2 = (beta - 1 / beta) / 2;
    auto f = [&](double k) { return -b1 * std::sin(k * pi) + b2 * std::sin(k * (2 * d - pi)); };
    std::vector<double> roots;
    const double step = 1e-3;
    for (double a = step; int(roots.size()) < count; a += step) {
        double lo = a, hi = a + step;
        if (f(lo) == 0.0) {
            roots.push_back(lo);
            continue;
        }
        if ((f(lo) < 0) == (f(hi) < 0)) continue;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            ((f(lo) < 0) == (f(mid) < 0) ? lo : hi) = mid;
        }
        roots.push_back(0.5 * (lo + hi));
    }
    return roots;
}

Outcome discontinuous_closed_form() {
    Problem p;
    p.beta = 2.0;
    p.d = pi / 3;
    const std::vector<double> k = jump_roots(p.beta, p.d, 15);
    const ZeroSequence s = find_eigenvalues(p, Which::B, k.back() * k.back() + 5.0);
    // lambda = 0 carries the constant eigenfunction and is not a root in k > 0
    if (s.size() < 16 || std::abs(s[0]) > 1e-8) return {false, "found " + std::to_string(s.size()) + " eigenvalues"};
    double worst = 0.0;
    for (int n = 0; n < 15; ++n) worst = std::max(worst, std::abs(s[n + 1] - k[n] * k[n]));
    return {worst < 1e-8, "max error " + num(worst) + " over 15 roots"};
}

// ---------------------------------------------------------------- 3

Outcome invariants() {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> qs{"0", "cos(x)", "x^2 - 1", "exp(-x) + 0.5i*sin(3*x)", "(1+2i)*x", "1/(1+x)"};
    std::vector<double> grid;
    for (int i = 1; i < 32; ++i) grid.push_back(pi * i / 32);
    double jump = 0.0, wr = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        Problem p;
        p.q = PotentialExpr(qs[draw % qs.size()]);
        p.beta = 0.5 + 2.0 * u(rng);
        p.gamma = cplx(u(rng) - 0.5, u(rng) - 0.5);
        p.d = 0.3 + 2.5 * u(rng);
        p.h = u(rng) - 0.5;
        // moderate |Im sqrt(lambda)|: the bracket cancels terms of size e^{2 |Im sqrt(lambda)| pi}
        const cplx k(0.5 + 7.5 * u(rng), 1.5 * u(rng) - 0.75);
        const cplx lambda = k * k;

        for (ChainKind kind : {ChainKind::phi, ChainKind::psi}) {
            const SolutionChain c = solve_chain(p, lambda, kind, 0);
            const ChainState& l = c.at(p.d, Side::left);
            const ChainState& r = c.at(p.d, Side::right);
            jump = std::max(jump, rel(r.y(), p.beta * l.y()));
            jump = std::max(jump, rel(r.dy(), l.dy() / p.beta + p.gamma * l.y()));
        }
        const SolutionChain y1 = solve_fundamental(p, lambda, 1, 0.0, pi, 0, grid);
        const SolutionChain y2 = solve_fundamental(p, lambda, 2, 0.0, pi, 0, grid);
        for (std::size_t i = 0; i < y1.states.size(); ++i) wr = std::max(wr, std::abs(bracket(y1.states[i], y2.states[i]) - 1.0));
    }
    return {jump < 1e-12 && wr < 1e-9, "jump " + num(jump) + ", Wronskian " + num(wr)};
}

// ---------------------------------------------------------------- 4

Outcome identity() {
    Problem z;
    double analytic = 0.0;
    for (int n = 0; n <= 10; ++n) {
        const NormingData nd = compute_norming(z, EigenRecord{double(n * n), 1, 0.0}, Which::B);
        analytic = std::max(analytic, check_identity_24(z, nd));
        const cplx d1 = char_delta(z, double(n * n), 1).derivatives[1];
        const cplx expect = n == 0 ? cplx(-pi) : cplx(-(pi / 2) * (n % 2 ? -1.0 : 1.0));
        analytic = std::max(analytic, std::abs(d1 - expect));
        analytic = std::max(analytic, std::abs(d1 + nd.kappas[0] * nd.alphas[0]));
    }

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::ostringstream q;
    q.precision(6);
    q << u(rng) << "*cos(x) + (" << u(rng) << "i)*sin(2*x) + " << u(rng) << "*x + (" << u(rng) << "i)*exp(-x)";
    Problem p;
    p.q = PotentialExpr(q.str());
    p.beta = 1.5;
    p.gamma = cplx(0.0, 0.2);
    p.d = 1.0;
    const ZeroSequence s = find_eigenvalues(p, Which::B, 120.0);
    if (s.size() < 8) return {false, "only " + std::to_string(s.size()) + " eigenvalues"};
    double worst = 0.0;
    for (std::size_t n = 0; n < 8; ++n) worst = std::max(worst, check_identity_24(p, compute_norming(p, s.records[n], Which::B)));
    return {analytic < 1e-9 && worst < 1e-6, "q = 0 " + num(analytic) + ", q = " + q.str() + ": " + num(worst)};
}

// ---------------------------------------------------------------- 5

Outcome ray_asymptotics() {
    Problem p;
    const std::vector<double> y = geometric_grid(1e2, 1e6, 4);
    const GrowthFit d = growth_fit(y, ray_log_abs(p, Which::B, y));
    const GrowthFit di = growth_fit(y, ray_log_abs(p, Which::B_inf, y));
    const bool ok = std::abs(d.c - pi) < 0.02 * pi && std::abs(d.p - 0.5) < 0.05 && std::abs(di.c - pi) < 0.02 * pi &&
                    std::abs(di.p) < 0.05;
    return {ok, "Delta c " + num(d.c) + " p " + num(d.p) + ", Delta_inf c " + num(di.c) + " p " + num(di.p)};
}

// ---------------------------------------------------------------- 6

Outcome hadamard() {
    Problem p;
    p.q = PotentialExpr("1");
    const ZeroSequence s = find_eigenvalues(p, Which::B, 200.0);
    const ConstantFit f = fit_constant(p, Which::B, s);
    const double cerr = std::abs(f.constant - std::sinh(pi)) / std::sinh(pi);

    std::vector<cplx> analytic;
    for (int n = 0; n < 500; ++n) analytic.push_back(double(n) * n + 1.0);
    const ProductModel m{sequence_from_values(analytic), f.constant, 500, std::nullopt};
    double worst = 0.0;
    for (double r : {0.5, 1.5, 3.0, 4.2, 5.0})
        for (int a = 0; a < 16; ++a) {
            const cplx lambda = std::polar(r, 2 * pi * a / 16);
            if (std::abs(lambda - 1.0) < 0.25 || std::abs(lambda - 2.0) < 0.25 || std::abs(lambda - 5.0) < 0.25) continue;
            const CharSample c = char_delta(p, lambda);
            const cplx delta = c.delta * std::exp(c.log_scale);
            worst = std::max(worst, std::abs(true_value(truncated_product(m, lambda).full) - delta) / std::abs(delta));
        }
    return {cerr < 1e-3 && worst < 0.02, "constant " + num(f.constant.real()) + " (rel " + num(cerr) + "), product " + num(worst)};
}

// ---------------------------------------------------------------- 7

Outcome expansion_recursion() {
    const PotentialExpr one("1");
    std::vector<double> grid;
    for (int i = 0; i <= 16; ++i) grid.push_back(pi * i / 16);
    const ExpansionTable t = build_expansion(one, 1, grid);
    bool exact = true;
    for (double x : grid) exact = exact && t.F(1, 1)(x) == cplx(-x) && t.F(1, 2)(x) == cplx(2.0);

    const double x = 1.0;
    const cplx lambda = 4.0, k = 2.0;
    const cplx closed = std::sin(k * x) / (2.0 * k * k * k) - x * std::cos(k * x) / (2.0 * lambda);
    const cplx quad = detail::integrate_complex([&](double s) { return std::sin(k * (x - s)) / k * std::sin(k * s) / k; }, 0.0, x);
    const double qerr = std::abs(closed - quad);

    Problem p;
    p.q = one;
    const cplx y2 = fundamental_pair(p, 0.0, x, lambda).y2.y();
    const SSeries s = s_series(one, x, lambda, 6);
    double shrink = std::numeric_limits<double>::infinity();
    for (int P = 0; P < 4; ++P) shrink = std::min(shrink, std::abs(s.S[P] - y2) / std::abs(s.S[P + 1] - y2));
    return {exact && qerr < 1e-8 && shrink >= 5.0,
            std::string(exact ? "table exact" : "table inexact") + ", quadrature " + num(qerr) + ", min shrink " + num(shrink)};
}

// ---------------------------------------------------------------- 8

Outcome decay_orders() {
    const Problem a;
    std::string detail;
    bool ok = true;
    for (int m : {0, 1, 2}) {
        Problem b;
        b.q = PotentialExpr(std::vector<Piece>{Piece{0.0, 1.0, "(x-1)^" + std::to_string(m + 1), nullptr}, Piece{1.0, pi, "0", nullptr}});
        const DecayFit f = decay_order_fit(a, b, 0.0, 1.0, m, Combination::w1114);
        ok = ok && f.slope <= -(m + 2.7);
        detail += "m=" + std::to_string(m) + " " + num(f.slope) + ", ";
    }
    Problem step;
    step.q = PotentialExpr(std::vector<Piece>{Piece{0.0, 0.5, "1", nullptr}, Piece{0.5, pi, "0", nullptr}});
    const DecayFit l1 = decay_order_fit(a, step, 0.0, 1.0, -1, Combination::w1114);
    ok = ok && l1.slope <= -1.7;
    return {ok, detail + "L1 " + num(l1.slope)};
}

// ---------------------------------------------------------------- 9

Outcome decay_along_iy() {
    Problem a;
    a.d = 1.0;
    a.h = 0.3;
    const PairExperiment e = splice_pair(a, 2.0, 0, "cos(x)");
    const DecayFit f = lemma_iy_probe(e);
    return {f.slope <= -0.35, "slope " + num(f.slope)};
}

// ---------------------------------------------------------------- 10

Outcome f_formulas() {
    Problem a;
    a.d = 1.0;
    a.h = 0.3;
    const std::vector<cplx> grid = default_lambda_grid();
    double worst = 0.0;
    std::string detail;
    for (double b : {2.0, 1.0, 0.6}) {
        PairExperiment e = splice_pair(a, b, 0, "cos(x)");
        e.b.h = -0.4;
        if (b <= 1.0) {
            e.b.beta = 1.5;
            e.b.gamma = 0.2;
        }
        const FqhReport r = fqh_consistency(e, grid);
        worst = std::max(worst, r.worst);
        detail += "b=" + num(b) + " " + num(r.worst) + ", ";
    }
    return {worst < 1e-8, detail + std::to_string(grid.size()) + " points"};
}

// ---------------------------------------------------------------- 11

Outcome counting_machinery() {
    std::vector<cplx> sq, half;
    for (int n = 0; n < 40; ++n) {
        sq.push_back(double(n) * n);
        half.push_back((n + 0.5) * (n + 0.5));
    }
    const ZeroSequence sB = sequence_from_values(sq), sBi = sequence_from_values(half);
    const double margin = check_counting_bound(sB, sB, sBi, 1, 0, 0, 0.0, 1500.0).margin;

    // X = {n^2, n >= 1}: G(lambda) = sin(sqrt(lambda) pi) / (sqrt(lambda) pi), with the tail summed analytically
    const std::size_t N = 100000;
    std::vector<cplx> z;
    double head = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        z.push_back(double(n) * n);
        head += 1.0 / (double(n) * n);
    }
    const ProductModel g{sequence_from_values(z), 1.0, N, pi * pi / 6 - head};
    const std::vector<double> ys = geometric_grid(1e3, 1e6, 2);
    const RayBound rb = number_ray_bound(
        [&](cplx l) {
            const ScaledValue v = truncated_product(g, l).full;
            return std::log(std::abs(v.value)) + v.log_scale;
        },
        1, 0, -1, ys);

    // q = 2 so that 0 is not an eigenvalue of B
    Problem p;
    p.q = PotentialExpr("2");
    const SpectralProduct sp{p, 1, 0, {}, {}};
    const RayBound rq = number_ray_bound([&](cplx l) { return sp.log_abs(l); }, 1, 0, 0, ys);
    return {margin == 0.0 && rb.minimum > 0.0 && rq.minimum > 0.0,
            "margin " + num(margin) + ", ray minima " + num(rb.minimum) + " and " + num(rq.minimum)};
}

struct Criterion {
    const char* name;
    double limit;  // seconds
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const Criterion all[] = {
        {"classical spectra", 10, classical_spectra},
        {"discontinuous closed form", 20, discontinuous_closed_form},
        {"jump and Wronskian invariants", 30, invariants},
        {"norming identity", 60, identity},
        {"ray asymptotics", 60, ray_asymptotics},
        {"Hadamard product", 30, hadamard},
        {"expansion recursion", 30, expansion_recursion},
        {"decay orders", 120, decay_orders},
        {"decay along iy", 120, decay_along_iy},
        {"F formulas agree", 60, f_formulas},
        {"counting bounds", 30, counting_machinery},
    };
    int failed = 0, index = 0;
    for (const Criterion& c : all) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.limit;
        if (!pass) ++failed;
        std::printf("%s %2d %-30s %7.2fs (limit %4.0fs)  %s\n", pass ? "PASS" : "FAIL", index, c.name, secs, c.limit,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
