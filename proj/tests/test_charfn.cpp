#include <catch_amalgamated.hpp>

#include <sturmdisc/uniqueness.hpp>

using namespace sturmdisc;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

cplx true_F(const PairSample& s) { return s.F * std::exp(2.0 * s.log_scale); }

} // namespace

TEST_CASE("characteristic functions of -y'' = lambda y") {
    Problem p;
    const CharSample cs = char_delta(p, 0.25);
    CHECK(rel(cs.delta, -0.5) < 1e-10);
    CHECK(std::abs(cs.delta_inf) < 1e-10);
    for (cplx lambda : {cplx(2.0, 0.0), cplx(-3.0, 4.0), cplx(50.0, 1.0)}) {
        const cplx k = std::sqrt(lambda);
        const CharSample c = char_delta(p, lambda);
        const double e = std::exp(c.log_scale);
        CHECK(rel(c.delta * e, -k * std::sin(k * pi)) < 1e-9);
        CHECK(rel(c.delta_inf * e, -std::cos(k * pi)) < 1e-9);
    }
}

TEST_CASE("characteristic function with a jump at pi/2") {
    Problem p;
    p.beta = 2.0;
    p.d = pi / 2;
    CHECK(rel(char_delta(p, 0.25).delta, -0.625) < 1e-10);
    // general lambda: -b1 k sin(k pi) + b2 k sin(k (2d - pi)), the second term vanishes at d = pi/2
    const cplx lambda(7.3, 0.4), k = std::sqrt(lambda);
    const CharSample c = char_delta(p, lambda);
    CHECK(rel(c.delta * std::exp(c.log_scale), -1.25 * k * std::sin(k * pi)) < 1e-9);
}

TEST_CASE("Delta from phi and from psi agree") {
    Problem p;
    p.q = PotentialExpr("cos(x) + 0.5i*sin(2*x)");
    p.h = cplx(0.3, 0.1);
    p.H = Robin{-0.4};
    p.beta = 1.5;
    p.gamma = cplx(0.0, 0.2);
    p.d = 1.2;
    for (cplx lambda : {cplx(0.7, 0.0), cplx(12.0, -3.0), cplx(-5.0, 8.0)}) {
        const CharSample c = char_delta(p, lambda);
        const cplx via_psi = char_delta_via_psi(p, lambda, Which::B);
        const cplx d = c.delta * std::exp(c.log_scale);
        CHECK(std::abs(d - via_psi) < 1e-8 * std::abs(d));
        const cplx via_psi_inf = char_delta_via_psi(p, lambda, Which::B_inf);
        const cplx di = c.delta_inf * std::exp(c.log_scale);
        CHECK(std::abs(di - via_psi_inf) < 1e-8 * std::abs(di));
    }
}

TEST_CASE("Delta derivatives match centred differences") {
    Problem p;
    p.q = PotentialExpr("exp(-x)");
    p.beta = 0.8;
    p.gamma = 0.3;
    p.d = 2.0;
    p.h = 1.0;
    const cplx lambda(3.0, 1.0);
    const double eps = 1e-5;
    const CharSample c = char_delta(p, lambda, 1);
    REQUIRE(c.derivatives.size() == 2);
    CHECK(c.derivatives[0] == c.delta);
    const cplx fd = (char_delta(p, lambda + eps).delta - char_delta(p, lambda - eps).delta) / (2 * eps);
    CHECK(rel(c.derivatives[1], fd) < 1e-7);
    const cplx fdi = (char_delta(p, lambda + eps).delta_inf - char_delta(p, lambda - eps).delta_inf) / (2 * eps);
    CHECK(rel(c.derivatives_inf[1], fdi) < 1e-7);
}

TEST_CASE("Weyl function") {
    Problem p;
    auto m = weyl_m(p, 0.25);
    REQUIRE(m.has_value());
    CHECK(std::abs(*m) < 1e-9);
    const cplx lambda(2.0, 1.0), k = std::sqrt(lambda);
    m = weyl_m(p, lambda);
    REQUIRE(m.has_value());
    CHECK(rel(*m, std::cos(k * pi) / (k * std::sin(k * pi))) < 1e-9);
    CHECK_FALSE(weyl_m(p, 4.0).has_value());
    CHECK_FALSE(weyl_m(p, 0.0).has_value());
}

TEST_CASE("F of a problem with itself vanishes") {
    Problem p;
    p.q = PotentialExpr("x^2 + 1i");
    p.beta = 1.4;
    p.d = 1.0;
    for (cplx lambda : {cplx(3.0, 0.0), cplx(-2.0, 9.0)}) {
        for (EvalPoint at : {EvalPoint::at_pi(), EvalPoint::at(2.0), EvalPoint::jump(), EvalPoint::at(0.5)}) {
            const PairSample s = f_function(p, p, lambda, at);
            CHECK(std::abs(s.F) == 0.0);
            CHECK(std::abs(s.F1) == 0.0);
            CHECK(std::abs(s.F2) == 0.0);
        }
    }
}

TEST_CASE("F for two boundary conditions at 0") {
    Problem a, b;
    b.h = 1.0;
    for (cplx lambda : {cplx(0.3, 0.0), cplx(10.0, 2.0), cplx(200.0, 0.0)})
        CHECK(rel(true_F(f_function(a, b, lambda)), 1.0) < 1e-9);
    // the bracket at pi cancels once |Im sqrt(lambda)| pi is large; the integral form does not
    for (cplx lambda : {cplx(-4.0, -1.0), cplx(0.0, 1e4), cplx(-30.0, 0.0)}) {
        const ScaledValue v = f_function_integral(a, b, lambda);
        CHECK(rel(v.value * std::exp(v.log_scale), 1.0) < 1e-9);
    }
}

TEST_CASE("F at b equals F at pi when the pair agrees on [b, pi]") {
    Problem a;
    a.q = PotentialExpr("cos(x)");
    a.beta = 1.3;
    a.d = 1.0;
    const PairExperiment e = splice_pair(a, 2.0, 0, "sin(x)");
    for (cplx lambda : {cplx(1.0, 0.3), cplx(9.0, -0.5), cplx(25.0, 1.0)}) {
        const cplx Fpi = true_F(f_function(e.a, e.b, lambda, EvalPoint::at_pi()));
        const cplx Fb = true_F(f_function(e.a, e.b, lambda, EvalPoint::at(2.0)));
        CHECK(std::abs(Fpi - Fb) < 1e-8 * std::max(1.0, std::abs(Fpi)));
    }
}

TEST_CASE("ray asymptotics of Delta and Delta_inf") {
    Problem p;
    p.q = PotentialExpr("cos(x)");
    p.beta = 1.5;
    p.gamma = 0.2;
    p.d = 1.0;
    p.h = 0.5;
    p.H = Robin{0.25};
    for (double y : {1e4, 1e5, 1e6}) {
        const CharSample c = char_delta(p, cplx(0.0, y));
        const double s = std::abs(std::sqrt(cplx(0.0, y)).imag());
        const double lead = std::log(0.5 * p.b1()) + s * pi;
        INFO("y = " << y);
        CHECK(std::abs(std::exp(c.log_abs_delta() - lead - 0.5 * std::log(y)) - 1.0) < 0.05);
        CHECK(std::abs(std::exp(c.log_abs_delta_inf() - lead) - 1.0) < 0.05);
    }
}

TEST_CASE("pairs with different d are only compared at pi") {
    Problem a, b;
    b.d = 1.0;
    CHECK_NOTHROW(f_function(a, b, 2.0));
    CHECK_THROWS_AS(f_function(a, b, 2.0, EvalPoint::at(2.5)), ValidationError);
    CHECK_THROWS_AS(f_function(a, b, 2.0, EvalPoint::jump()), ValidationError);
}
