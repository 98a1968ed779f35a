#include <catch_amalgamated.hpp>

#include <sturmdisc/norming.hpp>

using namespace sturmdisc;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST_CASE("norming constants of the Neumann problem") {
    Problem p;
    for (int n = 1; n <= 5; ++n) {
        const NormingData nd = compute_norming(p, EigenRecord{double(n * n), 1, 0.0}, Which::B);
        REQUIRE(nd.kappas.size() == 1);
        REQUIRE(nd.alphas.size() == 1);
        CHECK(rel(nd.kappas[0], n % 2 ? -1.0 : 1.0) < 1e-9);
        CHECK(rel(nd.alphas[0], pi / 2) < 1e-9);
        CHECK(check_identity_24(p, nd) < 1e-9);
        // Delta'(n^2) = -(pi/2)(-1)^n
        const CharSample c = char_delta(p, double(n * n), 1);
        CHECK(rel(c.derivatives[1], -(pi / 2) * (n % 2 ? -1.0 : 1.0)) < 1e-9);
    }
    const NormingData z = compute_norming(p, EigenRecord{0.0, 1, 0.0}, Which::B);
    CHECK(rel(z.kappas[0], 1.0) < 1e-9);
    CHECK(rel(z.alphas[0], pi) < 1e-9);
    CHECK(rel(char_delta(p, 0.0, 1).derivatives[1], -pi) < 1e-9);
    CHECK(check_identity_24(p, z) < 1e-9);
}

TEST_CASE("a constant shift leaves kappa and alpha unchanged") {
    Problem p, s;
    s.q = PotentialExpr("1");
    for (int n = 0; n <= 3; ++n) {
        const NormingData a = compute_norming(p, EigenRecord{double(n * n), 1, 0.0}, Which::B);
        const NormingData b = compute_norming(s, EigenRecord{double(n * n + 1), 1, 0.0}, Which::B);
        CHECK(rel(b.kappas[0], a.kappas[0]) < 1e-9);
        CHECK(rel(b.alphas[0], a.alphas[0]) < 1e-9);
    }
}

TEST_CASE("Dirichlet-at-pi norming constants") {
    Problem p;
    for (int n = 0; n <= 3; ++n) {
        const double k = n + 0.5;
        const NormingData nd = compute_norming(p, EigenRecord{k * k, 1, 0.0}, Which::B_inf);
        // kappa = phi'(pi) = -k sin(k pi), alpha = int sin^2(k (x - pi)) / k^2 = pi / (2 k^2)
        CHECK(rel(nd.kappas[0], -k * std::sin(k * pi)) < 1e-9);
        CHECK(rel(nd.alphas[0], pi / (2 * k * k)) < 1e-9);
        CHECK(check_identity_24(p, nd) < 1e-9);
    }
}

TEST_CASE("identity for a complex potential with a jump") {
    Problem p;
    p.q = PotentialExpr("cos(x) + 0.5i*sin(2*x)");
    p.beta = 1.5;
    p.gamma = cplx(0.0, 0.2);
    p.d = 1.0;
    const ZeroSequence s = find_eigenvalues(p, Which::B, 120.0);
    REQUIRE(s.size() >= 8);
    for (std::size_t n = 0; n < 8; ++n) {
        REQUIRE(s.records[n].multiplicity == 1);
        const NormingData nd = compute_norming(p, s.records[n], Which::B);
        INFO("lambda = " << s[n]);
        CHECK(check_identity_24(p, nd) < 1e-6);
        // kappa by a second solve at the refined root
        const cplx phi_pi = solve_chain(p, s[n], ChainKind::phi, 0).states.back().y();
        CHECK(rel(nd.kappas[0], phi_pi) < 1e-9);
    }
}

TEST_CASE("self-adjoint alphas are real and positive") {
    Problem p;
    p.q = PotentialExpr("x - 1");
    p.h = 0.3;
    p.H = Robin{0.6};
    p.beta = 0.7;
    p.gamma = -0.4;
    p.d = 2.2;
    const ZeroSequence s = find_eigenvalues(p, Which::B, 60.0);
    REQUIRE(s.size() >= 4);
    for (std::size_t n = 0; n < s.size(); ++n) {
        const NormingData nd = compute_norming(p, s.records[n], Which::B);
        CHECK(std::abs(nd.alphas[0].imag()) < 1e-9 * std::abs(nd.alphas[0]));
        CHECK(nd.alphas[0].real() > 0.0);
        CHECK(nd.identity_residuals.size() == 1);
        CHECK(nd.identity_residuals[0] < 1e-8);
    }
}

TEST_CASE("norming input checks") {
    Problem p;
    CHECK_THROWS_AS(compute_norming(p, EigenRecord{1.0, 0, 0.0}, Which::B), ValidationError);
}
