#include <catch_amalgamated.hpp>

#include <sturmdisc/uniqueness.hpp>

using namespace sturmdisc;

namespace {

Problem base() {
    Problem a;
    a.d = 1.0;
    a.h = 0.3;
    return a;
}

} // namespace

TEST_CASE("splice construction") {
    Problem a;
    a.q = PotentialExpr("cos(x)");
    const PairExperiment e = splice_pair(a, 2.0, 1, "x");
    CHECK_NOTHROW(e.validate());
    CHECK(e.b.q(1.0) == a.q(1.0) + cplx(1.0));  // (1 - 2)^2 * 1
    CHECK(e.b.q(2.5) == a.q(2.5));
    // first derivative matches at b from the left
    const PotentialExpr da = a.q.derivative(1), db = e.b.q.derivative(1);
    CHECK(std::abs(da(2.0, Side::left) - db(2.0, Side::left)) < 1e-14);

    PairExperiment bad = e;
    bad.b_point = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(splice_pair(a, 0.0, 0), ValidationError);
    CHECK_THROWS_AS(splice_pair(a, 1.0, -2), ValidationError);
}

TEST_CASE("decay of F along iy") {
    PairExperiment same = splice_pair(base(), 2.0, 0);
    same.b = same.a;
    CHECK(lemma_iy_probe(same).status == DecayStatus::identically_zero);

    PairExperiment e = splice_pair(base(), 2.0, 1);
    e.b.h = 0.7;
    const DecayFit f = lemma_iy_probe(e);
    CHECK(f.threshold == Catch::Approx(-1.0 + 0.15));
    CHECK(f.slope <= -0.85);
    CHECK(f.pass);

    PairExperiment l1 = splice_pair(base(), 2.0, -1);
    l1.b.h = 0.7;
    const DecayFit g = lemma_iy_probe(l1);
    CHECK(g.slope <= 0.15);
    CHECK(g.pass);

    PairExperiment before = splice_pair(base(), 0.5, 0);
    CHECK_THROWS_AS(lemma_iy_probe(before), ValidationError);
    PairExperiment other_d = e;
    other_d.b.d = 1.5;
    CHECK_THROWS_AS(lemma_iy_probe(other_d), ValidationError);
}

TEST_CASE("formulas for F agree") {
    const std::vector<cplx> grid = default_lambda_grid();
    REQUIRE(grid.size() == 20);

    PairExperiment same = splice_pair(base(), 2.0, 0);
    same.b = same.a;
    CHECK(fqh_consistency(same, grid).worst == 0.0);

    for (double b : {2.0, 1.0, 0.6}) {
        PairExperiment e = splice_pair(base(), b, 0, "cos(x)");
        e.b.h = -0.4;
        if (b <= 1.0) {
            e.b.beta = 1.5;
            e.b.gamma = 0.2;
        }
        const FqhReport r = fqh_consistency(e, grid);
        INFO("b = " << b);
        CHECK(r.worst < 1e-8);
        CHECK(r.which_case == (b > 1.0 ? FqhCase::b_after_d : b == 1.0 ? FqhCase::b_at_d : FqhCase::b_before_d));
        CHECK(r.samples.size() == 20);
        CHECK(r.samples[0].values.size() >= 3);
    }
}

TEST_CASE("ratio probes") {
    Problem p;
    p.q = PotentialExpr("2 + cos(x)");
    p.d = pi / 2;
    p.h = 0.5;
    p.H = Robin{0.25};
    p.beta = 1.3;
    p.gamma = 0.2;
    const std::vector<double> ys = geometric_grid(1e3, 1e6, 4);

    PairExperiment same = splice_pair(p, 3 * pi / 4, 0);
    same.b = same.a;
    ProductSpec ps;
    ps.g = SpectralProduct{p, 1, 1, {}, {}};
    const RatioProbe z = theorem_ratio_probe(same, ps, ys);
    CHECK(z.identically_zero);

    // G_Xi over sigma(B) u sigma(B_inf), A = 1, b = 3 pi / 4, m = 0
    const PairExperiment e = splice_pair(p, 3 * pi / 4, 0, "1 + x");
    const RatioProbe r = theorem_ratio_probe(e, ps, ys);
    CHECK(r.counting_ok);
    CHECK(r.tail_decreasing);
    CHECK(r.pass);

    // all eigenvalues of B but one, q known on [pi/2, pi], d < pi/2
    Problem c = p;
    c.d = 1.0;
    const PairExperiment ec = splice_pair(c, pi / 2, 0, "1");
    const ZeroSequence sb = find_eigenvalues(c, Which::B, 10.0);
    ProductSpec pc;
    pc.g = SpectralProduct{c, 1, 0, {sb[0]}, {}};
    const RatioProbe rc = theorem_ratio_probe(ec, pc, ys);
    CHECK(rc.counting.margin == 0.0);
    CHECK(rc.tail_decreasing);
    CHECK(rc.pass);

    // the counting hypothesis fails when too many zeros are taken out
    ProductSpec thin = pc;
    thin.g.removed = {sb[0], sb[1]};
    const RatioProbe rt = theorem_ratio_probe(ec, thin, ys);
    CHECK_FALSE(rt.counting_ok);
    CHECK_FALSE(rt.pass);
}
