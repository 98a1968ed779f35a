// Wronskian decay along iy for q = 0 against q = (x - 1)^{m+1} on [0, 1).
#include <sturmdisc/asymptotics.hpp>

#include <cstdio>
#include <string>

int main() {
    using namespace sturmdisc;
    const Problem a;
    for (int m = 0; m <= 2; ++m) {
        Problem b;
        b.q = PotentialExpr(std::vector<Piece>{Piece{0.0, 1.0, "(x-1)^" + std::to_string(m + 1), nullptr},
                                               Piece{1.0, pi, "0", nullptr}});
        const DecayFit f = decay_order_fit(a, b, 0.0, 1.0, m, Combination::w1114);
        std::printf("m = %d: slope %.3f (claimed %.0f) %s\n", m, f.slope, -f.claimed, f.pass ? "ok" : "FAIL");
    }
}
