// Neumann, Dirichlet-at-pi and jump spectra of -y'' = lambda y.
#include <sturmdisc/spectrum.hpp>

#include <cstdio>

int main() {
    using namespace sturmdisc;
    Problem neumann;
    Problem dirichlet;
    dirichlet.H = Dirichlet{};
    Problem jump;
    jump.beta = 2.0;
    jump.d = pi / 3;

    for (auto [name, p] : {std::pair{"neumann", neumann}, std::pair{"dirichlet at pi", dirichlet}, std::pair{"beta = 2", jump}}) {
        const ZeroSequence s = find_eigenvalues(p, Which::B, 50.0);
        std::printf("%s:", name);
        for (std::size_t i = 0; i < s.size(); ++i) std::printf(" %.10g", s[i].real());
        std::printf("\n");
    }
}
