#pragma once

#include <sturmdisc/expr.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace sturmdisc {

inline constexpr double pi = std::numbers::pi;

enum class Side { left, right, interior };

struct Piece {
    double from = 0.0;
    double to = pi;
    std::string source;
    Expr ast;
};

// A potential on [0, pi]: one expression, or expressions on consecutive
// sub-intervals tiling [0, pi].
class PotentialExpr {
public:
    PotentialExpr() : PotentialExpr(std::string("0")) {}

    explicit PotentialExpr(const std::string& source) {
        pieces_.push_back(Piece{0.0, pi, source, expr::parse(source)});
    }

    explicit PotentialExpr(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw ValidationError("piecewise potential needs at least one piece");
        constexpr double tol = 1e-12;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            Piece& p = pieces_[i];
            if (!p.ast) p.ast = expr::parse(p.source);
            if (p.source.empty()) p.source = expr::to_string(p.ast);
            if (std::abs(p.to - pi) < tol) p.to = pi;
            if (std::abs(p.from) < tol) p.from = 0.0;
            if (!(p.from < p.to)) throw ValidationError("piece " + std::to_string(i) + " has an empty interval");
            if (p.from < 0.0 || p.to > pi) throw ValidationError("piece " + std::to_string(i) + " leaves [0, pi]");
            if (i == 0 && p.from != 0.0) throw ValidationError("pieces must start at 0");
            if (i > 0) {
                if (std::abs(p.from - pieces_[i - 1].to) > tol)
                    throw ValidationError("pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                          " do not tile [0, pi]");
                p.from = pieces_[i - 1].to;
            }
        }
        if (pieces_.back().to != pi) throw ValidationError("pieces must end at pi");
    }

    static PotentialExpr from_ast(const Expr& e) {
        return PotentialExpr(std::vector<Piece>{Piece{0.0, pi, expr::to_string(e), e}});
    }

    const std::vector<Piece>& pieces() const { return pieces_; }
    bool piecewise() const { return pieces_.size() > 1; }

    // Text form; a single piece prints as its source.
    std::string source() const {
        if (!piecewise()) return pieces_.front().source;
        std::string s;
        for (const auto& p : pieces_) {
            if (!s.empty()) s += "; ";
            s += "[" + expr::format_double(p.from) + ", " + expr::format_double(p.to) + "]: " + p.source;
        }
        return s;
    }

    // Interior piece boundaries, ascending.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (std::size_t i = 1; i < pieces_.size(); ++i) b.push_back(pieces_[i].from);
        return b;
    }

    std::size_t piece_index(double x, Side side) const {
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const Piece& p = pieces_[i];
            if (x < p.to) return i;
            if (x == p.to) {
                if (side == Side::left || i + 1 == pieces_.size()) return i;
                return i + 1;
            }
        }
        return pieces_.size() - 1;
    }

    cplx operator()(double x, Side side = Side::interior) const {
        return expr::eval(pieces_[piece_index(x, side)].ast, x);
    }

    PotentialExpr derivative(unsigned order) const {
        std::vector<Piece> out;
        for (const auto& p : pieces_) {
            Expr d = expr::differentiate(p.ast, order);
            out.push_back(Piece{p.from, p.to, expr::to_string(d), d});
        }
        return PotentialExpr(std::move(out));
    }

private:
    std::vector<Piece> pieces_;
};

inline PotentialExpr parse_potential(const std::string& source) { return PotentialExpr(source); }

inline PotentialExpr differentiate(const PotentialExpr& q, unsigned order) { return q.derivative(order); }

} // namespace sturmdisc
