#pragma once

// Config-driven front end: resolves a JSON config, runs one command and builds
// the JSON/CSV report. The executable in tools/ is a thin wrapper around run().

#include <sturmdisc/norming.hpp>
#include <sturmdisc/uniqueness.hpp>
#include <sturmdisc/version.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sturmdisc::cli {

using json = nlohmann::json;

enum ExitCode { exit_ok = 0, exit_validation = 1, exit_computation = 2, exit_property = 3 };

class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& path, const std::string& message)
        : ValidationError("config " + (path.empty() ? std::string("/") : path) + ": " + message), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// ---------------------------------------------------------------- formatting

// 17 significant digits, '.' separator, independent of the locale.
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json to_json(const std::vector<cplx>& zs) {
    json a = json::array();
    for (cplx z : zs) a.push_back(to_json(z));
    return a;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

// ---------------------------------------------------------------- config access

// A view on one JSON object of the (mutable) resolved config. Defaults are
// written back so the report can embed the config as actually used.
class Node {
public:
    Node(json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string at(const std::string& key) const { return path_ + "/" + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    json& raw() { return j_; }

    Node child(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "missing required object");
        return Node(j_[key], at(key));
    }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        const json* v = fetch(key, def ? json(*def) : json());
        return parse_real(*v, at(key));
    }

    double number_in(const std::string& key, std::optional<double> def, double lo, double hi, bool open_lo = false,
                     bool open_hi = false) {
        const double v = number(key, def);
        const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
        if (!ok)
            throw ConfigError(at(key), "must lie in " + std::string(open_lo ? "(" : "[") + fmt17(lo) + ", " + fmt17(hi) +
                                           (open_hi ? ")" : "]"));
        return v;
    }

    int integer(const std::string& key, std::optional<int> def, int lo, int hi) {
        const json* v = fetch(key, def ? json(*def) : json());
        if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
        const long long k = v->get<long long>();
        if (k < lo || k > hi) throw ConfigError(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return int(k);
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = fetch(key, json(def));
        if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v->get<bool>();
    }

    cplx complex(const std::string& key, std::optional<cplx> def = std::nullopt) {
        const json* v = fetch(key, def ? complex_json(*def) : json());
        return parse_complex(*v, at(key));
    }

    std::string string(const std::string& key, std::optional<std::string> def = std::nullopt,
                       const std::vector<std::string>& allowed = {}) {
        const json* v = fetch(key, def ? json(*def) : json());
        if (!v->is_string()) throw ConfigError(at(key), "expected a string");
        std::string s = v->get<std::string>();
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError(at(key), "'" + s + "' is not one of " + list);
        }
        return s;
    }

    std::vector<cplx> complex_list(const std::string& key, std::optional<std::vector<cplx>> def = std::nullopt) {
        json d;
        if (def) {
            d = json::array();
            for (cplx z : *def) d.push_back(complex_json(z));
        }
        const json* v = fetch(key, d);
        if (!v->is_array()) throw ConfigError(at(key), "expected an array");
        std::vector<cplx> out;
        for (std::size_t i = 0; i < v->size(); ++i) out.push_back(parse_complex((*v)[i], at(key) + "/" + std::to_string(i)));
        return out;
    }

    std::vector<double> number_list(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
        const json* v = fetch(key, def ? json(*def) : json());
        if (!v->is_array()) throw ConfigError(at(key), "expected an array");
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) out.push_back(parse_real((*v)[i], at(key) + "/" + std::to_string(i)));
        return out;
    }

    std::vector<int> index_list(const std::string& key) {
        const json* v = fetch(key, json::array());
        if (!v->is_array()) throw ConfigError(at(key), "expected an array");
        std::vector<int> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            if (!e.is_number_integer() || e.get<long long>() < 0)
                throw ConfigError(at(key) + "/" + std::to_string(i), "expected a non-negative integer");
            out.push_back(int(e.get<long long>()));
        }
        return out;
    }

    void mark(const std::string& key) { used_.insert(key); }

    // Rejects fields nobody asked for.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }

    static double parse_real(const json& v, const std::string& path) {
        const cplx z = parse_complex(v, path);
        if (z.imag() != 0.0) throw ConfigError(path, "expected a real number");
        return z.real();
    }

    static cplx parse_complex(const json& v, const std::string& path) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return constant_expression(v.get<std::string>(), path);
        if (v.is_array() && v.size() == 2)
            return {parse_real(v[0], path + "/0"), parse_real(v[1], path + "/1")};
        throw ConfigError(path, "expected a number, a constant expression string or [re, im]");
    }

    // "pi/2", "3*pi/4", ... : the expression language with pi substituted.
    static cplx constant_expression(const std::string& s, const std::string& path) {
        std::string t;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.compare(i, 2, "pi") == 0) {
                t += "(" + fmt17(pi) + ")";
                ++i;
            } else {
                t += s[i];
            }
        }
        try {
            const Expr e = expr::parse(t);
            if (expr::depends_on_x(e)) throw ConfigError(path, "constant expected, found a function of x");
            const cplx z = expr::eval(e, 0.0);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ConfigError(path, "value is not finite");
            return z;
        } catch (const ParseError& err) {
            throw ConfigError(path, err.what());
        }
    }

private:
    const json* fetch(const std::string& key, const json& def) {
        used_.insert(key);
        if (!j_.contains(key)) {
            if (def.is_null()) throw ConfigError(at(key), "missing required field");
            j_[key] = def;
        }
        return &j_[key];
    }

    static json complex_json(cplx z) { return z.imag() == 0.0 ? json(z.real()) : json::array({z.real(), z.imag()}); }

    json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------- problems

inline Problem parse_problem(Node n) {
    Problem p;
    n.mark("q");
    if (!n.has("q")) throw ConfigError(n.at("q"), "missing required field");
    json& q = n.raw()["q"];
    try {
        if (q.is_string()) {
            p.q = PotentialExpr(q.get<std::string>());
        } else if (q.is_array()) {
            std::vector<Piece> pieces;
            for (std::size_t i = 0; i < q.size(); ++i) {
                Node pc(q[i], n.at("q") + "/" + std::to_string(i));
                const double from = pc.number("from");
                const double to = pc.number("to");
                const std::string src = pc.string("expr");
                pc.finish();
                pieces.push_back(Piece{from, to, src, nullptr});
            }
            p.q = PotentialExpr(std::move(pieces));
        } else {
            throw ConfigError(n.at("q"), "expected an expression string or a list of pieces");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError(n.at("q"), e.what());
    }
    p.h = n.complex("h", cplx{});
    n.mark("H");
    if (n.has("H") && n.raw()["H"].is_string() && n.raw()["H"].get<std::string>() == "dirichlet") {
        p.H = Dirichlet{};
    } else {
        p.H = Robin{n.complex("H", cplx{})};
    }
    p.beta = n.number_in("beta", 1.0, 0.0, 1e6, true);
    p.gamma = n.complex("gamma", cplx{});
    p.d = n.number_in("d", pi / 2, 0.0, pi, true, true);
    n.finish();
    return p;
}

struct Config {
    json resolved;
    std::map<std::string, Problem> problems;

    const Problem& problem(const std::string& name, const std::string& path) const {
        auto it = problems.find(name);
        if (it == problems.end()) throw ConfigError(path, "unknown problem '" + name + "'");
        return it->second;
    }
};

// ---------------------------------------------------------------- report

struct Report {
    std::string command;
    json result = json::object();
    Table table;
    bool has_property = false;
    bool property_pass = true;
    bool failed = false;
    std::string error;
};

inline json report_json(const Report& r, const json& config) {
    json j;
    j["tool"] = "sturmdisc";
    j["version"] = version;
    j["command"] = r.command;
    j["config"] = config;
    j["status"] = r.failed ? "failed" : "ok";
    if (r.failed) j["error"] = r.error;
    if (r.has_property) j["pass"] = r.property_pass;
    j["result"] = r.result;
    return j;
}

inline std::string report_csv(const Report& r, const json& config) {
    std::ostringstream os;
    os << "# sturmdisc " << version << " " << r.command << "\n";
    os << "# status: " << (r.failed ? "failed" : "ok") << "\n";
    if (r.failed) os << "# error: " << r.error << "\n";
    if (r.has_property) os << "# pass: " << (r.property_pass ? "true" : "false") << "\n";
    os << "# config: " << config.dump() << "\n";
    for (std::size_t i = 0; i < r.table.header.size(); ++i) os << (i ? "," : "") << r.table.header[i];
    os << "\n";
    for (const auto& row : r.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------- commands

namespace detail {

inline Which parse_which(Node& n, const std::string& key = "which") {
    return n.string(key, "B", {"B", "B_inf"}) == "B" ? Which::B : Which::B_inf;
}

inline DecayOptions decay_options(Node& n, double y_min, double y_max, int per_decade) {
    DecayOptions o;
    o.y_min = n.number_in("y_min", y_min, 0.0, 1e12, true);
    o.y_max = n.number_in("y_max", y_max, 0.0, 1e12, true);
    if (!(o.y_max > o.y_min)) throw ConfigError(n.at("y_max"), "must exceed y_min");
    o.per_decade = n.integer("per_decade", per_decade, 1, 50);
    o.delta = n.number_in("delta", 0.2, 0.0, pi, true);
    return o;
}

inline void decay_rows(Table& t, const DecayFit& df) {
    for (std::size_t i = 0; i < df.y.size(); ++i)
        t.add({df.label, fmt17(df.y[i]), fmt17(df.normalized[i]), fmt17(df.floor[i]), df.used[i] ? "1" : "0",
               fmt17(df.slope), fmt17(df.threshold), df.pass ? "1" : "0"});
}

inline json decay_json(const DecayFit& df) {
    json j;
    j["label"] = df.label;
    j["claimed_exponent"] = df.claimed;
    j["threshold"] = df.threshold;
    j["slope"] = df.slope;
    j["intercept"] = df.intercept;
    j["status"] = to_string(df.status);
    j["pass"] = df.pass;
    j["y"] = df.y;
    j["normalized"] = df.normalized;
    j["floor"] = df.floor;
    j["used"] = df.used;
    return j;
}

inline const std::vector<std::string> decay_header{"label", "y", "normalized", "floor", "used", "slope", "threshold", "pass"};

inline void cmd_spectrum(const Config& c, Node p, Report& r) {
    const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
    const Which which = parse_which(p);
    const double bound = p.number_in("bound", std::nullopt, 0.0, 1e5, true);
    SearchOptions so;
    so.c_im = p.number_in("c_im", so.c_im, 0.0, 1e4, true);
    p.finish();
    const ZeroSequence seq = find_eigenvalues(pr, which, bound, so);
    r.table.header = {"index", "re", "im", "multiplicity", "residual"};
    json list = json::array();
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const EigenRecord& e = seq.records[i];
        list.push_back(json{{"re", e.lambda.real()}, {"im", e.lambda.imag()}, {"multiplicity", e.multiplicity},
                            {"residual", e.refined_residual}});
        r.table.add({std::to_string(i), fmt17(e.lambda.real()), fmt17(e.lambda.imag()), std::to_string(e.multiplicity),
                     fmt17(e.refined_residual)});
    }
    r.result["which"] = to_string(which);
    r.result["origin"] = to_string(seq.origin);
    r.result["tie_break"] = seq.tie_break;
    r.result["count"] = seq.size();
    r.result["eigenvalues"] = list;
}

inline void cmd_norming(const Config& c, Node p, Report& r) {
    const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
    const Which which = parse_which(p);
    const double bound = p.number_in("bound", std::nullopt, 0.0, 1e5, true);
    NormingOptions no;
    no.identity_tolerance = p.number_in("identity_tolerance", no.identity_tolerance, 0.0, 1.0, true);
    p.finish();
    const ZeroSequence seq = find_eigenvalues(pr, which, bound);
    r.table.header = {"index", "nu", "lambda_re", "lambda_im", "multiplicity", "kappa_re", "kappa_im", "alpha_re",
                      "alpha_im", "identity_residual"};
    r.result["which"] = to_string(which);
    r.result["eigenvalues"] = json::array();
    std::size_t index = 0;
    for (const EigenRecord& e : seq.distinct()) {
        const NormingData nd = compute_norming(pr, e, which, no);
        json j{{"lambda", to_json(e.lambda)}, {"multiplicity", nd.eigen.multiplicity}, {"kappas", to_json(nd.kappas)},
               {"alphas", to_json(nd.alphas)}, {"identity_residuals", nd.identity_residuals}, {"reprobed", nd.reprobed}};
        r.result["eigenvalues"].push_back(j);
        for (int nu = 0; nu < nd.eigen.multiplicity; ++nu)
            r.table.add({std::to_string(index), std::to_string(nu), fmt17(e.lambda.real()), fmt17(e.lambda.imag()),
                         std::to_string(nd.eigen.multiplicity), fmt17(nd.kappas[nu].real()), fmt17(nd.kappas[nu].imag()),
                         fmt17(nd.alphas[nu].real()), fmt17(nd.alphas[nu].imag()), fmt17(nd.identity_residuals[nu])});
        index += std::size_t(nd.eigen.multiplicity);
    }
}

inline void cmd_charfn(const Config& c, Node p, Report& r) {
    const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
    const std::vector<cplx> lambdas = p.complex_list("lambdas");
    const int k = p.integer("derivatives", 0, 0, 12);
    p.finish();
    r.table.header = {"lambda_re", "lambda_im", "j", "delta_re", "delta_im", "delta_inf_re", "delta_inf_im", "log_scale"};
    r.result["samples"] = json::array();
    for (cplx l : lambdas) {
        const CharSample cs = char_delta(pr, l, k);
        r.result["samples"].push_back(json{{"lambda", to_json(l)},
                                           {"log_scale", cs.log_scale},
                                           {"delta", to_json(cs.derivatives)},
                                           {"delta_inf", to_json(cs.derivatives_inf)}});
        for (int j = 0; j <= k; ++j)
            r.table.add({fmt17(l.real()), fmt17(l.imag()), std::to_string(j), fmt17(cs.derivatives[j].real()),
                         fmt17(cs.derivatives[j].imag()), fmt17(cs.derivatives_inf[j].real()),
                         fmt17(cs.derivatives_inf[j].imag()), fmt17(cs.log_scale)});
    }
    r.result["note"] = "values are mantissas: true value = value * exp(log_scale)";
}

inline void cmd_product(const Config& c, Node p, Report& r) {
    const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
    const Which which = parse_which(p);
    const double bound = p.number_in("bound", std::nullopt, 0.0, 1e5, true);
    const std::vector<cplx> points = p.complex_list("points");
    p.finish();
    const ZeroSequence seq = find_eigenvalues(pr, which, bound);
    const ConstantFit fc = fit_constant(pr, which, seq);
    r.result["zeros"] = seq.size();
    r.result["constant"] = to_json(fc.constant);
    r.result["median_ratio"] = to_json(fc.median_ratio);
    r.result["relative_gap"] = fc.relative_gap;
    r.result["consistent"] = fc.consistent;
    const ProductModel model{seq, fc.constant, seq.size(), std::nullopt};
    r.table.header = {"lambda_re", "lambda_im", "product_re", "product_im", "delta_re", "delta_im", "relative_error"};
    r.result["points"] = json::array();
    for (cplx l : points) {
        const cplx g = true_value(truncated_product(model, l).full);
        const CharSample cs = char_delta(pr, l);
        const cplx d = (which == Which::B ? cs.delta : cs.delta_inf) * std::exp(cs.log_scale);
        const double rel = std::abs(g - d) / std::abs(d);
        r.result["points"].push_back(
            json{{"lambda", to_json(l)}, {"product", to_json(g)}, {"delta", to_json(d)}, {"relative_error", rel}});
        r.table.add({fmt17(l.real()), fmt17(l.imag()), fmt17(g.real()), fmt17(g.imag()), fmt17(d.real()), fmt17(d.imag()),
                     fmt17(rel)});
    }
}

inline void cmd_growth(const Config& c, Node p, Report& r) {
    const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
    const std::string which = p.string("which", "both", {"B", "B_inf", "both"});
    const double lo = p.number_in("y_min", 1e2, 0.0, 1e12, true);
    const double hi = p.number_in("y_max", 1e6, 0.0, 1e12, true);
    const int per = p.integer("per_decade", 4, 1, 50);
    p.finish();
    const std::vector<double> ys = geometric_grid(lo, hi, per);
    r.table.header = {"which", "y", "log_abs", "fitted", "c", "p"};
    for (Which w : {Which::B, Which::B_inf}) {
        if (which != "both" && which != to_string(w)) continue;
        const std::vector<double> la = ray_log_abs(pr, w, ys);
        const GrowthFit g = growth_fit(ys, la);
        r.result[to_string(w)] =
            json{{"c", g.c}, {"p", g.p}, {"constant", g.constant}, {"residual", g.residual}, {"y", ys}, {"log_abs", la}};
        for (std::size_t i = 0; i < ys.size(); ++i)
            r.table.add({to_string(w), fmt17(ys[i]), fmt17(la[i]), fmt17(g.prediction(ys[i])), fmt17(g.c), fmt17(g.p)});
    }
}

inline void cmd_asympt(const Config& c, Node p, Report& r) {
    const std::string mode = p.string("mode", std::nullopt, {"decay", "expansion", "s_series"});
    r.result["mode"] = mode;
    if (mode == "decay") {
        const Problem& a = c.problem(p.string("a"), p.at("a"));
        const Problem& b = c.problem(p.string("b"), p.at("b"));
        const double r0 = p.number_in("r", 0.0, 0.0, pi);
        const double x0 = p.number_in("x0", std::nullopt, 0.0, pi, true);
        const int m = p.integer("m", std::nullopt, -1, 8);
        json combos = json::array({"1111", "1112", "1113", "1114"});
        p.mark("combinations");
        if (p.has("combinations")) combos = p.raw()["combinations"];
        else p.raw()["combinations"] = combos;
        if (!combos.is_array() || combos.empty()) throw ConfigError(p.at("combinations"), "expected a non-empty array");
        std::vector<Combination> cs;
        for (std::size_t i = 0; i < combos.size(); ++i) {
            const std::string path = p.at("combinations") + "/" + std::to_string(i);
            if (!combos[i].is_string()) throw ConfigError(path, "expected a string");
            try {
                cs.push_back(parse_combination(combos[i].get<std::string>()));
            } catch (const ValidationError& e) {
                throw ConfigError(path, e.what());
            }
        }
        DecayOptions o = decay_options(p, 1e2, 1e6, 2);
        o.margin = p.number_in("margin", o.margin, 0.0, 10.0);
        p.finish();
        if (!(r0 < x0)) throw ConfigError(p.at("r"), "must be smaller than x0");
        r.has_property = true;
        r.table.header = decay_header;
        r.result["fits"] = json::array();
        for (Combination cb : cs) {
            const DecayFit df = decay_order_fit(a, b, r0, x0, m, cb, o);
            r.result["fits"].push_back(decay_json(df));
            decay_rows(r.table, df);
            r.property_pass = r.property_pass && df.pass;
        }
    } else if (mode == "expansion") {
        const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
        const int m = p.integer("m", std::nullopt, 0, 8);
        const std::vector<double> grid = p.number_list("x_grid");
        std::optional<cplx> lambda;
        if (p.has("lambda")) lambda = p.complex("lambda");
        else p.mark("lambda");
        p.finish();
        const ExpansionTable t = build_expansion(pr.q, m, grid);
        r.result["backend"] = t.backend == SmoothFn::Kind::poly ? "polynomial" : "chebyshev";
        r.table.header = {"x", "name", "re", "im"};
        json rows = json::array();
        for (double x : grid) {
            json jx{{"x", x}};
            for (int pp = 1; pp <= m + 2; ++pp)
                for (int j = pp; j <= m + 2; ++j) {
                    const std::string name = "f_" + std::to_string(pp) + "_" + std::to_string(j);
                    const cplx v = t.F(pp, j)(x);
                    jx[name] = to_json(v);
                    r.table.add({fmt17(x), name, fmt17(v.real()), fmt17(v.imag())});
                }
            for (int j = 1; j <= m + 2; ++j) {
                const cplx v = t.a[j](x);
                jx["a_" + std::to_string(j)] = to_json(v);
                r.table.add({fmt17(x), "a_" + std::to_string(j), fmt17(v.real()), fmt17(v.imag())});
            }
            for (int j = 0; j <= m + 1; ++j) {
                const cplx v = t.b[j](x);
                jx["b_" + std::to_string(j)] = to_json(v);
                r.table.add({fmt17(x), "b_" + std::to_string(j), fmt17(v.real()), fmt17(v.imag())});
            }
            if (lambda) {
                const auto [y, dy] = expansion_y2(t, x, *lambda);
                jx["y2"] = to_json(y);
                jx["y2_prime"] = to_json(dy);
                r.table.add({fmt17(x), "y2", fmt17(y.real()), fmt17(y.imag())});
                r.table.add({fmt17(x), "y2_prime", fmt17(dy.real()), fmt17(dy.imag())});
            }
            rows.push_back(jx);
        }
        r.result["grid"] = rows;
    } else {
        const Problem& pr = c.problem(p.string("problem"), p.at("problem"));
        const double x = p.number_in("x", std::nullopt, 0.0, pi);
        const cplx lambda = p.complex("lambda");
        const int P = p.integer("P", 6, 0, 60);
        p.finish();
        const SSeries s = s_series(pr.q, x, lambda, P);
        r.table.header = {"p", "S_re", "S_im", "C_re", "C_im", "partial_S_re", "partial_S_im", "magnitude"};
        for (int k = 0; k <= P; ++k)
            r.table.add({std::to_string(k), fmt17(s.terms_S[k].real()), fmt17(s.terms_S[k].imag()),
                         fmt17(s.terms_C[k].real()), fmt17(s.terms_C[k].imag()), fmt17(s.S[k].real()),
                         fmt17(s.S[k].imag()), fmt17(s.magnitudes[k])});
        r.result["terms_S"] = to_json(s.terms_S);
        r.result["terms_C"] = to_json(s.terms_C);
        r.result["partial_S"] = to_json(s.S);
        r.result["partial_C"] = to_json(s.C);
        r.result["magnitudes"] = s.magnitudes;
    }
}

// {"a": name, "b": name} or {"a": name, "splice": {"w": ..., overrides}}, plus agreement point and m.
inline PairExperiment parse_pair(const Config& c, Node& p) {
    const Problem& a = c.problem(p.string("a"), p.at("a"));
    const double b = p.number_in("agreement_point", std::nullopt, 0.0, pi, true);
    const int m = p.integer("m", std::nullopt, -1, 8);
    PairExperiment e;
    if (p.has("splice")) {
        if (p.has("b")) throw ConfigError(p.at("b"), "give either b or splice, not both");
        Node s = p.child("splice");
        const std::string w = s.string("w", "1");
        try {
            e = splice_pair(a, b, m, w);
        } catch (const ValidationError& err) {
            throw ConfigError(s.at("w"), err.what());
        }
        if (s.has("h")) e.b.h = s.complex("h");
        if (s.has("H")) {
            s.mark("H");
            if (s.raw()["H"].is_string() && s.raw()["H"].get<std::string>() == "dirichlet") e.b.H = Dirichlet{};
            else e.b.H = Robin{s.complex("H")};
        }
        if (s.has("beta")) e.b.beta = s.number_in("beta", std::nullopt, 0.0, 1e6, true);
        if (s.has("gamma")) e.b.gamma = s.complex("gamma");
        s.finish();
    } else {
        p.mark("splice");
        e.a = a;
        e.b = c.problem(p.string("b"), p.at("b"));
        e.b_point = b;
        e.m = m;
    }
    try {
        e.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& err) {
        throw ConfigError(p.path(), err.what());
    }
    return e;
}

inline void cmd_uniq(const Config& c, const std::string& sub, Node p, Report& r) {
    r.result["experiment"] = sub;
    PairExperiment e = parse_pair(c, p);
    r.has_property = true;
    if (sub == "iy") {
        const DecayOptions o = decay_options(p, 1e2, 1e6, 2);
        p.finish();
        const DecayFit df = lemma_iy_probe(e, o);
        r.result["fit"] = decay_json(df);
        r.table.header = decay_header;
        decay_rows(r.table, df);
        r.property_pass = df.pass;
    } else if (sub == "fqh") {
        const std::vector<cplx> lambdas = p.complex_list("lambdas", default_lambda_grid());
        const double tol = p.number_in("tolerance", 1e-8, 0.0, 1.0, true);
        p.finish();
        const FqhReport rep = fqh_consistency(e, lambdas);
        r.result["case"] = to_string(rep.which_case);
        r.result["worst"] = rep.worst;
        r.result["tolerance"] = tol;
        r.result["samples"] = json::array();
        r.table.header = {"lambda_re", "lambda_im", "formula", "re", "im", "log_scale", "discrepancy"};
        for (const auto& s : rep.samples) {
            json js{{"lambda", to_json(s.lambda)}, {"log_scale", s.log_scale}, {"discrepancy", s.discrepancy}};
            for (std::size_t i = 0; i < s.values.size(); ++i) {
                js["values"][s.formulas[i]] = to_json(s.values[i]);
                r.table.add({fmt17(s.lambda.real()), fmt17(s.lambda.imag()), s.formulas[i], fmt17(s.values[i].real()),
                             fmt17(s.values[i].imag()), fmt17(s.log_scale), fmt17(s.discrepancy)});
            }
            r.result["samples"].push_back(js);
        }
        r.property_pass = rep.worst <= tol;
    } else {
        Node g = p.child("product");
        ProductSpec spec;
        const std::string kind = g.string("kind", "F/G", {"F/G", "F1/G", "F/(G phi(b))"});
        spec.kind = kind == "F/G" ? RatioKind::f_over_g : (kind == "F1/G" ? RatioKind::f1_over_g : RatioKind::f_over_g_phi);
        spec.g.problem = e.a;
        spec.g.power_B = g.integer("power_B", 1, 0, 8);
        spec.g.power_B_inf = g.integer("power_B_inf", 0, 0, 8);
        spec.g.extra = g.complex_list("extra", std::vector<cplx>{});
        spec.A = g.number("A", 1.0);
        spec.epsilon = g.number_in("epsilon", 0.1, 0.0, 10.0, true);
        spec.spectrum_bound = g.number_in("spectrum_bound", 400.0, 0.0, 1e5, true);
        const std::vector<int> rm_b = g.index_list("remove_B");
        const std::vector<int> rm_inf = g.index_list("remove_B_inf");
        g.finish();
        const double lo = p.number_in("y_min", 1e3, 0.0, 1e12, true);
        const double hi = p.number_in("y_max", 1e6, 0.0, 1e12, true);
        const int per = p.integer("per_decade", 4, 1, 50);
        p.finish();
        if (!rm_b.empty() || !rm_inf.empty()) {
            const ZeroSequence sB = find_eigenvalues(e.a, Which::B, spec.spectrum_bound);
            const ZeroSequence sI = find_eigenvalues(e.a, Which::B_inf, spec.spectrum_bound);
            for (int i : rm_b) {
                if (std::size_t(i) >= sB.size()) throw ConfigError(g.at("remove_B"), "index beyond the computed spectrum");
                spec.g.removed.push_back(sB[std::size_t(i)]);
            }
            for (int i : rm_inf) {
                if (std::size_t(i) >= sI.size()) throw ConfigError(g.at("remove_B_inf"), "index beyond the computed spectrum");
                spec.g.removed.push_back(sI[std::size_t(i)]);
            }
        }
        const RatioProbe rp = theorem_ratio_probe(e, spec, geometric_grid(lo, hi, per));
        r.result["kind"] = to_string(rp.kind);
        r.result["counting_margin"] = rp.counting.margin;
        r.result["counting_margin_at"] = rp.counting.t_at;
        r.result["counting_ok"] = rp.counting_ok;
        r.result["identically_zero"] = rp.identically_zero;
        r.result["tail_slope"] = rp.tail_slope;
        r.result["tail_decreasing"] = rp.tail_decreasing;
        r.result["removed"] = to_json(spec.g.removed);
        r.result["y"] = rp.y;
        r.result["log_ratio"] = rp.log_ratio;
        r.table.header = {"y", "log_ratio"};
        for (std::size_t i = 0; i < rp.y.size(); ++i) r.table.add({fmt17(rp.y[i]), fmt17(rp.log_ratio[i])});
        r.property_pass = rp.pass;
    }
}

} // namespace detail

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"spectrum", "norming", "charfn", "product", "growth", "asympt", "uniq"};
    return c;
}

inline const std::vector<std::string>& uniq_experiments() {
    static const std::vector<std::string> u{"iy", "fqh", "ratio"};
    return u;
}

// Parses the top level: problems, optional command echo, params, output.
inline Config resolve(json cfg, const std::string& command, const std::string& sub) {
    Config c;
    Node top(cfg, "");
    Node probs = top.child("problems");
    for (auto it = probs.raw().begin(); it != probs.raw().end(); ++it) {
        probs.mark(it.key());
        c.problems.emplace(it.key(), parse_problem(Node(it.value(), probs.at(it.key()))));
    }
    if (top.has("command")) {
        const std::string want = sub.empty() ? command : command + " " + sub;
        const std::string got = top.string("command");
        if (got != want && got != command) throw ConfigError(top.at("command"), "config is for '" + got + "', not '" + want + "'");
    }
    top.mark("params");
    if (!top.has("params")) cfg["params"] = json::object();
    if (top.has("output")) {
        Node out = top.child("output");
        out.string("path", "");
        out.string("format", "json", {"json", "csv"});
        out.finish();
    }
    top.finish();
    c.resolved = std::move(cfg);
    return c;
}

struct RunResult {
    int exit_code = exit_ok;
    std::string output;  // report text (empty on a validation error)
    std::string message; // diagnostic for stderr
    std::string format = "json";
    std::string path;    // resolved output path, empty for stdout
};

// Runs a config already loaded as JSON. out_path/format override the config's output block.
inline RunResult run(const json& config, const std::string& command, const std::string& sub,
                     const std::optional<std::string>& out_path = std::nullopt,
                     const std::optional<std::string>& format = std::nullopt) {
    RunResult rr;
    Config c;
    Report r;
    r.command = sub.empty() ? command : command + " " + sub;
    try {
        if (std::find(commands().begin(), commands().end(), command) == commands().end())
            throw ValidationError("unknown command '" + command + "'");
        if (command == "uniq" && std::find(uniq_experiments().begin(), uniq_experiments().end(), sub) == uniq_experiments().end())
            throw ValidationError("uniq needs one of iy, fqh, ratio");
        c = resolve(config, command, sub);
        if (c.resolved.contains("output")) {
            rr.path = c.resolved["output"]["path"].get<std::string>();
            rr.format = c.resolved["output"]["format"].get<std::string>();
        }
        if (out_path) rr.path = *out_path;
        if (format) {
            if (*format != "json" && *format != "csv") throw ValidationError("--format must be json or csv");
            rr.format = *format;
        }
        Node params(c.resolved["params"], "/params");
        try {
            if (command == "spectrum") detail::cmd_spectrum(c, params, r);
            else if (command == "norming") detail::cmd_norming(c, params, r);
            else if (command == "charfn") detail::cmd_charfn(c, params, r);
            else if (command == "product") detail::cmd_product(c, params, r);
            else if (command == "growth") detail::cmd_growth(c, params, r);
            else if (command == "asympt") detail::cmd_asympt(c, params, r);
            else detail::cmd_uniq(c, sub, params, r);
        } catch (const ComputationError& e) {
            r.failed = true;
            r.error = e.what();
            rr.exit_code = exit_computation;
            rr.message = "computation failed: " + r.error;
        }
    } catch (const ValidationError& e) {
        rr.exit_code = exit_validation;
        rr.message = e.what();
        return rr;
    }
    if (!r.failed && r.has_property && !r.property_pass) {
        rr.exit_code = exit_property;
        rr.message = "property check failed";
    }
    rr.output = rr.format == "csv" ? report_csv(r, c.resolved) : report_json(r, c.resolved).dump(2) + "\n";
    return rr;
}

inline RunResult run_file(const std::string& config_path, const std::string& command, const std::string& sub,
                          const std::optional<std::string>& out_path = std::nullopt,
                          const std::optional<std::string>& format = std::nullopt) {
    std::ifstream in(config_path);
    if (!in) return RunResult{exit_validation, "", "cannot open config file '" + config_path + "'"};
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        return RunResult{exit_validation, "", "config is not valid JSON: " + std::string(e.what())};
    }
    return run(cfg, command, sub, out_path, format);
}

} // namespace sturmdisc::cli
