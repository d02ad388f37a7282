#include "pdisk/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "pdisk/cauchy_ops.hpp"
#include "pdisk/kobayashi.hpp"
#include "pdisk/solver.hpp"

namespace pdisk::cli {

using json = nlohmann::json;

namespace {

// Errors that mean the request itself is wrong (exit 1).
class UsageError : public Error {
public:
    using Error::Error;
};

struct Options {
    std::string command;

    std::string catalog = "integrable";
    std::string structure;
    int n = 2;
    double R = 1.0;
    double R1 = 0.0;
    double amplitude = 0.05;
    unsigned long long seed = 1;
    int threads = 0;
    std::string out;
    std::string format = "json";

    std::string p, u, q;
    double R_solve = 0.9;
    std::string scheme = "direct";
    double tol = -1.0;
    double delta = 0.0;
    int max_iterations = 60;
    int n_radial = 32;
    int n_angular = 64;
    int d_max = 16;
    double sweep_ball = 0.0;
    int sweep_grid = 5;

    int samples = -1;
    std::string monomial;

    double probe_radius = 0.0;
    double ball = 0.0;

    std::string method = "both";
    int max_links = 2;
    std::vector<int> levels{1, 2, 4, 8};
    int max_evaluations = 400;

    std::string region = "center";
    int directions = 8;
    double threshold = 1e-3;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

json complex_json(cplx c) { return json::array({c.real(), c.imag()}); }

json vector_json(std::span<const cplx> v) {
    json a = json::array();
    for (cplx c : v) a.push_back(complex_json(c));
    return a;
}

json poly_json(const BiPoly& p) {
    json a = json::array();
    for (int s = 0; s <= p.degree(); ++s)
        for (int m = 0; m <= s; ++m) {
            const cplx c = p.coeff(s - m, m);
            if (c != 0.0) a.push_back(json::array({s - m, m, c.real(), c.imag()}));
        }
    return a;
}

json disk_json(const DiskField& d) {
    json a = json::array();
    for (int i = 0; i < d.components(); ++i) a.push_back(poly_json(d.poly(i)));
    return a;
}

json solve_json(const SolveResult& r) {
    return {{"verdict", to_string(r.verdict)},
            {"scheme", to_string(r.scheme)},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"history", r.history},
            {"diagnostics", r.diagnostics},
            {"fit_error", r.fit_error},
            {"kappa_hat", r.kappa_hat},
            {"tube_distance", r.tube_distance},
            {"rescale_N", r.rescale_N},
            {"tail_index", r.tail_index},
            {"radius", r.disk.components() > 0 ? r.disk.grid().radius() : 0.0},
            {"coefficients", r.disk.components() > 0 ? disk_json(r.disk) : json::array()}};
}

std::vector<cplx> point_or_default(const std::string& text, int n, int unit_index) {
    if (text.empty()) {
        std::vector<cplx> v(static_cast<std::size_t>(n), 0.0);
        if (unit_index >= 0) v[unit_index] = 1.0;
        return v;
    }
    auto v = parse_complex_list(text);
    if (static_cast<int>(v.size()) != n)
        throw UsageError("expected " + std::to_string(n) + " components in '" + text + "'");
    return v;
}

AlmostComplexStructure make_structure(Options& o) {
    if (!o.structure.empty()) {
        auto J = load_structure(o.structure);
        o.n = J.n();
        o.R = J.domain().R;
        o.R1 = J.domain().R1;
        return J;
    }
    if (o.n < 1) throw UsageError("n must be >= 1");
    if (!(o.R > 0.0)) throw UsageError("R must be positive");
    CatalogParams cp;
    cp.n = o.n;
    cp.R = o.R;
    cp.R1 = o.R1;
    cp.amplitude = o.amplitude;
    try {
        auto J = catalog(o.catalog, cp);
        o.R1 = J.domain().R1;
        return J;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

json common_echo(const Options& o) {
    json c = {{"n", o.n}, {"R", o.R}, {"R1", o.R1}, {"format", o.format}};
    if (o.structure.empty()) {
        c["catalog"] = o.catalog;
        c["amplitude"] = o.amplitude;
    } else {
        c["structure"] = o.structure;
    }
    return c;
}

struct Output {
    json result;
    // CSV table: header plus rows
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int code = ok;
};

std::string render(const Options& o, const json& echo, const Output& res) {
    if (o.format == "csv") {
        std::ostringstream os;
        os << "# pdisk " << kVersion << "\n";
        os << "# command " << o.command << "\n";
        os << "# seed " << o.seed << "\n";
        os << "# config " << echo.dump() << "\n";
        for (std::size_t k = 0; k < res.header.size(); ++k) os << (k ? "," : "") << res.header[k];
        os << "\n";
        for (const auto& row : res.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
            os << "\n";
        }
        return os.str();
    }
    json doc = {{"tool", "pdisk"},
                {"version", kVersion},
                {"command", o.command},
                {"seed", o.seed},
                {"config", echo},
                {"result", res.result}};
    return doc.dump(2) + "\n";
}

// ------------------------------------------------------------------ commands

SolveConfig solve_config(const Options& o) {
    SolveConfig sc;
    sc.radius = o.R_solve;
    sc.delta = o.delta;
    sc.residual_tol = o.tol > 0.0 ? o.tol : 1e-8;
    sc.max_iterations = o.max_iterations;
    sc.n_radial = o.n_radial;
    sc.n_angular = o.n_angular;
    sc.d_max = o.d_max;
    try {
        sc.scheme = parse_scheme(o.scheme);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return sc;
}

Output cmd_solve(const AlmostComplexStructure& J, const Options& o, json& echo) {
    const SolveConfig sc = solve_config(o);
    try {
        sc.validate(J.domain());
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const JetCondition jet{point_or_default(o.p, J.n(), -1), point_or_default(o.u, J.n(), 0)};
    echo["p"] = vector_json(jet.p);
    echo["u"] = vector_json(jet.u);
    echo["R_solve"] = sc.radius;
    echo["scheme"] = to_string(sc.scheme);
    echo["tol"] = sc.residual_tol;
    echo["delta"] = o.delta;
    echo["max_iterations"] = sc.max_iterations;
    echo["grid"] = {sc.n_radial, sc.n_angular, sc.d_max};

    Output res;
    if (o.sweep_ball > 0.0) {
        echo["sweep_ball"] = o.sweep_ball;
        echo["sweep_grid"] = o.sweep_grid;
        if (o.sweep_grid < 1) throw UsageError("sweep grid must be >= 1");
        const SweepReport rep = neighborhood_sweep(J, jet.u, o.sweep_ball, sc, o.sweep_grid, o.threads);
        json entries = json::array();
        res.header = {"index"};
        for (int i = 1; i <= J.n(); ++i) {
            res.header.push_back("u" + std::to_string(i) + "_re");
            res.header.push_back("u" + std::to_string(i) + "_im");
        }
        for (const char* h : {"offset", "verdict", "residual", "iterations"}) res.header.emplace_back(h);
        for (std::size_t k = 0; k < rep.entries.size(); ++k) {
            const auto& e = rep.entries[k];
            entries.push_back({{"u", vector_json(e.u)},
                               {"offset", e.offset},
                               {"verdict", to_string(e.verdict)},
                               {"residual", e.residual},
                               {"iterations", e.iterations}});
            std::vector<std::string> row{std::to_string(k)};
            for (cplx c : e.u) {
                row.push_back(fmt(c.real()));
                row.push_back(fmt(c.imag()));
            }
            row.push_back(fmt(e.offset));
            row.push_back(to_string(e.verdict));
            row.push_back(fmt(e.residual));
            row.push_back(std::to_string(e.iterations));
            res.rows.push_back(std::move(row));
        }
        res.result = {{"success_radius", rep.success_radius}, {"failures", rep.failures}, {"entries", entries}};
        res.code = rep.failures == 0 ? ok : not_converged;
        return res;
    }
    const SolveResult r = solve(J, jet, sc);
    res.result = solve_json(r);
    res.header = {"component", "l", "m", "re", "im"};
    for (int i = 0; i < r.disk.components(); ++i) {
        const BiPoly& p = r.disk.poly(i);
        for (int s = 0; s <= p.degree(); ++s)
            for (int m = 0; m <= s; ++m) {
                const cplx c = p.coeff(s - m, m);
                if (c == 0.0) continue;
                res.rows.push_back({std::to_string(i + 1), std::to_string(s - m), std::to_string(m), fmt(c.real()),
                                    fmt(c.imag())});
            }
    }
    res.code = r.converged() ? ok : not_converged;
    return res;
}

struct MonomialSpec {
    int l = 0, m = 0, k = 1;
    bool inf = false;
};

MonomialSpec parse_monomial(const std::string& text) {
    MonomialSpec s;
    std::stringstream ss(text);
    std::string item;
    bool have_l = false, have_m = false;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("monomial: expected key=value in '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        try {
            if (key == "l") {
                s.l = std::stoi(val);
                have_l = true;
            } else if (key == "m") {
                s.m = std::stoi(val);
                have_m = true;
            } else if (key == "k") {
                if (val == "inf") {
                    s.inf = true;
                } else {
                    s.k = std::stoi(val);
                }
            } else {
                throw UsageError("monomial: unknown key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            throw UsageError("monomial: bad value '" + val + "'");
        }
    }
    if (!have_l || !have_m) throw UsageError("monomial: l and m are required");
    if (s.l < 0 || s.m < 0 || s.k < 0) throw UsageError("monomial: negative index");
    return s;
}

// zeta^l zetabar^(m+1)/(m+1), minus R^(2m+2)/(m+1) zeta^(l-m-1) when l >= k+m+2
BiPoly monomial_image(const MonomialSpec& s, double R) {
    BiPoly out(s.l + s.m + 1);
    out.set(s.l, s.m + 1, 1.0 / (s.m + 1));
    if (!s.inf && s.l >= s.k + s.m + 2) out.add(s.l - s.m - 1, 0, -std::pow(R, 2 * s.m + 2) / (s.m + 1));
    return out;
}

double coeff_error(const BiPoly& a, const BiPoly& b) { return (a - b).max_abs(); }

BiPoly random_poly(Rng& rng, int degree) {
    BiPoly p(degree);
    for (int s = 0; s <= degree; ++s)
        for (int m = 0; m <= s; ++m) p.set(s - m, m, rng.in_disk(1.0));
    return p;
}

double sup_nodes(const BiPoly& p, const PolarGrid& g) {
    double s = 0.0;
    for (cplx v : evaluate_on_grid(p, g)) s = std::max(s, std::abs(v));
    return s;
}

Output cmd_operator_check(const Options& o, json& echo) {
    const int samples = o.samples < 0 ? 20 : o.samples;
    const double R = o.R;
    if (!(R > 0.0)) throw UsageError("R must be positive");
    echo = {{"R", R}, {"samples", samples}, {"format", o.format}};
    Output res;

    // monomial table: T_k for k = 0..3 and T_inf on every l + m <= 12
    double table_error = 0.0;
    for (int s = 0; s <= 12; ++s)
        for (int m = 0; m <= s; ++m) {
            for (int k = -1; k <= 3; ++k) {
                MonomialSpec spec{s - m, m, std::max(k, 0), k < 0};
                const BiPoly mono = BiPoly::monomial(spec.l, spec.m);
                const BiPoly got = spec.inf ? apply_Tinf(mono) : apply_Tk(mono, R, spec.k);
                table_error = std::max(table_error, coeff_error(got, monomial_image(spec, R)));
            }
        }
    // T_1 is T up to the constant-free normalization; check T on the same range
    double t_error = 0.0;
    for (int s = 0; s <= 12; ++s)
        for (int m = 0; m <= s; ++m) {
            const BiPoly mono = BiPoly::monomial(s - m, m);
            BiPoly expect(s + 1);
            expect.set(s - m, m + 1, 1.0 / (m + 1));
            if (s - m >= m + 1) expect.add(s - 2 * m - 1, 0, -std::pow(R, 2 * m + 2) / (m + 1));
            t_error = std::max(t_error, coeff_error(apply_T(mono, R), expect));
        }

    // identities on random polynomials of degree <= 10
    Rng rng(o.seed);
    auto grid = PolarGrid::make(R, 12, 64);
    double dbar_T = 0.0, dbar_S = 0.0, S_T = 0.0, pompeiu = 0.0;
    for (int k = 0; k < samples; ++k) {
        const BiPoly f = random_poly(rng, 1 + k % 10);
        const double scale = std::max(1.0, f.max_abs());
        const BiPoly Tf = apply_T(f, R);
        dbar_T = std::max(dbar_T, coeff_error(Tf.dbar(), f) / scale);
        const DiskField Sf = op_S(DiskField(grid, {f}));
        dbar_S = std::max(dbar_S, sup_nodes(Sf.poly(0).dbar(), *grid) / scale);
        const DiskField STf = op_S(DiskField(grid, {Tf}));
        S_T = std::max(S_T, sup_nodes(STf.poly(0), *grid) / scale);
        const BiPoly rebuilt = Sf.poly(0) + apply_T(f.dbar(), R);
        pompeiu = std::max(pompeiu, sup_nodes(rebuilt - f, *grid) / scale);
    }

    const OperatorBoundEstimate b = estimate_bounds(o.seed, samples);
    json bounds = {{"sample_count", b.sample_count}};
    if (b.sample_count > 0) {
        bounds["c1_hat"] = b.c1_hat;
        bounds["c2_hat"] = b.c2_hat;
        bounds["C_hat"] = b.C_hat;
        bounds["mu_hat"] = b.mu_hat;
    }
    const double worst = std::max({table_error, t_error, dbar_T, dbar_S, S_T, pompeiu});
    res.result = {{"identities",
                   {{"dbar_T_minus_id", dbar_T}, {"dbar_S", dbar_S}, {"S_T", S_T}, {"pompeiu", pompeiu}}},
                  {"monomial_table_error", table_error},
                  {"T_table_error", t_error},
                  {"pass", worst <= 1e-8},
                  {"bounds", bounds}};
    res.header = {"check", "error"};
    res.rows = {{"dbar_T_minus_id", fmt(dbar_T)}, {"dbar_S", fmt(dbar_S)},
                {"S_T", fmt(S_T)},                {"pompeiu", fmt(pompeiu)},
                {"monomial_table", fmt(table_error)}, {"T_table", fmt(t_error)}};

    if (!o.monomial.empty()) {
        const MonomialSpec spec = parse_monomial(o.monomial);
        echo["monomial"] = o.monomial;
        const BiPoly mono = BiPoly::monomial(spec.l, spec.m);
        const BiPoly got = spec.inf ? apply_Tinf(mono) : apply_Tk(mono, R, spec.k);
        const BiPoly expect = monomial_image(spec, R);
        const double err = coeff_error(got, expect);
        res.result["monomial"] = {{"l", spec.l},
                                  {"m", spec.m},
                                  {"k", spec.inf ? json("inf") : json(spec.k)},
                                  {"image", poly_json(got)},
                                  {"expected", poly_json(expect)},
                                  {"error", err},
                                  {"exact", err == 0.0}};
        res.rows.push_back({"monomial", fmt(err)});
    }
    return res;
}

KobayashiConfig kobayashi_config(const Options& o) {
    KobayashiConfig kc;
    if (o.tol > 0.0) kc.tol = o.tol;
    kc.probe_radius = o.probe_radius;
    kc.threads = o.threads;
    return kc;
}

json estimate_json(const PseudonormEstimate& e) {
    json probes = json::array();
    for (const auto& pr : e.probes)
        probes.push_back({{"radius", pr.radius}, {"success", pr.success}, {"diagnostics", pr.diagnostics}});
    return {{"value", e.value},   {"r_lo", e.r_lo},         {"r_hi", e.r_hi},
            {"r_star", e.r_star}, {"p", vector_json(e.v.p)}, {"u", vector_json(e.v.u)},
            {"probes", probes},   {"witness", solve_json(e.witness)}};
}

Output cmd_pseudonorm(const AlmostComplexStructure& J, const Options& o, json& echo) {
    const KobayashiConfig kc = kobayashi_config(o);
    const TangentVector v{point_or_default(o.p, J.n(), -1), point_or_default(o.u, J.n(), 0)};
    echo["p"] = vector_json(v.p);
    echo["v"] = vector_json(v.u);
    echo["tol"] = kc.tol;
    echo["probe_radius"] = kc.probe_radius;
    Output res;
    const PseudonormEstimate e = pseudonorm(J, v, kc);
    res.result = estimate_json(e);
    res.header = {"index", "radius", "success"};
    for (std::size_t k = 0; k < e.probes.size(); ++k)
        res.rows.push_back({std::to_string(k), fmt(e.probes[k].radius), e.probes[k].success ? "1" : "0"});
    if (o.ball > 0.0) {
        const int samples = o.samples < 0 ? 16 : o.samples;
        echo["ball"] = o.ball;
        echo["samples"] = samples;
        const SemicontinuityReport rep = semicontinuity_probe(J, v, o.ball, samples, o.seed, kc);
        json vals = json::array();
        for (std::size_t k = 0; k < rep.samples.size(); ++k)
            vals.push_back({{"p", vector_json(rep.samples[k].p)},
                            {"u", vector_json(rep.samples[k].u)},
                            {"value", rep.values[k]}});
        res.result["semicontinuity"] = {
            {"base_value", rep.base_value}, {"excess", rep.excess}, {"samples", vals}};
    }
    return res;
}

json distance_json(const DistanceResult& d) {
    json path = json::array();
    for (const auto& x : d.path) path.push_back(vector_json(x));
    json links = json::array();
    for (const auto& l : d.links)
        links.push_back({{"from", vector_json(l.from)},
                         {"to", vector_json(l.to)},
                         {"direction", vector_json(l.direction)},
                         {"w", complex_json(l.w)},
                         {"cost", l.cost},
                         {"matched", l.matched}});
    return {{"value", d.value}, {"method", d.method},       {"verdict", d.verdict}, {"level", d.level},
            {"path", path},     {"links", links},           {"level_values", d.level_values}};
}

Output cmd_distance(const AlmostComplexStructure& J, const Options& o, json& echo) {
    const KobayashiConfig kc = kobayashi_config(o);
    const auto p = point_or_default(o.p, J.n(), -1);
    const auto q = point_or_default(o.q, J.n(), -1);
    if (o.method != "path" && o.method != "chain" && o.method != "both")
        throw UsageError("unknown method: " + o.method);
    if (o.max_links < 1) throw UsageError("max-links must be >= 1");
    PathConfig pc;
    pc.levels = o.levels;
    pc.max_evaluations = o.max_evaluations;
    echo["p"] = vector_json(p);
    echo["q"] = vector_json(q);
    echo["method"] = o.method;
    echo["tol"] = kc.tol;
    echo["levels"] = pc.levels;
    echo["max_evaluations"] = pc.max_evaluations;
    echo["max_links"] = o.max_links;

    Output res;
    res.header = {"method", "value", "level", "verdict"};
    std::optional<DistanceResult> path, chain;
    if (o.method != "chain") {
        path = path_distance(J, p, q, pc, kc);
        res.result["path"] = distance_json(*path);
        res.rows.push_back({"path_integral", fmt(path->value), std::to_string(path->level), path->verdict});
    }
    if (o.method != "path") {
        chain = chain_distance(J, p, q, o.max_links, kc, path ? path->path : std::vector<std::vector<cplx>>{});
        res.result["chain"] = distance_json(*chain);
        res.rows.push_back({"chain", fmt(chain->value), std::to_string(chain->level), chain->verdict});
        if (chain->verdict != "ok") res.code = no_disk;
    }
    if (path && chain && chain->verdict == "ok") {
        const double scale = std::max(path->value, chain->value);
        res.result["relative_gap"] = scale > 0.0 ? std::abs(path->value - chain->value) / scale : 0.0;
    }
    return res;
}

Output cmd_hyperbolicity(const AlmostComplexStructure& J, const Options& o, json& echo) {
    const KobayashiConfig kc = kobayashi_config(o);
    echo["region"] = o.region;
    echo["directions"] = o.directions;
    echo["threshold"] = o.threshold;
    echo["tol"] = kc.tol;
    if (o.directions < 1) throw UsageError("directions must be >= 1");
    if (o.region != "center" && o.region != "full") throw UsageError("unknown region: " + o.region);
    const HyperbolicityReport rep = hyperbolicity_scan(J, o.region, o.directions, o.seed, kc, o.threshold);
    Output res;
    json entries = json::array();
    res.header = {"index"};
    for (int i = 1; i <= J.n(); ++i) {
        res.header.push_back("p" + std::to_string(i) + "_re");
        res.header.push_back("p" + std::to_string(i) + "_im");
    }
    for (int i = 1; i <= J.n(); ++i) {
        res.header.push_back("u" + std::to_string(i) + "_re");
        res.header.push_back("u" + std::to_string(i) + "_im");
    }
    res.header.emplace_back("value");
    for (std::size_t k = 0; k < rep.entries.size(); ++k) {
        const auto& e = rep.entries[k];
        entries.push_back({{"p", vector_json(e.v.p)}, {"u", vector_json(e.v.u)}, {"value", e.value}});
        std::vector<std::string> row{std::to_string(k)};
        for (cplx c : e.v.p) {
            row.push_back(fmt(c.real()));
            row.push_back(fmt(c.imag()));
        }
        for (cplx c : e.v.u) {
            row.push_back(fmt(c.real()));
            row.push_back(fmt(c.imag()));
        }
        row.push_back(fmt(e.value));
        res.rows.push_back(std::move(row));
    }
    res.result = {{"min", rep.min_value},         {"max", rep.max_value}, {"c_k", rep.c_k},
                  {"verdict", rep.verdict},       {"threshold", rep.threshold}, {"entries", entries}};
    return res;
}

void add_structure_options(CLI::App* app, Options& o) {
    app->add_option("--catalog", o.catalog, "catalog structure: integrable, product-disk, perturbed, linear-transverse");
    app->add_option("--structure", o.structure, "structure file (JSON)");
    app->add_option("--n", o.n, "complex dimension");
    app->add_option("--R", o.R, "radius of the first factor");
    app->add_option("--R1", o.R1, "radius of the transverse factors (0: R/10)");
    app->add_option("--amplitude", o.amplitude, "perturbation amplitude");
}

void add_output_options(CLI::App* app, Options& o) {
    app->add_option("--seed", o.seed, "random seed");
    app->add_option("--threads", o.threads, "worker threads (default: PDISK_THREADS or hardware)");
    app->add_option("--out", o.out, "output file (default: stdout)");
    app->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

std::vector<cplx> parse_complex_list(const std::string& text) {
    std::vector<cplx> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        try {
            std::size_t used = 0;
            const double re = std::stod(item.substr(0, colon), &used);
            if (used != (colon == std::string::npos ? item.size() : colon)) throw std::invalid_argument(item);
            double im = 0.0;
            if (colon != std::string::npos) {
                const std::string rest = item.substr(colon + 1);
                im = std::stod(rest, &used);
                if (used != rest.size()) throw std::invalid_argument(item);
            }
            out.emplace_back(re, im);
        } catch (const std::logic_error&) {
            throw UsageError("bad complex number '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("empty complex list");
    return out;
}

AlmostComplexStructure parse_structure(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("structure file: ") + e.what());
    }
    auto field = [](const json& obj, const std::string& key, const std::string& where) -> const json& {
        if (!obj.is_object() || !obj.contains(key)) throw UsageError("structure file: missing field '" + where + "'");
        return obj.at(key);
    };
    auto number = [&](const json& obj, const std::string& key, const std::string& where) {
        const json& v = field(obj, key, where);
        if (!v.is_number()) throw UsageError("structure file: field '" + where + "' must be a number");
        return v.get<double>();
    };
    auto integer = [&](const json& obj, const std::string& key, const std::string& where) {
        const json& v = field(obj, key, where);
        if (!v.is_number_integer()) throw UsageError("structure file: field '" + where + "' must be an integer");
        return v.get<int>();
    };
    const int n = integer(doc, "n", "n");
    ModelDomain dom{number(doc, "R", "R"), number(doc, "R1", "R1"), n};
    try {
        dom.validate();
    } catch (const Error& e) {
        throw UsageError(std::string("structure file: ") + e.what());
    }
    const json& terms = field(doc, "terms", "terms");
    if (!terms.is_array()) throw UsageError("structure file: field 'terms' must be an array");
    std::vector<PolyTerm> out;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const std::string at = "terms[" + std::to_string(k) + "]";
        const json& t = terms[k];
        PolyTerm pt;
        pt.i = integer(t, "i", at + ".i") - 1;
        pt.mbar = integer(t, "mbar", at + ".mbar") - 1;
        if (pt.i < 0 || pt.i >= n) throw UsageError("structure file: field '" + at + ".i' out of range 1.." + std::to_string(n));
        if (pt.mbar < 0 || pt.mbar >= n)
            throw UsageError("structure file: field '" + at + ".mbar' out of range 1.." + std::to_string(n));
        for (const char* key : {"alpha", "beta"}) {
            const std::string where = at + "." + key;
            const json& a = field(t, key, where);
            if (!a.is_array() || static_cast<int>(a.size()) != n)
                throw UsageError("structure file: field '" + where + "' must be an array of " + std::to_string(n) +
                                 " integers");
            std::vector<int> e;
            for (const auto& x : a) {
                if (!x.is_number_integer() || x.get<int>() < 0)
                    throw UsageError("structure file: field '" + where + "' must hold nonnegative integers");
                e.push_back(x.get<int>());
            }
            (std::string(key) == "alpha" ? pt.alpha : pt.beta) = std::move(e);
        }
        pt.c = cplx(number(t, "re", at + ".re"), number(t, "im", at + ".im"));
        out.push_back(std::move(pt));
    }
    return polynomial_structure(dom, std::move(out), "structure-file");
}

AlmostComplexStructure load_structure(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open structure file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_structure(ss.str());
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw UsageError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw UsageError("cannot rename into " + path + ": " + ec.message());
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    o.threads = default_thread_count();
    CLI::App app{"pdisk: pseudoholomorphic disks, Kobayashi-Royden pseudonorm and pseudodistances"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    auto* solve_cmd = app.add_subcommand("solve", "solve for a disk through a jet");
    add_structure_options(solve_cmd, o);
    add_output_options(solve_cmd, o);
    solve_cmd->add_option("--p", o.p, "center point, comma-separated re[:im]");
    solve_cmd->add_option("--u,--v", o.u, "derivative at the center");
    solve_cmd->add_option("--R-solve", o.R_solve, "radius of the parameter disk");
    solve_cmd->add_option("--scheme", o.scheme, "direct or layered");
    solve_cmd->add_option("--tol", o.tol, "residual tolerance");
    solve_cmd->add_option("--delta", o.delta, "tube radius around the initial disk (0: R1/10)");
    solve_cmd->add_option("--max-iterations", o.max_iterations);
    solve_cmd->add_option("--n-radial", o.n_radial);
    solve_cmd->add_option("--n-angular", o.n_angular);
    solve_cmd->add_option("--d-max", o.d_max);
    solve_cmd->add_option("--sweep-ball", o.sweep_ball, "solve a grid of jets in this ball around u instead");
    solve_cmd->add_option("--sweep-grid", o.sweep_grid);

    auto* op_cmd = app.add_subcommand("operator-check", "check the Cauchy-Green operator identities");
    op_cmd->add_option("--R", o.R, "disk radius");
    op_cmd->add_option("--samples", o.samples, "random polynomials (default 20)");
    op_cmd->add_option("--monomial", o.monomial, "l=..,m=..,k=.. (k=inf for T_inf)");
    add_output_options(op_cmd, o);

    auto* pn_cmd = app.add_subcommand("pseudonorm", "estimate the Kobayashi-Royden pseudonorm");
    add_structure_options(pn_cmd, o);
    add_output_options(pn_cmd, o);
    pn_cmd->add_option("--p", o.p, "base point");
    pn_cmd->add_option("--v,--u", o.u, "tangent vector");
    pn_cmd->add_option("--tol", o.tol, "relative bracket width (default 1e-2)");
    pn_cmd->add_option("--probe-radius", o.probe_radius, "parameter disk radius for probes (0: R/2)");
    pn_cmd->add_option("--ball", o.ball, "semicontinuity probe radius (0: off)");
    pn_cmd->add_option("--samples", o.samples, "semicontinuity samples (default 16)");

    auto* dist_cmd = app.add_subcommand("distance", "path-integral and chain pseudodistances");
    add_structure_options(dist_cmd, o);
    add_output_options(dist_cmd, o);
    dist_cmd->add_option("--p", o.p, "first point");
    dist_cmd->add_option("--q", o.q, "second point");
    dist_cmd->add_option("--method", o.method, "path, chain or both");
    dist_cmd->add_option("--tol", o.tol, "pseudonorm tolerance (default 1e-2)");
    dist_cmd->add_option("--levels", o.levels, "path segment counts")->delimiter(',');
    dist_cmd->add_option("--max-evaluations", o.max_evaluations, "pattern-search budget per level");
    dist_cmd->add_option("--max-links", o.max_links, "longest chain");

    auto* hyp_cmd = app.add_subcommand("hyperbolicity", "scan the pseudonorm over unit vectors");
    add_structure_options(hyp_cmd, o);
    add_output_options(hyp_cmd, o);
    hyp_cmd->add_option("--region", o.region, "center or full");
    hyp_cmd->add_option("--directions", o.directions, "directions per base point");
    hyp_cmd->add_option("--threshold", o.threshold, "hyperbolicity evidence threshold");
    hyp_cmd->add_option("--tol", o.tol, "pseudonorm tolerance (default 1e-2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }
    o.command = app.get_subcommands().front()->get_name();
    if (o.threads < 1) o.threads = 1;

    const auto t0 = std::chrono::steady_clock::now();
    Output res;
    json echo;
    try {
        if (o.command == "operator-check") {
            res = cmd_operator_check(o, echo);
        } else {
            const AlmostComplexStructure J = make_structure(o);
            echo = common_echo(o);
            if (o.command == "solve") {
                res = cmd_solve(J, o, echo);
            } else if (o.command == "pseudonorm") {
                res = cmd_pseudonorm(J, o, echo);
            } else if (o.command == "distance") {
                res = cmd_distance(J, o, echo);
            } else {
                res = cmd_hyperbolicity(J, o, echo);
            }
        }
    } catch (const UsageError& e) {
        err << "pdisk: " << e.what() << "\n";
        return usage;
    } catch (const Error& e) {
        err << "pdisk: " << e.what() << "\n";
        return std::string(e.what()) == "no disk found" ? no_disk : usage;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string text = render(o, echo, res);
    try {
        if (o.out.empty()) {
            out << text;
            err << "wall time " << wall << " s\n";
        } else {
            write_atomic(o.out, text);
            write_atomic(o.out + ".timing.json", json{{"wall_seconds", wall}, {"threads", o.threads}}.dump(2) + "\n");
        }
    } catch (const Error& e) {
        err << "pdisk: " << e.what() << "\n";
        return usage;
    }
    return res.code;
}

}  // namespace pdisk::cli
