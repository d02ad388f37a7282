// Acceptance suite: one PASS/FAIL line per criterion.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pdisk/cauchy_ops.hpp"
#include "pdisk/kobayashi.hpp"
#include "pdisk/solver.hpp"

using namespace pdisk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt(secs) + " s";
    if (time_limit > 0) {
        timing += " (limit " + fmt(time_limit) + " s)";
        pass = pass && secs < time_limit;
    }
    if (!pass) ++failures;
    std::printf("[%s] %2d %s: %s; %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
}

BiPoly random_poly(Rng& rng, int degree) {
    BiPoly p(degree);
    for (int s = 0; s <= degree; ++s)
        for (int m = 0; m <= s; ++m) p.set(s - m, m, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
    return p;
}

int hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

AlmostComplexStructure product(double R, double R1) {
    return catalog("integrable", {.n = 2, .R = R, .R1 = R1});
}

Outcome operator_exactness() {
    double worst = 0.0;
    const double R = 1.0;
    auto grid = PolarGrid::make(R, 16, 32);
    BiPoly t1z3 = BiPoly::monomial(3, 1);
    t1z3.set(2, 0, -R * R);
    worst = std::max(worst, max_coeff_diff(op_Tk(DiskField(grid, {BiPoly::monomial(3, 0)}), 1).poly(0), t1z3));
    worst = std::max(worst, max_coeff_diff(op_Tk(DiskField(grid, {BiPoly::constant(1.0)}), 1).poly(0),
                                           BiPoly::monomial(0, 1)));
    for (int s = 0; s <= 12; ++s)
        for (int m = 0; m <= s; ++m) {
            const int l = s - m;
            const BiPoly expect = BiPoly::monomial(l, m + 1, 1.0 / (m + 1));
            worst = std::max(worst, max_coeff_diff(apply_Tinf(BiPoly::monomial(l, m)), expect));
        }
    return {worst <= 1e-12, "max coefficient error " + fmt(worst) + " <= 1e-12"};
}

Outcome operator_identities() {
    Rng rng(2024);
    auto grid = PolarGrid::make(1.0, 16, 64);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int degree = trial % 11;
        DiskField f(grid, {random_poly(rng, degree)});
        const DiskField tf = op_T(f);
        const DiskField sf = op_S(f);
        worst = std::max(worst, max_coeff_diff(dbar(tf).poly(0), f.poly(0)));
        worst = std::max(worst, dbar(sf).poly(0).max_abs());
        worst = std::max(worst, op_S(tf).poly(0).max_abs());
        worst = std::max(worst, max_coeff_diff((sf + op_T(dbar(f))).poly(0), f.poly(0)));
    }
    return {worst <= 1e-8, "max residual " + fmt(worst) + " <= 1e-8 over 100 polynomials"};
}

Outcome norm_inequality() {
    Rng rng(7);
    int violations = 0;
    double worst = 0.0;
    const double radii[] = {0.5, 1.0, 2.0, 4.0};
    for (int trial = 0; trial < 200; ++trial) {
        const double R = radii[trial % 4];
        auto grid = PolarGrid::make(R, 10, 20);
        BiPoly p = random_poly(rng, 1 + trial % 8);
        p.set(0, 0, 0.0);
        DiskField f(grid, {p});
        const double ratio = b_norm(f, 0.5) / (6.0 * R * prime_norm(f, 0.5));
        worst = std::max(worst, ratio);
        if (ratio > 1.05) ++violations;
    }
    return {violations == 0,
            std::to_string(violations) + " violations beyond 5% margin, max ratio " + fmt(worst)};
}

Outcome integrable_solve() {
    const auto J = catalog("integrable", {.n = 2});
    JetCondition jet{{cplx(0.1, 0.05), cplx(-0.02, 0.01)}, {cplx(0.7, -0.2), cplx(0.05, 0.03)}};
    SolveConfig cfg;
    auto grid = PolarGrid::make(cfg.radius, cfg.n_radial, cfg.n_angular);
    const DiskField z0 = DiskField::zero(grid, 2);
    const DiskField z1 = picard_step(z0, J, jet);
    double gap = 0.0;
    for (int i = 0; i < 2; ++i) {
        BiPoly affine = BiPoly::constant(jet.p[i]);
        affine.set(1, 0, jet.u[i]);
        gap = std::max(gap, max_coeff_diff(z1.poly(i), affine));
    }
    const double res = residual(z1, J);
    return {gap <= 1e-12 && res <= 1e-12,
            "distance to p + u zeta " + fmt(gap) + ", residual " + fmt(res) + " <= 1e-12"};
}

Outcome theorem1_sweep() {
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 0.1, .amplitude = 0.05});
    SolveConfig cfg;
    cfg.radius = 0.9;
    const cplx v0[] = {1.0, 0.0};
    const auto rep = neighborhood_sweep(J, v0, 0.05, cfg, 5, hardware_threads());
    double worst = 0.0;
    for (const auto& e : rep.entries) worst = std::max(worst, e.residual);
    const bool ok = rep.entries.size() == 25 && rep.failures == 0 && worst <= 1e-6 && rep.success_radius > 0.0;
    return {ok, std::to_string(rep.entries.size() - rep.failures) + "/" + std::to_string(rep.entries.size()) +
                    " converged, max residual " + fmt(worst) + " <= 1e-6, success radius " + fmt(rep.success_radius)};
}

Outcome linear_model() {
    const double alpha = 0.3;
    auto A = LinearModel::zero(2);
    A.anti(1, 1) = BiPoly::constant(alpha);
    const cplx v2(0.4, -0.2);
    const cplx v[] = {0.0, v2};
    const auto r = linear_model_solve(A, v);
    BiPoly first = BiPoly::monomial(1, 0, v2);
    first.set(0, 2, -alpha * std::conj(v2) / 2.0);
    const double first_gap = r.iterates.size() > 1 ? max_coeff_diff(r.iterates[1][1], first) : 1.0;
    double worst_ratio = 0.0;
    for (std::size_t k = 5; k + 1 < r.differences.size(); ++k) {
        if (r.differences[k] < 1e-14) break;
        worst_ratio = std::max(worst_ratio, r.differences[k + 1] / r.differences[k]);
    }
    const bool ok = r.verdict == Verdict::converged && first_gap == 0.0 && worst_ratio <= 0.5;
    return {ok, "first iterate gap " + fmt(first_gap) + " == 0, max ratio beyond step 5 " + fmt(worst_ratio) +
                    " <= 0.5, " + std::to_string(r.differences.size()) + " steps"};
}

Outcome pseudonorm_disk() {
    const auto J = catalog("integrable", {.n = 1, .R = 1.0});
    const double f = pseudonorm(J, {{0.0}, {1.0}}).value;
    return {std::abs(f - 1.0) <= 0.01, "F = " + fmt(f) + ", oracle 1 within 1%"};
}

Outcome pseudonorm_product() {
    const double f = pseudonorm(product(1.0, 0.5), {{0.0, 0.0}, {1.0, 1.0}}).value;
    return {std::abs(f - 2.0) <= 0.05 * 2.0, "F = " + fmt(f) + ", oracle 2 within 5%"};
}

Outcome poincare_path() {
    const auto J = catalog("integrable", {.n = 1, .R = 1.0});
    const std::vector<cplx> p{0.0}, q{0.5};
    const double d = path_distance(J, p, q).value;
    const double oracle = std::atanh(0.5);
    return {std::abs(d - oracle) <= 0.03 * oracle, "d = " + fmt(d) + ", arctanh(0.5) = " + fmt(oracle) + " within 3%"};
}

Outcome chain_vs_path() {
    KobayashiConfig cfg;
    cfg.threads = hardware_threads();
    double worst = 0.0;
    int bad = 0;
    auto compare = [&](const AlmostComplexStructure& J, const std::vector<cplx>& p, const std::vector<cplx>& q) {
        const auto path = path_distance(J, p, q, {}, cfg);
        const auto chain = chain_distance(J, p, q, 2, cfg, path.path);
        const double gap = std::abs(chain.value - path.value) / std::max(chain.value, path.value);
        worst = std::max(worst, gap);
        if (chain.verdict != "ok" || gap > 0.05) ++bad;
    };
    Rng rng(31);
    const auto flat = product(1.0, 1.0);
    for (int k = 0; k < 5; ++k) compare(flat, {rng.in_disk(0.6), rng.in_disk(0.6)}, {rng.in_disk(0.6), rng.in_disk(0.6)});
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0, .amplitude = 0.05});
    for (int k = 0; k < 3; ++k) compare(J, {rng.in_disk(0.5), rng.in_disk(0.5)}, {rng.in_disk(0.5), rng.in_disk(0.5)});
    return {bad == 0, std::to_string(8 - bad) + "/8 pairs agree, max relative gap " + fmt(worst) + " <= 0.05"};
}

Outcome pseudodistance_axioms() {
    const auto J = product(1.0, 1.0);
    KobayashiConfig cfg;
    cfg.threads = hardware_threads();
    PathConfig pc;
    pc.levels = {1, 2, 4};
    Rng rng(47);
    double worst_sym = 0.0, worst_tri = -1e300;
    bool ok = true;
    for (int k = 0; k < 10; ++k) {
        const std::vector<cplx> a{rng.in_disk(0.5), rng.in_disk(0.5)}, b{rng.in_disk(0.5), rng.in_disk(0.5)},
            c{rng.in_disk(0.5), rng.in_disk(0.5)};
        const double ab = path_distance(J, a, b, pc, cfg).value;
        const double ba = path_distance(J, b, a, pc, cfg).value;
        const double bc = path_distance(J, b, c, pc, cfg).value;
        const double ac = path_distance(J, a, c, pc, cfg).value;
        const double sym = std::abs(ab - ba) / std::max({ab, ba, 1e-300});
        const double tri = ac - (ab + bc);
        worst_sym = std::max(worst_sym, sym);
        worst_tri = std::max(worst_tri, tri);
        ok = ok && sym <= cfg.tol && tri <= 2.0 * cfg.tol;
    }
    return {ok, "max relative asymmetry " + fmt(worst_sym) + " <= " + fmt(cfg.tol) + ", max triangle excess " +
                    fmt(worst_tri) + " <= " + fmt(2.0 * cfg.tol)};
}

Outcome semicontinuity() {
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0, .amplitude = 0.05});
    KobayashiConfig cfg;
    cfg.threads = hardware_threads();
    const TangentVector v0{{0.0, 0.0}, {1.0, 0.3}};
    const auto rep = semicontinuity_probe(J, v0, 0.02, 24, 11, cfg);
    return {rep.excess <= 0.05 * rep.base_value,
            "excess " + fmt(rep.excess) + " <= 5% of F(v0) = " + fmt(rep.base_value) + " over 24 samples"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("pdisk_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"hyper", "hyperbolicity --catalog perturbed --R1 1 --region full --directions 3 --seed 7"},
        {"semi", "pseudonorm --catalog perturbed --R1 1 --v 1,0.3 --ball 0.02 --samples 6 --seed 5"},
        {"sweep", "solve --catalog perturbed --u 1,0.02 --sweep-ball 0.01 --sweep-grid 3 --format csv"},
        {"chain", "distance --method chain --catalog perturbed --R1 1 --p 0.1,-0.2 --q -0.3,0.4"},
    };
    int mismatches = 0, errors = 0;
    for (const auto& [tag, args] : commands) {
        std::vector<std::string> blobs;
        for (const auto& [run, threads] : {std::pair{"a", "1"}, std::pair{"b", "1"}, std::pair{"c", "8"}}) {
            const fs::path out = dir / (tag + "_" + run + ".out");
            const std::string cmd = std::string(PDISK_CLI_PATH) + " " + args + " --threads " + threads + " --out " +
                                    out.string() + " 2> /dev/null";
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++errors;
            blobs.push_back(slurp(out));
        }
        if (blobs[0].empty() || blobs[0] != blobs[1] || blobs[0] != blobs[2]) ++mismatches;
    }
    fs::remove_all(dir);
    return {mismatches == 0 && errors == 0, std::to_string(commands.size() - mismatches) + "/" +
                                                std::to_string(commands.size()) +
                                                " commands bit-identical across reruns and threads 1 vs 8, " +
                                                std::to_string(errors) + " failed runs"};
}

}  // namespace

int main() {
    criterion(1, "operator exactness", 1.0, operator_exactness);
    criterion(2, "operator identities", 10.0, operator_identities);
    criterion(3, "norm inequality", 30.0, norm_inequality);
    criterion(4, "integrable solve in one step", 0.0, integrable_solve);
    criterion(5, "existence sweep around v0", 120.0, theorem1_sweep);
    criterion(6, "linear transverse model", 5.0, linear_model);
    criterion(7, "pseudonorm on D_1", 120.0, pseudonorm_disk);
    criterion(7, "pseudonorm on D_1 x D_0.5", 120.0, pseudonorm_product);
    criterion(8, "Poincare distance by paths", 0.0, poincare_path);
    criterion(9, "chain vs path distance", 600.0, chain_vs_path);
    criterion(10, "pseudodistance axioms", 0.0, pseudodistance_axioms);
    criterion(11, "upper semicontinuity", 0.0, semicontinuity);
    criterion(12, "determinism", 0.0, determinism);
    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
