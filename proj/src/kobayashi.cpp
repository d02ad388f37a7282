#include "pdisk/kobayashi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdisk {

double poincare_metric(cplx z, cplx v) {
    const double r2 = std::norm(z);
    if (!(r2 < 1.0)) throw Error("boundary point");
    return std::abs(v) / (1.0 - r2);
}

double poincare_distance(cplx z, cplx w) {
    if (!(std::norm(z) < 1.0) || !(std::norm(w) < 1.0)) throw Error("boundary point");
    return std::atanh(std::abs((z - w) / (1.0 - std::conj(z) * w)));
}

SolveConfig KobayashiConfig::coarse_solve() {
    SolveConfig c;
    c.n_radial = 16;
    c.n_angular = 48;
    c.d_max = 20;
    // large disks near the boundary fit no better than ~1e-8 on this grid;
    // a tighter tolerance turns that floor into false divergence
    c.residual_tol = 1e-6;
    c.max_iterations = 40;
    return c;
}

namespace {

double rho(const ModelDomain& d, int i) { return i == 0 ? d.R : d.R1; }

double probe_radius_of(const AlmostComplexStructure& J, const KobayashiConfig& cfg) {
    return cfg.probe_radius > 0.0 ? cfg.probe_radius : 0.5 * J.domain().R;
}

}  // namespace

double moebius_radius(const ModelDomain& domain, std::span<const cplx> p, std::span<const cplx> u) {
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < domain.n; ++i) {
        const double rh = rho(domain, i);
        if (!(std::abs(p[i]) < rh)) throw Error("point outside domain");
        if (u[i] == 0.0) continue;
        r = std::min(r, (rh * rh - std::norm(p[i])) / (rh * std::abs(u[i])));
    }
    return r;
}

std::vector<BiPoly> moebius_seed(const ModelDomain& domain, std::span<const cplx> p, std::span<const cplx> u,
                                 double r, double probe_radius) {
    std::vector<BiPoly> out;
    for (int i = 0; i < domain.n; ++i) {
        const double rh = rho(domain, i);
        const cplx q = p[i] / rh;
        const double aq = std::abs(q);
        if (!(aq < 1.0)) throw Error("point outside domain");
        const cplx s = u[i] * rh / (rh * rh - std::norm(p[i])) * (r / probe_radius);
        int degree = 1;
        if (u[i] != 0.0 && aq > 0.0) degree = std::clamp(static_cast<int>(std::ceil(std::log(1e-13) / std::log(aq))) + 1, 1, 96);
        BiPoly b(u[i] == 0.0 ? 0 : degree);
        b.set(0, 0, p[i]);
        if (u[i] != 0.0) {
            // rho M_q(s zeta) = rho q + rho (1 - |q|^2) sum_k (-conj q)^(k-1) s^k zeta^k
            cplx term = rh * (1.0 - aq * aq) * s;
            for (int k = 1; k <= degree; ++k) {
                b.set(k, 0, term);
                term *= -std::conj(q) * s;
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

PseudonormEstimate pseudonorm(const AlmostComplexStructure& J, const TangentVector& v, const KobayashiConfig& cfg) {
    const int n = J.n();
    if (static_cast<int>(v.p.size()) != n || static_cast<int>(v.u.size()) != n)
        throw Error("tangent vector has wrong size");
    if (!(cfg.tol > 0.0)) throw Error("tol must be positive");
    const ModelDomain& dom = J.domain();
    PseudonormEstimate est;
    est.v = v;
    const double rs = probe_radius_of(J, cfg);

    double norm = 0.0;
    for (cplx c : v.u) norm = std::hypot(norm, std::abs(c));
    if (norm == 0.0) {
        SolveConfig sc = cfg.solve;
        sc.radius = rs;
        sc.delta = std::numeric_limits<double>::infinity();
        est.witness = solve_direct(J, JetCondition{v.p, v.u}, sc);
        est.r_lo = est.r_hi = std::numeric_limits<double>::infinity();
        return est;
    }
    std::vector<cplx> uhat(v.u);
    for (auto& c : uhat) c /= norm;
    est.r_star = moebius_radius(dom, v.p, uhat);
    const bool p_zero = std::all_of(v.p.begin(), v.p.end(), [](cplx c) { return c == 0.0; });

    SolveResult best;
    auto probe = [&](double r) {
        SolveConfig sc = cfg.solve;
        sc.radius = rs;
        sc.delta = std::numeric_limits<double>::infinity();
        sc.scheme = Scheme::direct;
        sc.seed = moebius_seed(dom, v.p, uhat, r, rs);
        SolveResult res = solve_direct(J, JetCondition{}, sc);
        if (!res.converged() && cfg.layered_retry && p_zero && n >= 2 && !J.integrable()) {
            SolveConfig lc = cfg.solve;
            lc.radius = rs;
            lc.delta = std::numeric_limits<double>::infinity();
            lc.scheme = Scheme::layered;
            std::vector<cplx> ur(uhat);
            for (auto& c : ur) c *= r / rs;
            SolveResult alt = solve_layered(J, JetCondition::at_origin(ur), lc);
            if (alt.converged()) res = std::move(alt);
        }
        est.probes.push_back({r, res.converged(), res.diagnostics});
        if (res.converged()) best = std::move(res);
        return est.probes.back().success;
    };

    // exponential search in log radius from the start, step factors (1 + tol)^(2^k)
    const double start = cfg.radius_hint > 0.0 ? cfg.radius_hint : est.r_star;
    double lo = 0.0, hi = 0.0;
    double factor = 1.0 + cfg.tol;
    if (probe(start)) {
        lo = start;
        hi = std::numeric_limits<double>::infinity();
        while (static_cast<int>(est.probes.size()) < cfg.max_probes && factor < 1e6) {
            const double r = lo * factor;
            if (!probe(r)) {
                hi = r;
                break;
            }
            lo = r;
            factor *= factor;
        }
    } else {
        hi = start;
        bool found = false;
        while (static_cast<int>(est.probes.size()) < cfg.max_probes && factor < 1e12) {
            const double r = hi / factor;
            if (probe(r)) {
                lo = r;
                found = true;
                break;
            }
            hi = r;
            factor *= factor;
        }
        if (!found) throw Error("no disk found");
    }
    while (std::isfinite(hi) && hi / lo - 1.0 > cfg.tol * (1.0 + 1e-9) && static_cast<int>(est.probes.size()) < cfg.max_probes) {
        const double mid = std::sqrt(lo * hi);
        if (probe(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    est.r_lo = lo;
    est.r_hi = hi;
    // each success moves r_lo to the probed radius, so the latest converged solve is the witness
    est.witness = std::move(best);
    est.value = norm / lo;
    return est;
}

SemicontinuityReport semicontinuity_probe(const AlmostComplexStructure& J, const TangentVector& v0,
                                          double ball_radius, int n_samples, unsigned long long seed,
                                          const KobayashiConfig& cfg) {
    const int n = J.n();
    SemicontinuityReport rep;
    rep.base_value = pseudonorm(J, v0, cfg).value;
    Rng rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        // random direction in C^{2n}, random length up to ball_radius
        std::vector<cplx> d(static_cast<std::size_t>(2 * n));
        double len = 0.0;
        while (len == 0.0) {
            len = 0.0;
            for (auto& c : d) {
                c = rng.in_disk(1.0);
                len = std::hypot(len, std::abs(c));
            }
        }
        const double radius = ball_radius * rng.uniform();
        TangentVector v = v0;
        for (int i = 0; i < n; ++i) {
            v.p[i] += d[i] * (radius / len);
            v.u[i] += d[n + i] * (radius / len);
        }
        rep.samples.push_back(std::move(v));
    }
    rep.values.resize(rep.samples.size());
    parallel_for(rep.samples.size(), cfg.threads, [&](std::size_t k) {
        KobayashiConfig c = cfg;
        c.threads = 1;
        rep.values[k] = pseudonorm(J, rep.samples[k], c).value;
    });
    for (double val : rep.values) rep.excess = std::max(rep.excess, val - rep.base_value);
    return rep;
}

std::vector<std::vector<cplx>> region_points(const ModelDomain& domain, const std::string& region) {
    const int n = domain.n;
    std::vector<std::vector<cplx>> pts;
    pts.emplace_back(static_cast<std::size_t>(n), 0.0);
    if (region == "center") return pts;
    if (region != "full") throw Error("unknown region: " + region);
    for (int k = 0; k < 3; ++k) {
        std::vector<cplx> p(static_cast<std::size_t>(n), 0.0);
        p[0] = std::polar(0.5 * domain.R, 2.0 * kPi * k / 3.0);
        pts.push_back(p);
    }
    if (n > 1) {
        std::vector<cplx> p(static_cast<std::size_t>(n), 0.5 * domain.R1);
        p[0] = 0.0;
        pts.push_back(p);
    }
    return pts;
}

std::vector<std::vector<cplx>> unit_directions(int n, int count, unsigned long long seed) {
    std::vector<std::vector<cplx>> dirs;
    Rng rng(seed);
    for (int d = 0; d < count; ++d) {
        std::vector<cplx> u(static_cast<std::size_t>(n), 0.0);
        if (d < n) {
            u[d] = 1.0;
        } else {
            const int j = d % n;
            for (int i = 0; i < n; ++i) {
                const double phase = 2.0 * kPi * rng.uniform();
                u[i] = std::polar(i == j ? 1.0 : rng.uniform(), phase);
            }
        }
        dirs.push_back(std::move(u));
    }
    return dirs;
}

HyperbolicityReport hyperbolicity_scan(const AlmostComplexStructure& J, const std::string& region, int n_directions,
                                       unsigned long long seed, const KobayashiConfig& cfg, double threshold) {
    HyperbolicityReport rep;
    rep.threshold = threshold;
    const auto pts = region_points(J.domain(), region);
    const auto dirs = unit_directions(J.n(), n_directions, seed);
    for (const auto& p : pts)
        for (const auto& u : dirs) rep.entries.push_back({TangentVector{p, u}, 0.0});
    parallel_for(rep.entries.size(), cfg.threads, [&](std::size_t k) {
        KobayashiConfig c = cfg;
        c.threads = 1;
        rep.entries[k].value = pseudonorm(J, rep.entries[k].v, c).value;
    });
    if (!rep.entries.empty()) {
        rep.min_value = rep.max_value = rep.entries[0].value;
        for (const auto& e : rep.entries) {
            rep.min_value = std::min(rep.min_value, e.value);
            rep.max_value = std::max(rep.max_value, e.value);
        }
    }
    rep.c_k = rep.max_value;
    rep.verdict = rep.min_value > threshold ? "hyperbolic evidence" : "no hyperbolicity evidence";
    return rep;
}

}  // namespace pdisk
