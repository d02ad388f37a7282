#include "pdisk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdisk/cauchy_ops.hpp"
#include "solver_internal.hpp"

namespace pdisk {

JetCondition JetCondition::at_origin(std::vector<cplx> u) {
    JetCondition j;
    j.p.assign(u.size(), 0.0);
    j.u = std::move(u);
    return j;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::converged: return "converged";
        case Verdict::diverged: return "diverged";
        case Verdict::left_Bdelta: return "left_Bdelta";
    }
    return "diverged";
}

std::string to_string(Scheme s) { return s == Scheme::direct ? "direct" : "layered"; }

Scheme parse_scheme(const std::string& s) {
    if (s == "direct") return Scheme::direct;
    if (s == "layered") return Scheme::layered;
    throw Error("unknown scheme: " + s);
}

void SolveConfig::validate(const ModelDomain& domain) const {
    if (!(radius > 0.0) || !(radius < domain.R)) throw Error("solve radius must lie in (0, R)");
    if (!(residual_tol > 0.0)) throw Error("residual_tol must be positive");
    if (max_iterations < 1) throw Error("max_iterations must be positive");
    if (!(kappa_max > 0.0)) throw Error("kappa_max must be positive");
    if (d_max < 1) throw Error("d_max must be positive");
    if (nu <= 0.0 || nu >= 1.0) throw Error("nu must lie in (0, 1)");
    if (eps_r <= 0.0 || eps_r >= 1.0) throw Error("eps_r must lie in (0, 1)");
}

namespace detail {

NodeState node_state(const std::vector<BiPoly>& polys, const PolarGrid& grid, bool with_dbar) {
    NodeState s;
    for (const auto& p : polys) {
        s.z.push_back(evaluate_on_grid(p, grid));
        s.dz.push_back(evaluate_on_grid(p.del(), grid));
        if (with_dbar) s.dbz.push_back(evaluate_on_grid(p.dbar(), grid));
    }
    return s;
}

void check_domain(const std::vector<BiPoly>& polys, const PolarGrid& grid, const ModelDomain& domain) {
    const std::size_t n = polys.size();
    auto scan = [&](const std::vector<std::vector<cplx>>& vals, std::span<const cplx> where) {
        std::vector<cplx> z(n);
        double worst = -1.0;
        std::size_t worst_j = 0;
        for (std::size_t j = 0; j < where.size(); ++j) {
            for (std::size_t k = 0; k < n; ++k) z[k] = vals[k][j];
            const double g = domain.gauge(z);
            if (g > worst) {
                worst = g;
                worst_j = j;
            }
        }
        if (worst > 1.0 + 1e-9) throw LeftDomain(where[worst_j], worst);
    };
    std::vector<std::vector<cplx>> vals;
    for (const auto& p : polys) vals.push_back(evaluate_on_grid(p, grid));
    scan(vals, grid.nodes());
    vals.clear();
    for (const auto& p : polys) vals.push_back(evaluate_on_boundary(p, grid));
    const auto b = grid.boundary_nodes();
    scan(vals, b);
}

std::vector<std::vector<cplx>> cr_forcing(const AlmostComplexStructure& J, const NodeState& s,
                                          const std::vector<int>& rows) {
    const int n = J.n();
    const std::size_t nodes = s.z[0].size();
    std::vector<std::vector<cplx>> out(rows.size(), std::vector<cplx>(nodes, 0.0));
    if (J.integrable()) return out;
    std::vector<cplx> z(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n * n));
    for (std::size_t j = 0; j < nodes; ++j) {
        for (int k = 0; k < n; ++k) z[k] = s.z[k][j];
        J.coefficients(z, a);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const int i = rows[r];
            cplx v = 0.0;
            for (int m = 0; m < n; ++m) v -= a[static_cast<std::size_t>(i * n + m)] * std::conj(s.dz[m][j]);
            out[r][j] = v;
        }
    }
    return out;
}

double sup_distance(const std::vector<BiPoly>& a, const std::vector<BiPoly>& b, const PolarGrid& grid) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (cplx v : evaluate_on_grid(a[i] - b[i], grid)) d = std::max(d, std::abs(v));
    return d;
}

double prime_difference(const std::vector<BiPoly>& a, const std::vector<BiPoly>& b, const GridPtr& norm_grid,
                        double lambda) {
    std::vector<BiPoly> d;
    bool zero = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d.push_back(a[i] - b[i]);
        zero = zero && d.back().max_abs() == 0.0;
    }
    if (zero) return 0.0;
    return prime_norm(DiskField(norm_grid, std::move(d)), lambda);
}

std::vector<BiPoly> initial_disk(const JetCondition& jet, const SolveConfig& cfg, int n) {
    if (!cfg.seed.empty()) {
        if (static_cast<int>(cfg.seed.size()) != n) throw Error("seed has wrong number of components");
        return cfg.seed;
    }
    if (static_cast<int>(jet.p.size()) != n || static_cast<int>(jet.u.size()) != n)
        throw Error("jet has wrong number of components");
    std::vector<BiPoly> z;
    for (int i = 0; i < n; ++i) {
        BiPoly p(1);
        p.set(0, 0, jet.p[i]);
        p.set(1, 0, jet.u[i]);
        z.push_back(std::move(p));
    }
    return z;
}

JetCondition jet_of(const std::vector<BiPoly>& seed) {
    JetCondition j;
    for (const auto& p : seed) {
        j.p.push_back(p.coeff(0, 0));
        j.u.push_back(p.coeff(1, 0));
    }
    return j;
}

StopRule::State StopRule::update(double diff) {
    if (!std::isfinite(diff)) return State::diverged;
    if (diff <= 1e-15) return State::done;
    State st = State::running;
    if (prev > 0.0) {
        kappa = diff / prev;
        if (kappa < 1.0 && kappa / (1.0 - kappa) * diff <= tol) st = State::done;
        bad = kappa >= kappa_max ? bad + 1 : 0;
        if (st == State::running && bad >= window) st = State::diverged;
    }
    prev = diff;
    return st;
}

}  // namespace detail

using namespace detail;

double residual(const DiskField& z, const AlmostComplexStructure& J) {
    const int n = J.n();
    if (z.components() != n) throw Error("disk has wrong number of components");
    const auto s = node_state(z.polys(), z.grid(), true);
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[i] = i;
    const auto F = cr_forcing(J, s, rows);
    double r = 0.0;
    for (int i = 0; i < n; ++i)
        for (std::size_t j = 0; j < F[i].size(); ++j) r = std::max(r, std::abs(s.dbz[i][j] - F[i][j]));
    return r;
}

namespace {

// seed^i + T_1[F^i] for the requested rows; records the fit error.
std::vector<BiPoly> cauchy_update(const AlmostComplexStructure& J, const std::vector<BiPoly>& z,
                                  const std::vector<BiPoly>& seed, const GridPtr& grid, const std::vector<int>& rows,
                                  int d_max, double& fit_error) {
    check_domain(z, *grid, J.domain());
    std::vector<BiPoly> out;
    if (J.integrable()) {
        for (int i : rows) out.push_back(seed[i]);
        return out;
    }
    const auto s = node_state(z, *grid, false);
    const auto F = cr_forcing(J, s, rows);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const bool zero = std::all_of(F[r].begin(), F[r].end(), [](cplx v) { return v == 0.0; });
        if (zero) {
            out.push_back(seed[rows[r]]);
            continue;
        }
        const DiskField f = fit_polynomial(grid, F[r], d_max);
        fit_error = std::max(fit_error, f.fit_residual());
        out.push_back(seed[rows[r]] + apply_Tk(f.poly(0), grid->radius(), 1));
    }
    return out;
}

int admissible_degree(const PolarGrid& g, int d_max) {
    if (d_max >= 0) return d_max;
    return std::max(0, std::min({16, (g.n_angular() - 1) / 2, 2 * (g.n_radial() - 1)}));
}

std::string describe_left_domain(const LeftDomain& e) {
    std::ostringstream os;
    os << "left domain at zeta=(" << e.node.real() << "," << e.node.imag() << "), gauge " << e.gauge;
    return os.str();
}

}  // namespace

DiskField picard_step(const DiskField& z, const AlmostComplexStructure& J, const JetCondition& jet, int d_max) {
    const int n = J.n();
    SolveConfig cfg;
    const auto seed = initial_disk(jet, cfg, n);
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[i] = i;
    double fe = 0.0;
    return DiskField(z.grid_ptr(),
                     cauchy_update(J, z.polys(), seed, z.grid_ptr(), rows, admissible_degree(z.grid(), d_max), fe));
}

DiskField scalar_step_psi1(const DiskField& z1, const DiskField& zI, const AlmostComplexStructure& J,
                           const JetCondition& jet, int d_max) {
    const int n = J.n();
    if (z1.components() != 1 || zI.components() != n - 1) throw Error("component count mismatch");
    std::vector<BiPoly> z{z1.poly(0)};
    for (int k = 0; k < n - 1; ++k) z.push_back(zI.poly(k));
    SolveConfig cfg;
    const auto seed = initial_disk(jet, cfg, n);
    double fe = 0.0;
    return DiskField(z1.grid_ptr(),
                     cauchy_update(J, z, seed, z1.grid_ptr(), {0}, admissible_degree(z1.grid(), d_max), fe));
}

SolveResult solve_direct(const AlmostComplexStructure& J, const JetCondition& jet, const SolveConfig& cfg) {
    cfg.validate(J.domain());
    const int n = J.n();
    auto grid = PolarGrid::make(cfg.radius, cfg.n_radial, cfg.n_angular);
    auto norm_grid = PolarGrid::make(cfg.radius, cfg.norm_radial, cfg.norm_angular);
    const auto seed = initial_disk(jet, cfg, n);
    const double delta = cfg.delta > 0.0 ? cfg.delta : 0.1 * J.domain().R1;
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[i] = i;

    SolveResult res;
    res.scheme = Scheme::direct;
    StopRule rule{cfg.residual_tol, cfg.kappa_max, cfg.divergence_window};
    std::vector<BiPoly> z = seed;
    bool stopped = false, failed = false;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        std::vector<BiPoly> next;
        try {
            next = cauchy_update(J, z, seed, grid, rows, cfg.d_max, res.fit_error);
        } catch (const LeftDomain& e) {
            res.verdict = Verdict::diverged;
            res.diagnostics = describe_left_domain(e);
            failed = true;
            break;
        }
        const double diff = prime_difference(next, z, norm_grid, cfg.lambda);
        res.history.push_back(diff);
        res.iterations = it;
        z = std::move(next);
        res.tube_distance = sup_distance(z, seed, *grid);
        if (res.tube_distance > delta) {
            res.verdict = Verdict::left_Bdelta;
            std::ostringstream os;
            os << "left B_delta: distance " << res.tube_distance << " > delta " << delta;
            res.diagnostics = os.str();
            failed = true;
            break;
        }
        const auto st = rule.update(diff);
        res.kappa_hat = rule.kappa;
        // a settled iteration whose residual is still above tolerance keeps going
        if (st == StopRule::State::done &&
            (diff <= 1e-15 || residual(DiskField(grid, z), J) <= cfg.residual_tol)) {
            stopped = true;
            break;
        }
        if (st == StopRule::State::diverged) {
            std::ostringstream os;
            os << "contraction ratio " << rule.kappa << " >= kappa_max " << cfg.kappa_max;
            res.diagnostics = os.str();
            failed = true;
            break;
        }
    }
    res.disk = DiskField(grid, z);
    res.residual = residual(res.disk, J);
    if (stopped) {
        if (res.residual <= cfg.residual_tol) {
            res.verdict = Verdict::converged;
        } else {
            std::ostringstream os;
            os << "iteration settled but residual " << res.residual << " exceeds tolerance (fit error "
               << res.fit_error << ")";
            res.diagnostics = os.str();
        }
    } else if (!failed) {
        res.diagnostics = "iteration limit reached";
    }
    return res;
}

SolveResult solve(const AlmostComplexStructure& J, const JetCondition& jet, const SolveConfig& config) {
    return config.scheme == Scheme::direct ? solve_direct(J, jet, config) : solve_layered(J, jet, config);
}

LinearModelResult linear_model_solve(const LinearModel& A, std::span<const cplx> v, int k_max, int poly_cap) {
    const int n = A.n;
    if (static_cast<int>(v.size()) != n) throw Error("transverse vector has wrong size");
    LinearModelResult res;
    std::vector<BiPoly> lin(static_cast<std::size_t>(n));
    for (int I = 1; I < n; ++I) lin[I] = BiPoly::monomial(1, 0, v[I]);
    std::vector<BiPoly> z = lin;
    res.iterates.push_back(z);
    for (int k = 1; k <= k_max; ++k) {
        std::vector<BiPoly> next(static_cast<std::size_t>(n));
        double diff = 0.0;
        for (int I = 1; I < n; ++I) {
            next[I] = (lin[I] - apply_Tinf(A.apply(I, z))).truncated(poly_cap);
            diff = std::max(diff, max_coeff_diff(next[I], z[I]));
        }
        res.differences.push_back(diff);
        res.iterates.push_back(next);
        z = std::move(next);
        if (diff <= 1e-12) {
            res.verdict = Verdict::converged;
            break;
        }
    }
    res.z = std::move(z);
    return res;
}

double auto_rescale_factor(const AlmostComplexStructure& J) {
    const int n = J.n();
    if (n == 1 || J.integrable()) return 1.0;
    const ModelDomain& d = J.domain();
    const double h = 1e-4 * d.R1;
    std::vector<cplx> z(static_cast<std::size_t>(n), 0.0), ap(static_cast<std::size_t>(n * n)),
        am(static_cast<std::size_t>(n * n)), bp(ap), bm(ap);
    double sup = 0.0;
    for (cplx w : central_disk_samples(d.R, 32)) {
        for (int k = 1; k < n; ++k) {
            std::fill(z.begin(), z.end(), 0.0);
            z[0] = w;
            z[k] = h;
            J.coefficients(z, ap);
            z[k] = -h;
            J.coefficients(z, am);
            z[k] = cplx(0.0, h);
            J.coefficients(z, bp);
            z[k] = cplx(0.0, -h);
            J.coefficients(z, bm);
            for (std::size_t e = 0; e < ap.size(); ++e) {
                const cplx dx = (ap[e] - am[e]) / (2 * h), dy = (bp[e] - bm[e]) / (2 * h);
                const cplx I(0.0, 1.0);
                sup = std::max(sup, std::abs(0.5 * (dx - I * dy)) + std::abs(0.5 * (dx + I * dy)));
            }
        }
    }
    return std::max(1.0, 10.0 * sup * d.R);
}

SweepReport neighborhood_sweep(const AlmostComplexStructure& J, std::span<const cplx> u0, double ball_radius,
                               const SolveConfig& config, int grid, int threads) {
    const int n = J.n();
    if (static_cast<int>(u0.size()) != n) throw Error("direction has wrong size");
    if (grid < 1) throw Error("sweep grid must be positive");
    const double h = ball_radius / std::sqrt(2.0);
    const cplx rot = std::polar(1.0, kPi / 4.0);
    SweepReport rep;
    rep.entries.resize(static_cast<std::size_t>(grid * grid));
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            const double d1 = grid == 1 ? 0.0 : -h + 2.0 * h * a / (grid - 1);
            const double d2 = grid == 1 ? 0.0 : -h + 2.0 * h * b / (grid - 1);
            auto& e = rep.entries[static_cast<std::size_t>(a * grid + b)];
            e.u.assign(u0.begin(), u0.end());
            e.u[0] += d1;
            if (n > 1) e.u[1] += d2 * rot;
            e.offset = n > 1 ? std::hypot(d1, d2) : std::abs(d1);
        }
    }
    parallel_for(rep.entries.size(), threads, [&](std::size_t k) {
        auto& e = rep.entries[k];
        const auto r = solve(J, JetCondition::at_origin(e.u), config);
        e.verdict = r.verdict;
        e.residual = r.residual;
        e.iterations = r.iterations;
    });
    double nearest_fail = std::numeric_limits<double>::infinity(), largest = 0.0;
    for (const auto& e : rep.entries) {
        largest = std::max(largest, e.offset);
        if (e.verdict != Verdict::converged) {
            ++rep.failures;
            nearest_fail = std::min(nearest_fail, e.offset);
        }
    }
    rep.success_radius = rep.failures ? nearest_fail : largest;
    return rep;
}

}  // namespace pdisk
