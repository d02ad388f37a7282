#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "pdisk/cauchy_ops.hpp"
#include "pdisk/solver.hpp"
#include "solver_internal.hpp"

namespace pdisk {

using namespace detail;

namespace {

// conj(u) p(u zeta): the model seen along z^1 = u zeta.
BiPoly along_direction(const BiPoly& p, cplx u) {
    BiPoly out(p.degree());
    for (int s = 0; s <= p.degree(); ++s) {
        for (int m = 0; m <= s; ++m) {
            const int l = s - m;
            const cplx c = p.coeff(l, m);
            if (c == 0.0) continue;
            out.set(l, m, c * std::pow(u, l) * std::pow(std::conj(u), m) * std::conj(u));
        }
    }
    return out;
}

double sup_on(const BiPoly& p, const PolarGrid& grid) {
    double s = 0.0;
    for (cplx v : evaluate_on_grid(p, grid)) s = std::max(s, std::abs(v));
    return s;
}

// Smallest truncation Q of theta with sup |theta - Q| <= nu sup |theta|.
int weierstrass_split(const BiPoly& theta, const PolarGrid& grid, double nu, BiPoly& Q, BiPoly& q, double& ratio) {
    const double total = sup_on(theta, grid);
    if (total == 0.0) {
        Q = BiPoly();
        q = BiPoly();
        ratio = 0.0;
        return 0;
    }
    for (int d = 0; d <= theta.degree(); ++d) {
        BiPoly cand = theta.truncated(d);
        const BiPoly rest = theta - cand;
        const double r = sup_on(rest, grid) / total;
        if (r <= nu || d == theta.degree()) {
            Q = std::move(cand);
            q = rest;
            ratio = r;
            return d;
        }
    }
    Q = theta;
    q = BiPoly();
    ratio = 0.0;
    return theta.degree();
}

std::vector<BiPoly> unscale(std::vector<BiPoly> z, double N) {
    for (std::size_t k = 1; k < z.size(); ++k) z[k] *= 1.0 / N;
    return z;
}

}  // namespace

SolveResult solve_layered(const AlmostComplexStructure& J, const JetCondition& jet, const SolveConfig& cfg) {
    cfg.validate(J.domain());
    const int n = J.n();
    if (n == 1 || J.integrable()) {
        SolveResult r = solve_direct(J, jet, cfg);
        r.scheme = Scheme::layered;
        return r;
    }
    if (!cfg.seed.empty()) throw Error("layered scheme takes no seed");
    if (static_cast<int>(jet.p.size()) != n || static_cast<int>(jet.u.size()) != n)
        throw Error("jet has wrong number of components");
    for (cplx p : jet.p)
        if (p != 0.0) throw Error("layered scheme requires p = 0");

    SolveResult res;
    res.scheme = Scheme::layered;
    const double N = cfg.rescale_N > 0.0 ? cfg.rescale_N : auto_rescale_factor(J);
    res.rescale_N = N;
    const AlmostComplexStructure Jh = rescale(J, N);
    const cplx u1 = jet.u[0];
    std::vector<cplx> uh(jet.u.begin(), jet.u.end());
    for (int k = 1; k < n; ++k) uh[k] *= N;

    std::ostringstream diag;
    diag << "N=" << N;
    std::optional<LinearizedStructure> lin;
    try {
        lin = linearize_auto(Jh, 1e-4 * Jh.domain().R1, cfg.weierstrass_eps, 0, 16);
    } catch (const Error& e) {
        res.diagnostics = diag.str() + "; eps margin failed: " + e.what();
        res.disk = DiskField(PolarGrid::make(cfg.radius, cfg.n_radial, cfg.n_angular),
                             initial_disk(jet, SolveConfig{}, n));
        res.residual = residual(res.disk, J);
        return res;
    }
    diag << "; fit_degree=" << lin->degree << "; fit_error=" << lin->fit_error << "; hat_K=" << lin->hat_constant;

    LinearModel A = LinearModel::zero(n);
    for (int I = 1; I < n; ++I) {
        for (int m = 1; m < n; ++m) {
            A.holo(I, m) = along_direction(lin->model.holo(I, m), u1);
            A.anti(I, m) = along_direction(lin->model.anti(I, m), u1);
        }
    }

    auto grid = PolarGrid::make(cfg.radius, cfg.n_radial, cfg.n_angular);
    auto norm_grid = PolarGrid::make(cfg.radius, cfg.norm_radial, cfg.norm_angular);
    const double delta = cfg.delta > 0.0 ? cfg.delta : 0.1 * J.domain().R1;

    // model coefficients at the nodes
    std::vector<std::vector<cplx>> Ap(static_cast<std::size_t>(n * n)), Abar(static_cast<std::size_t>(n * n));
    for (int I = 1; I < n; ++I) {
        for (int m = 1; m < n; ++m) {
            Ap[I * n + m] = evaluate_on_grid(A.holo(I, m), *grid);
            Abar[I * n + m] = evaluate_on_grid(A.anti(I, m), *grid);
        }
    }

    const std::vector<BiPoly> seed = initial_disk(JetCondition{std::vector<cplx>(n, 0.0), uh}, SolveConfig{}, n);
    BiPoly z1 = seed[0];
    std::vector<BiPoly> P(seed), theta(static_cast<std::size_t>(n));
    P[0] = BiPoly();
    const std::vector<BiPoly> start = unscale(seed, N);

    auto assemble = [&](const BiPoly& a, const std::vector<BiPoly>& p, const std::vector<BiPoly>& t) {
        std::vector<BiPoly> z(static_cast<std::size_t>(n));
        z[0] = a;
        for (int I = 1; I < n; ++I) z[I] = p[I] + t[I];
        return z;
    };

    StopRule rule{cfg.residual_tol, cfg.kappa_max, cfg.divergence_window};
    bool stopped = false, failed = false;
    std::vector<BiPoly> z = assemble(z1, P, theta);
    double last_ratio = 0.0, sup_U = 0.0;
    int last_split = 0, last_sweeps = 0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        try {
            check_domain(z, *grid, Jh.domain());
        } catch (const LeftDomain& e) {
            std::ostringstream os;
            os << "; left domain at zeta=(" << e.node.real() << "," << e.node.imag() << "), gauge " << e.gauge;
            diag << os.str();
            failed = true;
            break;
        }
        const auto s = node_state(z, *grid, false);
        const std::size_t nodes = grid->size();

        // first row, z^I frozen
        std::vector<int> rows{0};
        const auto F1 = cr_forcing(Jh, s, rows)[0];
        BiPoly z1_next = seed[0];
        if (std::any_of(F1.begin(), F1.end(), [](cplx v) { return v != 0.0; })) {
            const DiskField f = fit_polynomial(grid, F1, cfg.d_max);
            res.fit_error = std::max(res.fit_error, f.fit_residual());
            z1_next += apply_Tk(f.poly(0), cfg.radius, 1);
        }

        // remainder U^I = A(zeta, z^I) - sum_m a^I_mbar(z) conj(dz^m), with z^1 = z^1_[r]
        std::vector<std::vector<cplx>> U(static_cast<std::size_t>(n), std::vector<cplx>(nodes, 0.0));
        {
            std::vector<cplx> zz(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n * n));
            for (std::size_t j = 0; j < nodes; ++j) {
                for (int k = 0; k < n; ++k) zz[k] = s.z[k][j];
                Jh.coefficients(zz, a);
                for (int I = 1; I < n; ++I) {
                    cplx v = 0.0;
                    for (int m = 1; m < n; ++m) v += Ap[I * n + m][j] * zz[m] + Abar[I * n + m][j] * std::conj(zz[m]);
                    for (int m = 0; m < n; ++m) v -= a[static_cast<std::size_t>(I * n + m)] * std::conj(s.dz[m][j]);
                    U[I][j] = v;
                }
            }
        }

        std::vector<BiPoly> Q(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
        last_split = 0;
        last_ratio = 0.0;
        for (int I = 1; I < n; ++I) {
            double ratio = 0.0;
            last_split = std::max(last_split, weierstrass_split(theta[I], *grid, cfg.nu, Q[I], q[I], ratio));
            last_ratio = std::max(last_ratio, ratio);
        }

        // polynomial part: y = v zeta - T_inf[A(zeta, y + Q)] swept to its limit
        std::vector<BiPoly> y = P;
        double prev = -1.0;
        int k_r = 0, sweeps = 0;
        bool inner_done = false;
        for (; sweeps < cfg.inner_max; ++sweeps) {
            std::vector<BiPoly> arg(static_cast<std::size_t>(n));
            for (int I = 1; I < n; ++I) arg[I] = y[I] + Q[I];
            std::vector<BiPoly> next(static_cast<std::size_t>(n));
            double d = 0.0, scale = 0.0;
            for (int I = 1; I < n; ++I) {
                next[I] = (seed[I] - apply_Tinf(A.apply(I, arg))).truncated(cfg.poly_cap);
                d = std::max(d, max_coeff_diff(next[I], y[I]));
                scale = std::max(scale, next[I].max_abs());
            }
            y = std::move(next);
            if (prev > 0.0 && k_r == 0 && d / prev <= cfg.eps_r) k_r = sweeps + 1;
            prev = d;
            if (d <= 1e-14 * std::max(1.0, scale)) {
                inner_done = true;
                ++sweeps;
                break;
            }
        }
        last_sweeps = sweeps;
        res.tail_index = k_r;
        if (!inner_done) {
            diag << "; eps_r margin failed: tail did not contract within " << cfg.inner_max << " sweeps";
            failed = true;
            break;
        }

        // smooth part: theta = -T_1[A(zeta, q)] + T_1[U]
        std::vector<BiPoly> theta_next(static_cast<std::size_t>(n));
        sup_U = 0.0;
        for (int I = 1; I < n; ++I) {
            for (cplx v : U[I]) sup_U = std::max(sup_U, std::abs(v));
            BiPoly t = apply_Tk(A.apply(I, q), cfg.radius, 1) * cplx(-1.0);
            if (std::any_of(U[I].begin(), U[I].end(), [](cplx v) { return v != 0.0; })) {
                const DiskField f = fit_polynomial(grid, U[I], cfg.d_max);
                res.fit_error = std::max(res.fit_error, f.fit_residual());
                t += apply_Tk(f.poly(0), cfg.radius, 1);
            }
            theta_next[I] = t.truncated(cfg.poly_cap);
        }

        const std::vector<BiPoly> next = assemble(z1_next, y, theta_next);
        const double diff = prime_difference(unscale(next, N), unscale(z, N), norm_grid, cfg.lambda);
        res.history.push_back(diff);
        res.iterations = it;
        z1 = z1_next;
        P = std::move(y);
        theta = std::move(theta_next);
        z = next;
        res.tube_distance = sup_distance(unscale(z, N), start, *grid);
        if (res.tube_distance > delta) {
            res.verdict = Verdict::left_Bdelta;
            diag << "; delta margin failed: distance " << res.tube_distance << " > " << delta;
            failed = true;
            break;
        }
        const auto st = rule.update(diff);
        res.kappa_hat = rule.kappa;
        if (st == StopRule::State::done &&
            (diff <= 1e-15 || residual(DiskField(grid, unscale(z, N)), J) <= cfg.residual_tol)) {
            stopped = true;
            break;
        }
        if (st == StopRule::State::diverged) {
            diag << "; contraction ratio " << rule.kappa << " >= kappa_max " << cfg.kappa_max
                 << " (nu split ratio " << last_ratio << ", sup U " << sup_U << ")";
            failed = true;
            break;
        }
    }
    diag << "; k_r=" << res.tail_index << "; sweeps=" << last_sweeps << "; split_degree=" << last_split
         << "; split_ratio=" << last_ratio << "; sup_U=" << sup_U;

    res.disk = DiskField(grid, unscale(z, N));
    res.residual = residual(res.disk, J);
    if (stopped) {
        if (res.residual <= cfg.residual_tol) {
            res.verdict = Verdict::converged;
        } else {
            diag << "; iteration settled but residual " << res.residual << " exceeds tolerance";
        }
    } else if (!failed) {
        diag << "; iteration limit reached";
    }
    res.diagnostics = diag.str();
    return res;
}

}  // namespace pdisk
