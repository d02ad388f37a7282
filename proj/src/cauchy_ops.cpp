#include "pdisk/cauchy_ops.hpp"

#include <algorithm>
#include <cmath>

namespace pdisk {

namespace {

// Shared kernel of T and T_k: the holomorphic correction is kept only when
// the resulting power l - m - 1 exceeds `kill_through`.
BiPoly cauchy_green(const BiPoly& f, double radius, int kill_through) {
    BiPoly out(f.degree() + 1);
    const double r2 = radius * radius;
    for (int s = 0; s <= f.degree(); ++s) {
        for (int m = 0; m <= s; ++m) {
            const int l = s - m;
            const cplx c = f.coeff(l, m);
            if (c == cplx(0.0)) continue;
            const cplx scaled = c / static_cast<double>(m + 1);
            out.add(l, m + 1, scaled);
            const int power = l - m - 1;
            if (power >= 0 && power > kill_through) out.add(power, 0, -scaled * std::pow(r2, m + 1));
        }
    }
    return out;
}

}  // namespace

BiPoly apply_T(const BiPoly& f, double radius) { return cauchy_green(f, radius, -1); }

BiPoly apply_Tk(const BiPoly& f, double radius, int k) {
    if (k < 0) throw Error("op_Tk: k must be nonnegative");
    return cauchy_green(f, radius, k);
}

BiPoly apply_Tinf(const BiPoly& f) {
    BiPoly out(f.degree() + 1);
    for (int s = 0; s <= f.degree(); ++s) {
        for (int m = 0; m <= s; ++m) {
            const cplx c = f.coeff(s - m, m);
            if (c != cplx(0.0)) out.set(s - m, m + 1, c / static_cast<double>(m + 1));
        }
    }
    return out;
}

BiPoly apply_Tinf_power(const BiPoly& f, int k) {
    if (k < 0) throw Error("op_Tinf_power: k must be nonnegative");
    BiPoly out = f;
    for (int j = 0; j < k; ++j) out = apply_Tinf(out);
    return out;
}

BiPoly apply_S_trace(const BiPoly& f, double radius) {
    BiPoly out(std::max(f.degree(), 0));
    const double r2 = radius * radius;
    for (int s = 0; s <= f.degree(); ++s) {
        for (int m = 0; m <= s; ++m) {
            const int l = s - m;
            if (l >= m) out.add(l - m, 0, f.coeff(l, m) * std::pow(r2, m));
        }
    }
    return out;
}

namespace {

template <typename Op>
DiskField map_components(const DiskField& f, Op op) {
    std::vector<BiPoly> out;
    out.reserve(f.components());
    for (const auto& p : f.polys()) out.push_back(op(p));
    return DiskField(f.grid_ptr(), std::move(out));
}

}  // namespace

DiskField op_T(const DiskField& f) {
    const double r = f.grid().radius();
    return map_components(f, [r](const BiPoly& p) { return apply_T(p, r); });
}

DiskField op_Tk(const DiskField& f, int k) {
    const double r = f.grid().radius();
    return map_components(f, [r, k](const BiPoly& p) { return apply_Tk(p, r, k); });
}

DiskField op_Tinf(const DiskField& f) {
    return map_components(f, [](const BiPoly& p) { return apply_Tinf(p); });
}

DiskField op_Tinf_power(const DiskField& f, int k) {
    return map_components(f, [k](const BiPoly& p) { return apply_Tinf_power(p, k); });
}

namespace {

BiPoly cauchy_from_boundary(const PolarGrid& grid, std::span<const cplx> boundary, int d_max) {
    const int na = grid.n_angular();
    if (static_cast<int>(boundary.size()) != na) throw Error("op_S: expected one boundary sample per angular node");
    const int top = (na - 1) / 2;
    const int d = d_max < 0 ? top : std::min(d_max, top);
    BiPoly out(d);
    for (int k = 0; k <= d; ++k) {
        cplx acc = 0.0;
        for (int t = 0; t < na; ++t) {
            const int idx = static_cast<int>((static_cast<long long>(k) * t) % na);
            acc += boundary[t] * std::polar(1.0, -2.0 * kPi * idx / na);
        }
        out.set(k, 0, acc / static_cast<double>(na) / std::pow(grid.radius(), k));
    }
    return out;
}

}  // namespace

DiskField op_S(GridPtr grid, std::span<const cplx> boundary_values, int d_max) {
    auto p = cauchy_from_boundary(*grid, boundary_values, d_max);
    return DiskField(std::move(grid), {std::move(p)});
}

std::vector<std::vector<cplx>> boundary_values(const DiskField& f) {
    std::vector<std::vector<cplx>> out;
    out.reserve(f.components());
    for (const auto& p : f.polys()) out.push_back(evaluate_on_boundary(p, f.grid()));
    return out;
}

DiskField op_S(const DiskField& f, int d_max) {
    std::vector<BiPoly> out;
    for (const auto& b : boundary_values(f)) out.push_back(cauchy_from_boundary(f.grid(), b, d_max));
    return DiskField(f.grid_ptr(), std::move(out));
}

cplx cauchy_integral_at(const PolarGrid& grid, std::span<const cplx> boundary_values, cplx w) {
    if (std::abs(w) >= grid.radius()) throw Error("interior only");
    const int na = grid.n_angular();
    if (static_cast<int>(boundary_values.size()) != na) throw Error("op_S: expected one boundary sample per angular node");
    // (1/2 pi i) \oint f / (zeta - w) dzeta with dzeta = i zeta dtheta
    cplx acc = 0.0;
    for (int t = 0; t < na; ++t) {
        const cplx zeta = std::polar(grid.radius(), grid.angle(t));
        acc += boundary_values[t] * zeta / (zeta - w);
    }
    return acc / static_cast<double>(na);
}

cplx op_T_quadrature(const std::function<cplx(cplx)>& f, double radius, cplx w, int n_rho, int n_phi) {
    if (std::abs(w) >= radius) throw Error("interior only");
    std::vector<double> xs, ws;
    gauss_legendre(n_rho, 0.0, 1.0, xs, ws);
    cplx total = 0.0;
    for (int t = 0; t < n_phi; ++t) {
        const double phi = 2.0 * kPi * t / n_phi;
        const cplx dir = std::polar(1.0, phi);
        // |w + rho dir| = R  =>  rho = -Re(conj(w) dir) + sqrt(Re(...)^2 + R^2 - |w|^2)
        const double b = std::real(std::conj(w) * dir);
        const double rho_max = -b + std::sqrt(b * b + radius * radius - std::norm(w));
        cplx inner = 0.0;
        for (int q = 0; q < n_rho; ++q) inner += ws[q] * f(w + rho_max * xs[q] * dir);
        total += std::conj(dir) * inner * rho_max;
    }
    return -total * (2.0 * kPi / n_phi) / kPi;
}

namespace {

BiPoly random_poly(Rng& rng, int degree, bool vanish_at_origin) {
    BiPoly p(degree);
    for (int s = 0; s <= degree; ++s) {
        for (int m = 0; m <= s; ++m) p.set(s - m, m, cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
    }
    if (vanish_at_origin) p.set(0, 0, 0.0);
    return p;
}

double hoelder_on(const BiPoly& p, const PolarGrid& grid, double lambda) {
    const auto vals = evaluate_on_grid(p, grid);
    return holder_norm(grid.nodes(), vals, grid.radius(), lambda).norm;
}

double prime_on(const BiPoly& p, const PolarGrid& grid, double lambda) {
    return std::max(hoelder_on(p.del(), grid, lambda), hoelder_on(p.dbar(), grid, lambda));
}

}  // namespace

std::pair<double, double> bound_ratios(const BiPoly& f, double radius, const BoundEstimateConfig& cfg) {
    const PolarGrid grid(radius, cfg.norm_radial, cfg.norm_angular);
    const double fn = hoelder_on(f, grid, cfg.lambda);
    if (fn == 0.0) return {0.0, 0.0};
    const double t_ratio = prime_on(apply_T(f, radius), grid, cfg.lambda) / fn;
    const double s_ratio = hoelder_on(apply_S_trace(f, radius), grid, cfg.lambda) / fn;
    return {t_ratio, s_ratio};
}

OperatorBoundEstimate estimate_bounds(unsigned long long seed, int samples, const BoundEstimateConfig& cfg) {
    OperatorBoundEstimate est;
    if (samples <= 0) return est;
    Rng rng(seed);
    std::vector<double> model_max(cfg.radii.size(), 0.0);
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
        const double radius = cfg.radii[ri];
        const PolarGrid grid(radius, cfg.norm_radial, cfg.norm_angular);
        for (int s = 0; s < samples; ++s) {
            const BiPoly f = random_poly(rng, cfg.degree, false);
            const auto [t_ratio, s_ratio] = bound_ratios(f, radius, cfg);
            est.c1_hat = std::max(est.c1_hat, t_ratio);
            est.c2_hat = std::max(est.c2_hat, s_ratio);

            const BiPoly p = random_poly(rng, cfg.degree, true);
            const double pn = hoelder_on(p, grid, cfg.lambda);
            if (pn == 0.0) continue;
            BiPoly iterate = p.conj() * cfg.model_coefficient;
            for (int k = 1; k <= cfg.max_power; ++k) {
                iterate = apply_Tinf(iterate);
                model_max[ri] = std::max(model_max[ri], prime_on(iterate, grid, cfg.lambda) / pn);
            }
        }
        est.sample_count += samples;
    }
    // C e^{mu R} must dominate every observed maximum: mu from the steepest
    // growth between consecutive radii, C from the tightest fit.
    for (std::size_t ri = 1; ri < cfg.radii.size(); ++ri) {
        if (model_max[ri] > 0.0 && model_max[ri - 1] > 0.0) {
            const double slope = (std::log(model_max[ri]) - std::log(model_max[ri - 1])) / (cfg.radii[ri] - cfg.radii[ri - 1]);
            est.mu_hat = std::max(est.mu_hat, slope);
        }
    }
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
        est.C_hat = std::max(est.C_hat, model_max[ri] * std::exp(-est.mu_hat * cfg.radii[ri]));
    }
    return est;
}

}  // namespace pdisk
