#include <algorithm>
#include <cmath>

#include "pdisk/disk_field.hpp"
#include "pdisk/structure.hpp"

namespace pdisk {

cplx LinearizedStructure::linear_coeff(int I, int m, bool conj, cplx z1) const {
    const int n = structure.n();
    std::vector<cplx> z(static_cast<std::size_t>(n), 0.0), a(static_cast<std::size_t>(n * n));
    z[0] = z1;
    const std::size_t slot = static_cast<std::size_t>(I * n);
    auto at = [&](cplx dz) {
        z[m] = dz;
        structure.coefficients(z, a);
        return a[slot];
    };
    const double h = fd_step;
    const cplx dx = (at(h) - at(-h)) / (2.0 * h);
    const cplx dy = (at(cplx(0.0, h)) - at(cplx(0.0, -h))) / (2.0 * h);
    const cplx I1(0.0, 1.0);
    return conj ? 0.5 * (dx + I1 * dy) : 0.5 * (dx - I1 * dy);
}

cplx LinearizedStructure::linear_part(int I, std::span<const cplx> z) const {
    cplx v = 0.0;
    for (int m = 1; m < structure.n(); ++m) {
        if (z[m] == 0.0) continue;
        v += linear_coeff(I, m, false, z[0]) * z[m] + linear_coeff(I, m, true, z[0]) * std::conj(z[m]);
    }
    return v;
}

cplx LinearizedStructure::hat_remainder(int I, std::span<const cplx> z) const {
    return structure.coefficient(I, 0, z) - linear_part(I, z);
}

cplx LinearizedStructure::a11(std::span<const cplx> z) const { return structure.coefficient(0, 0, z); }

namespace {

double fit_sup_error(const BiPoly& poly, const PolarGrid& grid, const std::function<cplx(cplx)>& truth) {
    double e = 0.0;
    for (cplx w : grid.nodes()) e = std::max(e, std::abs(poly(w) - truth(w)));
    return e;
}

}  // namespace

LinearizedStructure linearize(const AlmostComplexStructure& J, double fd_step, int degree, double eps) {
    if (!(fd_step > 0.0)) throw Error("fd_step must be positive");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    if (degree < 0) throw Error("degree must be nonnegative");
    const int n = J.n();
    const ModelDomain& dom = J.domain();
    LinearizedStructure L{J, fd_step, degree, LinearModel::zero(n)};
    if (n == 1 || J.integrable()) return L;

    auto grid = PolarGrid::make(dom.R, std::max(8, degree / 2 + 4), std::max(32, 2 * degree + 8));
    auto check = grid->refined(2);
    for (int I = 1; I < n; ++I) {
        for (int m = 1; m < n; ++m) {
            for (bool conj : {false, true}) {
                auto truth = [&](cplx z1) { return L.linear_coeff(I, m, conj, z1); };
                std::vector<cplx> samples;
                samples.reserve(grid->size());
                for (cplx w : grid->nodes()) samples.push_back(truth(w));
                const DiskField f = fit_polynomial(grid, samples, degree);
                const BiPoly& poly = f.poly(0);
                L.fit_error = std::max({L.fit_error, f.fit_residual(), fit_sup_error(poly, *check, truth)});
                (conj ? L.model.anti(I, m) : L.model.holo(I, m)) = poly;
            }
        }
    }
    if (!(L.fit_error < eps)) throw Error("degree too low");

    // second-order smallness of the remainder near the central disk
    Rng rng(0x5eedULL);
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (cplx w : central_disk_samples(dom.R, 48)) {
        for (double scale : {0.25, 0.125, 0.0625}) {
            z[0] = w;
            double r2 = 0.0;
            for (int k = 1; k < n; ++k) {
                z[k] = rng.in_disk(1.0);
                r2 += std::norm(z[k]);
            }
            const double norm = std::sqrt(r2);
            if (norm == 0.0) continue;
            for (int k = 1; k < n; ++k) z[k] *= scale * dom.R1 / norm;
            const double zn2 = scale * scale * dom.R1 * dom.R1;
            for (int I = 1; I < n; ++I) L.hat_constant = std::max(L.hat_constant, std::abs(L.hat_remainder(I, z)) / zn2);
            L.a11_sup = std::max(L.a11_sup, std::abs(L.a11(z)));
        }
    }
    return L;
}

LinearizedStructure linearize_auto(const AlmostComplexStructure& J, double fd_step, double eps, int start_degree,
                                   int max_degree) {
    for (int d = std::max(0, start_degree);; d += 2) {
        const int deg = std::min(d, max_degree);
        try {
            return linearize(J, fd_step, deg, eps);
        } catch (const Error& e) {
            if (std::string(e.what()) != "degree too low" || deg == max_degree) throw;
        }
    }
}

}  // namespace pdisk
