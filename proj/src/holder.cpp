#include <algorithm>
#include <cmath>

#include "pdisk/disk_field.hpp"

namespace pdisk {

HolderReport holder_norm(std::span<const cplx> points, std::span<const cplx> values, double radius,
                         double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error("holder_norm: lambda must lie in (0, 1)");
    HolderReport rep;
    rep.lambda = lambda;
    const std::size_t n = points.size();
    for (std::size_t a = 0; a < n; ++a) rep.sup_norm = std::max(rep.sup_norm, std::abs(values[a]));
    // The quotient is symmetric in the pair, so unordered pairs suffice. Since
    // |w| <= 2R, |w|^(2 lambda) >= |w|^2 (2R)^(2 lambda - 2), which rejects most
    // pairs before any pow call.
    double diam = 0.0;
    for (std::size_t a = 0; a < n; ++a) diam = std::max(diam, 2.0 * std::abs(points[a]));
    diam = std::max(diam, 2.0 * radius);
    const double lower_scale = std::pow(diam, 2.0 * lambda - 2.0);
    const bool is_half = lambda == 0.5;
    double best_sq = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const cplx pa = points[a];
        const cplx va = values[a];
        for (std::size_t b = a + 1; b < n; ++b) {
            const double dist_sq = std::norm(points[b] - pa);
            if (dist_sq == 0.0) continue;
            const double diff_sq = std::norm(values[b] - va);
            if (diff_sq <= best_sq * dist_sq * lower_scale) continue;
            const double denom = is_half ? std::sqrt(dist_sq) : std::pow(dist_sq, lambda);
            best_sq = std::max(best_sq, diff_sq / denom);
        }
    }
    rep.seminorm = std::sqrt(best_sq);
    rep.norm = rep.sup_norm + std::pow(2.0 * radius, lambda) * rep.seminorm;
    return rep;
}

HolderReport holder_norm(const DiskField& f, double lambda, int component) {
    const auto& grid = f.grid();
    const auto vals = evaluate_on_grid(f.poly(component), grid);
    auto rep = holder_norm(grid.nodes(), vals, grid.radius(), lambda);
    const auto d = evaluate_on_grid(f.poly(component).del(), grid);
    const auto db = evaluate_on_grid(f.poly(component).dbar(), grid);
    rep.prime_norm = std::max(holder_norm(grid.nodes(), d, grid.radius(), lambda).norm,
                              holder_norm(grid.nodes(), db, grid.radius(), lambda).norm);
    return rep;
}

double b_norm(const DiskField& f, double lambda) {
    double total = 0.0;
    for (int i = 0; i < f.components(); ++i) {
        const auto vals = evaluate_on_grid(f.poly(i), f.grid());
        total += holder_norm(f.grid().nodes(), vals, f.grid().radius(), lambda).norm;
    }
    return total;
}

double prime_norm(const DiskField& f, double lambda) {
    return std::max(b_norm(del(f), lambda), b_norm(dbar(f), lambda));
}

}  // namespace pdisk
