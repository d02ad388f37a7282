#include "pdisk/polar_grid.hpp"

#include <cmath>

namespace pdisk {

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
}

PolarGrid::PolarGrid(double radius, int n_radial, int n_angular)
    : radius_(radius), n_radial_(n_radial), n_angular_(n_angular) {
    if (!(radius > 0.0)) throw Error("polar grid: radius must be positive");
    if (n_radial < 2) throw Error("polar grid: n_radial must be at least 2");
    if (n_angular < 1) throw Error("polar grid: n_angular must be positive");
    gauss_legendre(n_radial, 0.0, radius, radii_, radial_weights_);
    nodes_.reserve(static_cast<std::size_t>(n_radial) * n_angular);
    weights_.reserve(nodes_.capacity());
    const double dtheta = 2.0 * kPi / n_angular;
    for (int j = 0; j < n_radial; ++j) {
        for (int t = 0; t < n_angular; ++t) {
            nodes_.push_back(std::polar(radii_[j], angle(t)));
            weights_.push_back(radial_weights_[j] * radii_[j] * dtheta);
        }
    }
}

double PolarGrid::angle(int t) const { return 2.0 * kPi * t / n_angular_; }

std::vector<cplx> PolarGrid::boundary_nodes() const {
    std::vector<cplx> out(n_angular_);
    for (int t = 0; t < n_angular_; ++t) out[t] = std::polar(radius_, angle(t));
    return out;
}

std::shared_ptr<const PolarGrid> PolarGrid::refined(int factor) const {
    return make(radius_, n_radial_ * factor, n_angular_ * factor);
}

std::shared_ptr<const PolarGrid> PolarGrid::with_radius(double radius) const {
    return make(radius, n_radial_, n_angular_);
}

}  // namespace pdisk
