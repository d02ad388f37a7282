#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pdisk/common.hpp"

namespace pdisk {

/// Gauss-Legendre radial nodes times uniform angular nodes on the closed disk
/// of radius R. Node (j, t) sits at r_j * exp(2 pi i t / n_angular) and has
/// flat index j * n_angular + t.
class PolarGrid {
public:
    PolarGrid(double radius, int n_radial, int n_angular);

    static std::shared_ptr<const PolarGrid> make(double radius, int n_radial, int n_angular) {
        return std::make_shared<const PolarGrid>(radius, n_radial, n_angular);
    }

    double radius() const { return radius_; }
    int n_radial() const { return n_radial_; }
    int n_angular() const { return n_angular_; }
    std::size_t size() const { return nodes_.size(); }

    std::span<const double> radii() const { return radii_; }
    std::span<const cplx> nodes() const { return nodes_; }
    /// Area quadrature weights; they sum to pi R^2.
    std::span<const double> weights() const { return weights_; }

    double angle(int t) const;
    /// n_angular points on the boundary circle |zeta| = R at the grid angles.
    std::vector<cplx> boundary_nodes() const;

    /// Same radius, node counts multiplied by `factor`.
    std::shared_ptr<const PolarGrid> refined(int factor) const;
    std::shared_ptr<const PolarGrid> with_radius(double radius) const;

private:
    double radius_;
    int n_radial_;
    int n_angular_;
    std::vector<double> radii_;
    std::vector<double> radial_weights_;
    std::vector<cplx> nodes_;
    std::vector<double> weights_;
};

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace pdisk
