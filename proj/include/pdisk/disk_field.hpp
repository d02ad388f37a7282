#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pdisk/bipoly.hpp"
#include "pdisk/polar_grid.hpp"

namespace pdisk {

using GridPtr = std::shared_ptr<const PolarGrid>;

/// Values of every component at every node, component-major.
using NodeSamples = std::vector<std::vector<cplx>>;

/// A map D_R -> C^n held both as node samples and as one BiPoly per component.
/// Operators act on the polynomials; the samples are either the data a fit was
/// made from or the polynomial evaluated at the nodes.
class DiskField {
public:
    DiskField() = default;
    /// Samples are the polynomials evaluated on the grid; fit residual 0.
    DiskField(GridPtr grid, std::vector<BiPoly> polys);
    DiskField(GridPtr grid, std::vector<BiPoly> polys, NodeSamples samples, double fit_residual);

    static DiskField zero(GridPtr grid, int components);

    const PolarGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int components() const { return static_cast<int>(polys_.size()); }
    /// Largest polynomial degree bound over the components.
    int degree() const;
    double fit_residual() const { return fit_residual_; }

    const BiPoly& poly(int i) const { return polys_[i]; }
    const std::vector<BiPoly>& polys() const { return polys_; }
    std::span<const cplx> samples(int i) const { return samples_[i]; }
    const NodeSamples& samples() const { return samples_; }

    cplx value(int i, cplx zeta) const { return polys_[i](zeta); }
    std::vector<cplx> value(cplx zeta) const;
    /// Value at 0 and first zeta-derivative at 0 of component i.
    cplx value_at_origin(int i) const { return polys_[i].coeff(0, 0); }
    cplx del_at_origin(int i) const { return polys_[i].coeff(1, 0); }

    /// Same polynomials sampled on another grid.
    DiskField on_grid(GridPtr grid) const;
    DiskField component(int i) const;

    DiskField& operator+=(const DiskField& o);
    DiskField& operator-=(const DiskField& o);
    DiskField& operator*=(cplx s);
    friend DiskField operator+(DiskField a, const DiskField& b) { return a += b; }
    friend DiskField operator-(DiskField a, const DiskField& b) { return a -= b; }
    friend DiskField operator*(cplx s, DiskField a) { return a *= s; }

private:
    GridPtr grid_;
    std::vector<BiPoly> polys_;
    NodeSamples samples_;
    double fit_residual_ = 0.0;
};

/// Evaluates p at every node of the grid (flat node order).
std::vector<cplx> evaluate_on_grid(const BiPoly& p, const PolarGrid& grid);
/// Evaluates p at the n_angular points of the boundary circle.
std::vector<cplx> evaluate_on_boundary(const BiPoly& p, const PolarGrid& grid);

/// Least-squares fit of node samples by polynomials of total degree <= d_max.
/// Requires n_angular > 2 d_max and n_radial > d_max / 2 (each angular
/// frequency is then fitted independently and exactly); otherwise throws
/// "insufficient nodes".
DiskField fit_polynomial(GridPtr grid, const NodeSamples& samples, int d_max);
DiskField fit_polynomial(GridPtr grid, std::span<const cplx> samples, int d_max);

DiskField dbar(const DiskField& f);
DiskField del(const DiskField& f);

/// Sampled Hoelder quantities of one scalar function.
///
/// sup_norm and seminorm are maxima over the sampled nodes (and node pairs),
/// hence lower bounds of the true sup and H_lambda on the closed disk.
struct HolderReport {
    double lambda = 0.5;
    double sup_norm = 0.0;
    double seminorm = 0.0;
    /// sup_norm + (2R)^lambda * seminorm
    double norm = 0.0;
    /// max(norm of del f, norm of dbar f); 0 when derivatives are unavailable.
    double prime_norm = 0.0;
};

/// Hoelder report for values sampled at arbitrary points of D_R.
HolderReport holder_norm(std::span<const cplx> points, std::span<const cplx> values, double radius,
                         double lambda);
/// Report for component i of f, on f's nodes, including the prime norm.
HolderReport holder_norm(const DiskField& f, double lambda, int component = 0);

/// Norm of the space B: sum over components of the Hoelder norms.
double b_norm(const DiskField& f, double lambda);
/// max(b_norm(del f), b_norm(dbar f)).
double prime_norm(const DiskField& f, double lambda);

}  // namespace pdisk
