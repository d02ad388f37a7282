#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pdisk/disk_field.hpp"

namespace pdisk {

// Cauchy-Green operators on the disk D_R, exact on polynomials.
//
//   T f(w)   = -(1/pi) \iint_{D_R} f(zeta) / (zeta - w) dA      (dbar T f = f)
//   S f(w)   = (1/2 pi i) \oint_{|zeta|=R} f(zeta) / (zeta - w) dzeta
//   T_k f    = T f minus its zeta-Taylor polynomial of order k at 0
//   T_inf f  = limit of T_k: the zeta-bar antiderivative on polynomials
//
// On a monomial zeta^l zetabar^m:
//   T     -> zeta^l zetabar^(m+1)/(m+1) - [l >= m+1]     R^(2m+2)/(m+1) zeta^(l-m-1)
//   T_k   -> zeta^l zetabar^(m+1)/(m+1) - [l >= k+m+2]   R^(2m+2)/(m+1) zeta^(l-m-1)
//   T_inf -> zeta^l zetabar^(m+1)/(m+1)

BiPoly apply_T(const BiPoly& f, double radius);
BiPoly apply_Tk(const BiPoly& f, double radius, int k);
BiPoly apply_Tinf(const BiPoly& f);
/// k-fold T_inf.
BiPoly apply_Tinf_power(const BiPoly& f, int k);
/// S applied to the boundary trace of a polynomial (zetabar = R^2 / zeta on |zeta| = R).
BiPoly apply_S_trace(const BiPoly& f, double radius);

DiskField op_T(const DiskField& f);
DiskField op_Tk(const DiskField& f, int k);
DiskField op_Tinf(const DiskField& f);
DiskField op_Tinf_power(const DiskField& f, int k);

/// Cauchy integral of boundary samples taken at the grid's angular nodes on
/// |zeta| = R. The trapezoid rule in the angle turns the integral into the
/// discrete Fourier coefficients b_k, k >= 0, and S f = sum_k b_k (zeta/R)^k,
/// truncated at degree d_max (default: the largest frequency the angular grid resolves).
DiskField op_S(GridPtr grid, std::span<const cplx> boundary_values, int d_max = -1);
/// Same operator applied to every component's boundary trace.
DiskField op_S(const DiskField& f, int d_max = -1);

/// Trapezoid evaluation of the Cauchy integral at one point. Throws
/// "interior only" for |w| >= R.
cplx cauchy_integral_at(const PolarGrid& grid, std::span<const cplx> boundary_values, cplx w);

/// Boundary trace of each component at the grid's angular nodes.
std::vector<std::vector<cplx>> boundary_values(const DiskField& f);

/// T f(w) by quadrature, for cross-checks against the exact operator. The
/// kernel singularity is removed with polar coordinates centred at w:
///   T f(w) = -(1/pi) \int_0^{2pi} e^{-i phi} \int_0^{rho(phi)} f(w + rho e^{i phi}) drho dphi
/// with rho(phi) the distance from w to the circle |zeta| = R along phi.
cplx op_T_quadrature(const std::function<cplx(cplx)>& f, double radius, cplx w, int n_rho = 24,
                     int n_phi = 64);

/// Empirical constants for ||T f||' <= c1 ||f||, ||S f|| <= c2 ||f|| and
/// ||T_inf^k [A(zeta, p)]||' <= C e^(mu R) ||p||.
struct OperatorBoundEstimate {
    double c1_hat = 0.0;
    double c2_hat = 0.0;
    double C_hat = 0.0;
    double mu_hat = 0.0;
    int sample_count = 0;
};

struct BoundEstimateConfig {
    double lambda = 0.5;
    int degree = 6;           // degree of random test polynomials
    int norm_radial = 8;      // grid the Hoelder norms are sampled on
    int norm_angular = 16;
    int max_power = 6;        // k = 1..max_power for T_inf^k
    std::vector<double> radii{0.5, 1.0, 1.5, 2.0};
    cplx model_coefficient = 0.3;  // A(zeta, z) = model_coefficient * conj(z)
};

/// Ratios contributed by one test polynomial f on D_R: {||Tf||'/||f||, ||Sf||/||f||}.
std::pair<double, double> bound_ratios(const BiPoly& f, double radius, const BoundEstimateConfig& cfg = {});

/// Max observed ratios over `samples` random polynomials per radius.
/// Deterministic given the seed; zero samples gives all-zero estimates.
OperatorBoundEstimate estimate_bounds(unsigned long long seed, int samples, const BoundEstimateConfig& cfg = {});

}  // namespace pdisk
