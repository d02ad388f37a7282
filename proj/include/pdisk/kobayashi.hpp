#pragma once

#include <string>
#include <vector>

#include "pdisk/solver.hpp"

namespace pdisk {

/// |v| / (1 - |z|^2); throws for |z| >= 1.
double poincare_metric(cplx z, cplx v);
/// arctanh |(z - w) / (1 - conj(z) w)|; throws for points off the open disk.
double poincare_distance(cplx z, cplx w);

/// Tangent vector u at the point p of the model domain.
struct TangentVector {
    std::vector<cplx> p;
    std::vector<cplx> u;
};

struct KobayashiConfig {
    /// Relative bracket width of the radius search.
    double tol = 1e-2;
    /// Base solver settings; radius, seed and delta are set per probe.
    SolveConfig solve = coarse_solve();
    /// Disk radius used for every probe (<= 0: R / 2); a disk of radius r is
    /// reparametrized onto it.
    double probe_radius = 0.0;
    bool layered_retry = true;
    int max_probes = 60;
    /// Expected radius for the normalized direction; > 0 starts the bracket
    /// there instead of at the Moebius radius.
    double radius_hint = 0.0;
    int threads = 1;

    static SolveConfig coarse_solve();
};

struct RadiusProbe {
    double radius = 0.0;
    bool success = false;
    std::string diagnostics;
};

struct PseudonormEstimate {
    /// 1 / r_lo, times |u| when the input was normalized.
    double value = 0.0;
    /// Bracket for the normalized direction u / |u|.
    double r_lo = 0.0;
    double r_hi = 0.0;
    /// Radius limit of the model-polydisc Moebius family for the normalized direction.
    double r_star = 0.0;
    /// Converged solve at r_lo, parametrized on D_{probe_radius}.
    SolveResult witness;
    TangentVector v;
    std::vector<RadiusProbe> probes;
};

/// Moebius seed on D_{probe_radius} through p with derivative u at scale r:
/// component i is rho_i M_{q_i}(c_i r zeta / probe_radius), rho = (R, R1, ...).
std::vector<BiPoly> moebius_seed(const ModelDomain& domain, std::span<const cplx> p, std::span<const cplx> u,
                                 double r, double probe_radius);
/// Largest r for which the Moebius seed stays in the model domain:
/// min_i (rho_i^2 - |p_i|^2) / (rho_i |u_i|).
double moebius_radius(const ModelDomain& domain, std::span<const cplx> p, std::span<const cplx> u);

/// Bracket search over the disk radius with solver success as the oracle.
/// Throws "no disk found" when no probe converges.
PseudonormEstimate pseudonorm(const AlmostComplexStructure& J, const TangentVector& v,
                              const KobayashiConfig& cfg = {});

struct SemicontinuityReport {
    double base_value = 0.0;
    /// max over samples of F(v) - F(v0), 0 when no sample exceeds F(v0).
    double excess = 0.0;
    std::vector<double> values;
    std::vector<TangentVector> samples;
};

/// Samples tangent vectors (p + dp, u + du) with |(dp, du)| <= ball_radius.
SemicontinuityReport semicontinuity_probe(const AlmostComplexStructure& J, const TangentVector& v0,
                                          double ball_radius, int n_samples, unsigned long long seed,
                                          const KobayashiConfig& cfg = {});

struct PathConfig {
    /// Segment counts tried in order.
    std::vector<int> levels{1, 2, 4, 8};
    /// Pattern-search evaluation budget per level.
    int max_evaluations = 400;
    /// Initial and final pattern step, relative to |q - p| (plus R1 scale).
    double initial_step = 0.15;
    double min_step = 5e-3;
};

struct ChainLink {
    std::vector<cplx> from;
    std::vector<cplx> to;
    std::vector<cplx> direction;
    cplx w = 0.0;
    double cost = 0.0;
    bool matched = false;
};

struct DistanceResult {
    double value = 0.0;
    std::string method;
    /// "ok" or "no chain found".
    std::string verdict = "ok";
    /// Segment count (path) or chain length (chain) of the optimum.
    int level = 0;
    std::vector<std::vector<cplx>> path;
    std::vector<ChainLink> links;
    /// Best value after each refinement level.
    std::vector<double> level_values;
};

/// Polyline minimization of the sum over segments of Gauss-Legendre samples of
/// F(gamma(t), gamma'(t)). Values are monotone in the refinement level.
DistanceResult path_distance(const AlmostComplexStructure& J, std::span<const cplx> p, std::span<const cplx> q,
                             const PathConfig& path_cfg = {}, const KobayashiConfig& cfg = {});

/// Chains of at most max_links solver-produced disks, each g(zeta) =
/// f_u(kappa R*(u) zeta) on the unit disk with g(0) at the link start; the
/// direction u and the point w with g(w) = link end are found by damped Newton.
/// Intermediate points are taken along `guide` (or the straight segment).
DistanceResult chain_distance(const AlmostComplexStructure& J, std::span<const cplx> p, std::span<const cplx> q,
                              int max_links = 2, const KobayashiConfig& cfg = {},
                              const std::vector<std::vector<cplx>>& guide = {});

struct ScanEntry {
    TangentVector v;
    double value = 0.0;
};

struct HyperbolicityReport {
    double min_value = 0.0;
    double max_value = 0.0;
    /// max F / |v| over the samples (|v| = max_i |u_i| = 1).
    double c_k = 0.0;
    std::string verdict;
    double threshold = 1e-3;
    std::vector<ScanEntry> entries;
};

/// Base points: "center" (the origin) or "full" (origin plus points at half
/// radius). Directions have max_i |u_i| = 1.
std::vector<std::vector<cplx>> region_points(const ModelDomain& domain, const std::string& region);
std::vector<std::vector<cplx>> unit_directions(int n, int count, unsigned long long seed);

HyperbolicityReport hyperbolicity_scan(const AlmostComplexStructure& J, const std::string& region, int n_directions,
                                       unsigned long long seed, const KobayashiConfig& cfg = {},
                                       double threshold = 1e-3);

}  // namespace pdisk
