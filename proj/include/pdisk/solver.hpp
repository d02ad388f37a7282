#pragma once

#include <limits>
#include <string>
#include <vector>

#include "pdisk/disk_field.hpp"
#include "pdisk/structure.hpp"

namespace pdisk {

/// z(0) = p, dz/dzeta(0) = u.
struct JetCondition {
    std::vector<cplx> p;
    std::vector<cplx> u;

    static JetCondition at_origin(std::vector<cplx> u);
};

enum class Verdict { converged, diverged, left_Bdelta };
enum class Scheme { direct, layered };

std::string to_string(Verdict v);
std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct SolveConfig {
    /// Radius of the disk D_{R_solve}; must be < R.
    double radius = 0.9;
    /// B_delta tube radius around the initial iterate; <= 0 selects 0.1 R1,
    /// infinity disables the check.
    double delta = 0.0;
    int max_iterations = 60;
    double residual_tol = 1e-8;
    /// Observed contraction ratios >= kappa_max over `divergence_window`
    /// consecutive steps end the run as diverged.
    double kappa_max = 0.95;
    int divergence_window = 3;
    Scheme scheme = Scheme::direct;

    int n_radial = 32;
    int n_angular = 64;
    int d_max = 16;
    /// Coarse grid for the contraction norm.
    int norm_radial = 8;
    int norm_angular = 16;
    double lambda = 0.5;

    /// Layered scheme: polynomial fit tolerance, tail ratio threshold,
    /// Weierstrass split ratio and rescale factor (<= 0: automatic).
    double weierstrass_eps = 1e-3;
    double eps_r = 0.5;
    double nu = 0.1;
    double rescale_N = 0.0;
    int inner_max = 80;
    int poly_cap = 48;

    /// Optional holomorphic initial disk replacing p + u zeta (one polynomial
    /// per component); the jet is then read off the seed.
    std::vector<BiPoly> seed;

    void validate(const ModelDomain& domain) const;
};

struct SolveResult {
    DiskField disk;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    /// Measured prime norms of successive differences.
    std::vector<double> history;
    Verdict verdict = Verdict::diverged;
    std::string diagnostics;
    /// Largest polynomial fit residual met while fitting right-hand sides.
    double fit_error = 0.0;
    double kappa_hat = 0.0;
    /// Sup distance of the final disk from the initial iterate.
    double tube_distance = 0.0;
    Scheme scheme = Scheme::direct;
    /// Layered scheme only.
    double rescale_N = 1.0;
    int tail_index = 0;

    bool converged() const { return verdict == Verdict::converged; }
};

/// Thrown by steps that evaluate the structure outside the model domain.
class LeftDomain : public Error {
public:
    LeftDomain(cplx node, double gauge) : Error("left domain"), node(node), gauge(gauge) {}
    cplx node;
    double gauge;
};

/// sup over nodes and components of |dbar z^i + sum_m a^i_mbar(z) conj(dz^m)|,
/// evaluated from the polynomials of z on z's grid.
double residual(const DiskField& z, const AlmostComplexStructure& J);

/// (Phi z)^i = p^i + u^i zeta + T_1[-sum_m a^i_mbar(z) conj(dz^m)].
/// d_max < 0 fits the right-hand side at the largest degree (<= 16) the grid
/// of z supports.
DiskField picard_step(const DiskField& z, const AlmostComplexStructure& J, const JetCondition& jet, int d_max = -1);

/// First equation alone with z^I frozen:
/// p^1 + u^1 zeta + T_1[-sum_m a^1_mbar(z^1, z^I) conj(dz^m)].
DiskField scalar_step_psi1(const DiskField& z1, const DiskField& zI, const AlmostComplexStructure& J,
                           const JetCondition& jet, int d_max = -1);

SolveResult solve_direct(const AlmostComplexStructure& J, const JetCondition& jet, const SolveConfig& config = {});
SolveResult solve_layered(const AlmostComplexStructure& J, const JetCondition& jet, const SolveConfig& config = {});
/// Dispatches on config.scheme.
SolveResult solve(const AlmostComplexStructure& J, const JetCondition& jet, const SolveConfig& config = {});

struct LinearModelResult {
    /// Limit z^I (index 0 unused, empty).
    std::vector<BiPoly> z;
    /// Every iterate, starting with v zeta.
    std::vector<std::vector<BiPoly>> iterates;
    /// Max coefficient difference between successive iterates.
    std::vector<double> differences;
    Verdict verdict = Verdict::diverged;
};

/// Iterates z_(k+1) = v zeta - T_inf[A(zeta, z_(k))] from v zeta until the
/// successive coefficient difference is <= 1e-12. Polynomials are truncated
/// at total degree poly_cap.
LinearModelResult linear_model_solve(const LinearModel& A, std::span<const cplx> v, int k_max = 200,
                                     int poly_cap = 64);

/// Default rescale factor max(1, 10 sup |da / dz^I| R), sampled near the
/// central disk.
double auto_rescale_factor(const AlmostComplexStructure& J);

struct SweepEntry {
    std::vector<cplx> u;
    double offset = 0.0;
    Verdict verdict = Verdict::diverged;
    double residual = 0.0;
    int iterations = 0;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    /// Distance to the nearest failed jet, or the largest sampled offset when
    /// every jet converged.
    double success_radius = 0.0;
    int failures = 0;
};

/// grid x grid jets u = u0 + d1 e_1 + d2 e^{i pi / 4} e_2 with d1, d2 on a
/// uniform grid in [-h, h], h = ball_radius / sqrt(2) (so every offset lies
/// in the ball). Solves run concurrently; results are stored by index.
SweepReport neighborhood_sweep(const AlmostComplexStructure& J, std::span<const cplx> u0, double ball_radius,
                               const SolveConfig& config, int grid = 5, int threads = 1);

}  // namespace pdisk
