#pragma once

#include <vector>

#include "pdisk/solver.hpp"

namespace pdisk::detail {

/// Values and derivatives of a polynomial map at the nodes of a grid,
/// component-major.
struct NodeState {
    std::vector<std::vector<cplx>> z;
    std::vector<std::vector<cplx>> dz;
    std::vector<std::vector<cplx>> dbz;
};

NodeState node_state(const std::vector<BiPoly>& polys, const PolarGrid& grid, bool with_dbar);

/// Throws LeftDomain when a node or a boundary point leaves the domain.
void check_domain(const std::vector<BiPoly>& polys, const PolarGrid& grid, const ModelDomain& domain);

/// -sum_m a^i_mbar(z) conj(dz^m) at every node for the requested rows.
std::vector<std::vector<cplx>> cr_forcing(const AlmostComplexStructure& J, const NodeState& s,
                                          const std::vector<int>& rows);

/// Largest nodewise distance between two maps, all components.
double sup_distance(const std::vector<BiPoly>& a, const std::vector<BiPoly>& b, const PolarGrid& grid);

/// Prime norm of a - b on the norm grid.
double prime_difference(const std::vector<BiPoly>& a, const std::vector<BiPoly>& b, const GridPtr& norm_grid,
                        double lambda);

/// Seed polynomials p + u zeta, or the configured seed.
std::vector<BiPoly> initial_disk(const JetCondition& jet, const SolveConfig& cfg, int n);
JetCondition jet_of(const std::vector<BiPoly>& seed);

/// Geometric-series stopping test and divergence bookkeeping shared by both
/// schemes.
struct StopRule {
    double tol;
    double kappa_max;
    int window;
    double prev = -1.0;
    int bad = 0;
    double kappa = 0.0;

    enum class State { running, done, diverged };
    State update(double diff);
};

}  // namespace pdisk::detail
