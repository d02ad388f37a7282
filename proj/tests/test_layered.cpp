#include <cmath>
#include <limits>

#include "doctest.h"
#include "pdisk/solver.hpp"

using namespace pdisk;

namespace {

SolveConfig envelope_config(Scheme s) {
    SolveConfig cfg;
    cfg.radius = 0.95;
    cfg.delta = std::numeric_limits<double>::infinity();
    cfg.residual_tol = 1e-6;
    cfg.scheme = s;
    return cfg;
}

double sup_gap(const SolveResult& a, const SolveResult& b) {
    double worst = 0.0;
    for (cplx w : a.disk.grid().nodes())
        for (int i = 0; i < a.disk.components(); ++i)
            worst = std::max(worst, std::abs(a.disk.value(i, w) - b.disk.value(i, w)));
    return worst;
}

}  // namespace

TEST_CASE("both schemes converge inside the envelope") {
    for (double amp : {0.5, 1.0}) {
        const auto J = catalog("perturbed", {.n = 2, .amplitude = amp});
        for (double v2 : {0.005, 0.01}) {
            CAPTURE(amp);
            CAPTURE(v2);
            const auto jet = JetCondition::at_origin({1.0, v2});
            const auto d = solve(J, jet, envelope_config(Scheme::direct));
            const auto l = solve(J, jet, envelope_config(Scheme::layered));
            REQUIRE(d.converged());
            REQUIRE(l.converged());
            CHECK(l.scheme == Scheme::layered);
            CHECK(l.rescale_N >= 1.0);
            CHECK(d.residual <= 1e-6);
            CHECK(l.residual <= 1e-6);
            // the jet fixes the disk only up to holomorphic terms of order >= 2,
            // and the two schemes normalize those differently
            for (const auto* r : {&d, &l}) {
                CHECK(std::abs(r->disk.value_at_origin(0)) <= 1e-10);
                CHECK(std::abs(r->disk.del_at_origin(0) - 1.0) <= 1e-8);
                CHECK(std::abs(r->disk.del_at_origin(1) - v2) <= 1e-8);
            }
        }
    }
}

TEST_CASE("both schemes leave the domain outside the envelope") {
    const auto J = catalog("perturbed", {.n = 2, .amplitude = 4.0});
    const auto jet = JetCondition::at_origin({1.0, 0.02});
    for (Scheme s : {Scheme::direct, Scheme::layered}) {
        const auto r = solve(J, jet, envelope_config(s));
        CHECK_FALSE(r.converged());
        CHECK(r.diagnostics.find("left domain") != std::string::npos);
    }
}

TEST_CASE("the default tube check stops large transverse jets") {
    const auto J = catalog("perturbed", {.n = 2, .amplitude = 0.5});
    SolveConfig cfg;
    cfg.radius = 0.95;
    const auto r = solve_direct(J, JetCondition::at_origin({1.0, 0.03}), cfg);
    CHECK(r.verdict == Verdict::left_Bdelta);
    CHECK(r.tube_distance > 0.1 * J.domain().R1);
}

TEST_CASE("layered result does not depend on the rescale factor") {
    const auto J = catalog("perturbed", {.n = 2, .amplitude = 0.2});
    const auto jet = JetCondition::at_origin({1.0, cplx(0.01, 0.005)});
    SolveConfig cfg = envelope_config(Scheme::layered);
    cfg.rescale_N = 2.0;
    const auto a = solve(J, jet, cfg);
    cfg.rescale_N = 20.0;
    const auto b = solve(J, jet, cfg);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    CHECK(a.rescale_N == 2.0);
    CHECK(b.rescale_N == 20.0);
    CHECK(sup_gap(a, b) <= 1e-5);
}

TEST_CASE("layered falls back to the direct scheme in one dimension") {
    const auto J = catalog("integrable", {.n = 1});
    const auto jet = JetCondition::at_origin({0.5});
    const auto r = solve(J, jet, envelope_config(Scheme::layered));
    REQUIRE(r.converged());
    CHECK(r.residual <= 1e-12);
    CHECK(std::abs(r.disk.del_at_origin(0) - 0.5) <= 1e-12);
}
