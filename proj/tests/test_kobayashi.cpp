#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pdisk/kobayashi.hpp"

using namespace pdisk;

namespace {

AlmostComplexStructure disk_d1() { return catalog("integrable", {.n = 1, .R = 1.0}); }

AlmostComplexStructure product(double R, double R1) { return catalog("integrable", {.n = 2, .R = R, .R1 = R1}); }

// composite Simpson rule for the Poincare length of [0, x]
double poincare_length(double x) {
    const int n = 2000;
    const double h = x / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double t = k * h;
        const double f = 1.0 / (1.0 - t * t);
        s += (k == 0 || k == n) ? f : (k % 2 ? 4.0 * f : 2.0 * f);
    }
    return s * h / 3.0;
}

cplx automorphism(cplx a, double phase, cplx z) { return std::polar(1.0, phase) * (z - a) / (1.0 - std::conj(a) * z); }

// Largest R with sup_{|zeta| < R} |f| < 1, for a polynomial f, by sampling circles.
double containment_radius(const std::vector<cplx>& c) {
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 50; ++it) {
        const double r = 0.5 * (lo + hi);
        double sup = 0.0;
        for (int t = 0; t < 256; ++t) {
            const cplx z = std::polar(r, 2.0 * kPi * t / 256);
            cplx v = 0.0;
            for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
            sup = std::max(sup, std::abs(v));
        }
        (sup < 1.0 ? lo : hi) = r;
    }
    return lo;
}

}  // namespace

TEST_CASE("poincare metric and distance") {
    CHECK(poincare_metric(0.0, cplx(0.3, 0.4)) == doctest::Approx(0.5));
    CHECK(poincare_distance(0.0, 0.0) == 0.0);
    CHECK(poincare_distance(0.0, 0.5) == doctest::Approx(poincare_length(0.5)).epsilon(1e-10));
    CHECK(poincare_distance(0.0, 0.5) == doctest::Approx(0.5493061443).epsilon(1e-9));
    CHECK_THROWS_WITH(poincare_metric(1.0, 1.0), "boundary point");
    CHECK_THROWS_WITH(poincare_distance(0.0, cplx(0.0, 1.0)), "boundary point");
}

TEST_CASE("property: poincare distance is invariant under disk automorphisms") {
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        const cplx z = rng.in_disk(0.95), w = rng.in_disk(0.95), a = rng.in_disk(0.9);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        const double d = poincare_distance(z, w);
        CHECK(poincare_distance(w, z) == doctest::Approx(d).epsilon(1e-12));
        CHECK(poincare_distance(automorphism(a, phase, z), automorphism(a, phase, w)) ==
              doctest::Approx(d).epsilon(1e-9));
    }
}

TEST_CASE("pseudonorm on the unit disk matches the Schwarz bound") {
    // brute force: no polynomial f with f(0) = 0, f'(0) = 1 maps a disk larger than D_1 into D_1
    Rng rng(3);
    double best = 0.0;
    for (int k = 0; k < 300; ++k) {
        std::vector<cplx> c{0.0, 1.0};
        const int deg = 2 + k % 4;
        for (int j = 2; j <= deg; ++j) c.push_back(rng.in_disk(k < 150 ? 0.3 : 0.05));
        best = std::max(best, containment_radius(c));
    }
    best = std::max(best, containment_radius({0.0, 1.0}));
    CHECK(best <= 1.0 + 1e-9);
    CHECK(best >= 1.0 - 1e-9);

    const auto J = disk_d1();
    const auto est = pseudonorm(J, TangentVector{{0.0}, {1.0}});
    CHECK(est.value == doctest::Approx(1.0 / best).epsilon(1e-2));
    CHECK(est.witness.converged());
}

TEST_CASE("pseudonorm on a product of disks matches the product formula") {
    const auto J = product(1.0, 0.5);
    const auto est = pseudonorm(J, TangentVector{{0.0, 0.0}, {1.0, 1.0}});
    CHECK(est.value == doctest::Approx(2.0).epsilon(0.05));

    Rng rng(8);
    for (int k = 0; k < 10; ++k) {
        const std::vector<cplx> u{rng.in_disk(1.0), rng.in_disk(1.0)};
        // oracle: affine disks zeta -> u zeta fit on D_r iff r |u1| < 1 and r |u2| < 0.5
        double r_best = 0.0;
        for (int s = 1; s <= 20000; ++s) {
            const double r = 1e-3 * s;
            if (r * std::abs(u[0]) < 1.0 && r * std::abs(u[1]) < 0.5) r_best = r;
        }
        const auto e = pseudonorm(J, TangentVector{{0.0, 0.0}, u});
        CHECK(e.value == doctest::Approx(1.0 / r_best).epsilon(0.05));
        CHECK(e.value == doctest::Approx(std::max(std::abs(u[0]), 2.0 * std::abs(u[1]))).epsilon(1e-2));
    }
}

TEST_CASE("pseudonorm off the origin on the unit disk is the Poincare metric") {
    const auto J = disk_d1();
    for (cplx p : {cplx(0.3, 0.0), cplx(-0.2, 0.5), cplx(0.0, -0.6)}) {
        const auto e = pseudonorm(J, TangentVector{{p}, {cplx(0.5, 0.5)}});
        CHECK(e.value == doctest::Approx(poincare_metric(p, cplx(0.5, 0.5))).epsilon(1e-2));
    }
}

TEST_CASE("pseudonorm homogeneity and zero vector") {
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0});
    const TangentVector v{{0.1, 0.05}, {0.4, cplx(0.2, 0.3)}};
    const double f = pseudonorm(J, v).value;
    TangentVector v2 = v;
    for (auto& c : v2.u) c *= 2.0;
    CHECK(pseudonorm(J, v2).value == 2.0 * f);
    TangentVector v3 = v;
    for (auto& c : v3.u) c *= cplx(0.0, -3.0);
    CHECK(pseudonorm(J, v3).value == doctest::Approx(3.0 * f).epsilon(1e-12));

    const auto zero = pseudonorm(J, TangentVector{{0.1, 0.05}, {0.0, 0.0}});
    CHECK(zero.value == 0.0);
    CHECK(zero.witness.converged());
}

TEST_CASE("bracket validity") {
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0});
    KobayashiConfig cfg;
    for (const TangentVector& v : {TangentVector{{0.0, 0.0}, {1.0, 0.0}}, TangentVector{{0.2, 0.1}, {0.3, 0.7}},
                                   TangentVector{{-0.1, 0.3}, {0.0, 1.0}}}) {
        const auto e = pseudonorm(J, v, cfg);
        CHECK(e.witness.converged());
        CHECK(e.r_lo <= e.r_hi);
        CHECK(e.r_hi / e.r_lo - 1.0 <= cfg.tol * (1.0 + 1e-9));
        bool success_at_lo = false, failure_at_hi = false;
        for (const auto& pr : e.probes) {
            success_at_lo = success_at_lo || (pr.success && pr.radius == e.r_lo);
            failure_at_hi = failure_at_hi || (!pr.success && pr.radius == e.r_hi);
            if (pr.success) CHECK(pr.radius <= e.r_lo);
            if (!pr.success) CHECK(pr.radius >= e.r_hi);
        }
        CHECK(success_at_lo);
        CHECK(failure_at_hi);
    }
}

TEST_CASE("property: sub-polydisc inclusion does not decrease the pseudonorm") {
    const auto big = product(1.0, 0.5);
    const auto small = product(0.8, 0.4);
    KobayashiConfig cfg;
    Rng rng(21);
    for (int k = 0; k < 12; ++k) {
        const TangentVector v{{rng.in_disk(0.5), rng.in_disk(0.25)}, {rng.in_disk(1.0), rng.in_disk(1.0)}};
        const double fs = pseudonorm(small, v, cfg).value;
        const double fb = pseudonorm(big, v, cfg).value;
        CHECK(fs >= fb * (1.0 - 2.0 * cfg.tol));
    }
}

TEST_CASE("semicontinuity probe") {
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0});
    const TangentVector v0{{0.0, 0.0}, {1.0, 0.3}};
    const auto none = semicontinuity_probe(J, v0, 0.0, 4, 1);
    CHECK(none.excess == 0.0);
    const auto rep = semicontinuity_probe(J, v0, 0.02, 16, 2);
    CHECK(rep.values.size() == 16);
    CHECK(rep.excess <= 0.05 * rep.base_value);

    const auto flat = product(1.0, 1.0);
    const auto cont = semicontinuity_probe(flat, v0, 1e-3, 16, 3);
    CHECK(cont.excess <= 1e-2 * cont.base_value);
}

TEST_CASE("path distance on the unit disk") {
    const auto J = disk_d1();
    const std::vector<cplx> p{0.0}, q{0.5};
    const auto d = path_distance(J, p, q);
    CHECK(d.method == "path_integral");
    CHECK(d.value == doctest::Approx(std::atanh(0.5)).epsilon(0.03));
    for (std::size_t k = 1; k < d.level_values.size(); ++k) CHECK(d.level_values[k] <= d.level_values[k - 1]);
    CHECK(path_distance(J, q, q).value == 0.0);
    CHECK_THROWS_WITH(path_distance(J, p, std::vector<cplx>{1.2}), "point outside domain");
}

TEST_CASE("property: path distance is a pseudodistance on sampled triples") {
    const auto J = disk_d1();
    KobayashiConfig cfg;
    PathConfig pc;
    pc.levels = {1, 2, 4};
    Rng rng(17);
    for (int k = 0; k < 3; ++k) {
        const std::vector<cplx> a{rng.in_disk(0.6)}, b{rng.in_disk(0.6)}, c{rng.in_disk(0.6)};
        const double ab = path_distance(J, a, b, pc, cfg).value;
        const double ba = path_distance(J, b, a, pc, cfg).value;
        const double bc = path_distance(J, b, c, pc, cfg).value;
        const double ac = path_distance(J, a, c, pc, cfg).value;
        CHECK(std::abs(ab - ba) <= cfg.tol * std::max(ab, ba));
        CHECK(ac <= ab + bc + 2.0 * cfg.tol);
        // the path value approximates the Poincare distance from above
        CHECK(ab >= poincare_distance(a[0], b[0]) * (1.0 - cfg.tol));
        CHECK(ab <= poincare_distance(a[0], b[0]) * 1.03);
    }
}

TEST_CASE("chain distance on the unit disk is the Poincare distance") {
    const auto J = disk_d1();
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        const std::vector<cplx> p{rng.in_disk(0.9)}, q{rng.in_disk(0.9)};
        const auto d = chain_distance(J, p, q, 2);
        REQUIRE(d.verdict == "ok");
        CHECK(d.method == "chain");
        CHECK(d.value == doctest::Approx(poincare_distance(p[0], q[0])).epsilon(0.03));
        CHECK(d.level >= 1);
        for (const auto& link : d.links) CHECK(link.matched);
    }
    CHECK(chain_distance(J, std::vector<cplx>{0.2}, std::vector<cplx>{0.2}).value == 0.0);
}

TEST_CASE("chain and path agree on the product of disks") {
    const auto J = product(1.0, 1.0);
    KobayashiConfig cfg;
    const std::vector<cplx> p{cplx(0.1, 0.1), -0.2}, q{-0.3, cplx(0.2, 0.4)};
    const auto chain = chain_distance(J, p, q, 2, cfg);
    const auto path = path_distance(J, p, q, {}, cfg);
    REQUIRE(chain.verdict == "ok");
    // product oracle: the larger of the factor distances
    const double oracle = std::max(poincare_distance(p[0], q[0]), poincare_distance(p[1], q[1]));
    CHECK(chain.value == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(std::abs(chain.value - path.value) <= 0.05 * chain.value);
    CHECK(path.value <= chain.value + 2.0 * cfg.tol);
}

TEST_CASE("chain distance on the perturbed structure") {
    const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0});
    const std::vector<cplx> p{0.1, -0.2}, q{-0.3, 0.4};
    const auto d = chain_distance(J, p, q, 1);
    REQUIRE(d.verdict == "ok");
    const auto& link = d.links.at(0);
    CHECK(link.matched);
    CHECK(std::abs(link.w) < 1.0);
    CHECK(d.value == doctest::Approx(std::atanh(std::abs(link.w))));
    // the perturbation is small, so the value stays near the product value
    const double flat = std::max(poincare_distance(p[0], q[0]), poincare_distance(p[1], q[1]));
    CHECK(std::abs(d.value - flat) <= 0.1 * flat);
}

TEST_CASE("unit directions") {
    const auto dirs = unit_directions(3, 9, 4);
    CHECK(dirs.size() == 9);
    for (const auto& u : dirs) {
        double m = 0.0;
        for (cplx c : u) m = std::max(m, std::abs(c));
        CHECK(m == doctest::Approx(1.0));
    }
    CHECK(unit_directions(3, 9, 4) == dirs);
}

TEST_CASE("hyperbolicity scan") {
    SUBCASE("unit bidisc at the center") {
        const auto rep = hyperbolicity_scan(product(1.0, 1.0), "center", 8, 1);
        CHECK(rep.min_value == doctest::Approx(1.0).epsilon(0.05));
        CHECK(rep.verdict == "hyperbolic evidence");
        CHECK(rep.c_k == rep.max_value);
    }
    SUBCASE("large domains flatten the pseudonorm") {
        double prev = std::numeric_limits<double>::infinity();
        for (double R : {1.0, 10.0, 100.0, 1e4}) {
            const auto rep = hyperbolicity_scan(product(R, R), "center", 4, 1);
            CHECK(rep.min_value == doctest::Approx(1.0 / R).epsilon(0.05));
            CHECK(rep.min_value < prev);
            prev = rep.min_value;
        }
        CHECK(hyperbolicity_scan(product(1e4, 1e4), "center", 4, 1).verdict == "no hyperbolicity evidence");
    }
    SUBCASE("perturbed structure, full region") {
        KobayashiConfig cfg;
        const auto J = catalog("perturbed", {.n = 2, .R = 1.0, .R1 = 1.0});
        const auto rep = hyperbolicity_scan(J, "full", 4, 9, cfg);
        CHECK(rep.entries.size() == 5 * 4);
        CHECK(std::isfinite(rep.max_value));
        CHECK(rep.min_value > 0.0);
        cfg.threads = 4;
        const auto again = hyperbolicity_scan(J, "full", 4, 9, cfg);
        for (std::size_t k = 0; k < rep.entries.size(); ++k) CHECK(again.entries[k].value == rep.entries[k].value);
    }
}
