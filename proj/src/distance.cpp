#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdisk/kobayashi.hpp"

namespace pdisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Point = std::vector<cplx>;

double rho(const ModelDomain& d, int i) { return i == 0 ? d.R : d.R1; }

bool inside(const ModelDomain& d, std::span<const cplx> p) {
    for (int i = 0; i < d.n; ++i)
        if (!(std::abs(p[i]) < rho(d, i))) return false;
    return true;
}

void check_endpoints(const AlmostComplexStructure& J, std::span<const cplx> p, std::span<const cplx> q) {
    const int n = J.n();
    if (static_cast<int>(p.size()) != n || static_cast<int>(q.size()) != n) throw Error("point has wrong size");
    if (!inside(J.domain(), p) || !inside(J.domain(), q)) throw Error("point outside domain");
}

Point lerp(const Point& a, const Point& b, double t) {
    Point out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
}

// ---------------------------------------------------------------- path

const double kGaussX[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281, 0.9305681557970263};
const double kGaussW[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269};

// Sum over segments of Gauss-Legendre samples of F; segment values are cached
// so a moved control point only re-evaluates its two neighbouring segments.
class PathFunctional {
public:
    PathFunctional(const AlmostComplexStructure& J, const KobayashiConfig& cfg) : J_(J), cfg_(cfg) {}

    double reset(const std::vector<Point>& path) {
        const std::size_t segs = path.size() - 1;
        seg_.assign(segs, 0.0);
        hint_.assign(4 * segs, 0.0);
        std::vector<std::size_t> all(segs);
        for (std::size_t s = 0; s < segs; ++s) all[s] = s;
        ++evaluations;
        return total(evaluate(path, all, seg_));
    }

    /// Value of `path`, which differs from the last accepted path only at control point k.
    double trial(const std::vector<Point>& path, int k, std::vector<double>& segs) {
        ++evaluations;
        segs = seg_;
        return total(evaluate(path, {static_cast<std::size_t>(k - 1), static_cast<std::size_t>(k)}, segs));
    }

    void accept(std::vector<double> segs) { seg_ = std::move(segs); }

    int evaluations = 0;

private:
    static double total(const std::vector<double>& segs) {
        double t = 0.0;
        for (double v : segs) t += v;
        return t;
    }

    const std::vector<double>& evaluate(const std::vector<Point>& path, const std::vector<std::size_t>& which,
                                        std::vector<double>& segs) {
        std::vector<TangentVector> samples;
        std::vector<std::size_t> slots;
        for (std::size_t s : which) {
            if (!inside(J_.domain(), path[s]) || !inside(J_.domain(), path[s + 1])) {
                segs[s] = kInf;
                continue;
            }
            Point d(path[s].size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = path[s + 1][i] - path[s][i];
            for (int g = 0; g < 4; ++g) {
                samples.push_back({lerp(path[s], path[s + 1], kGaussX[g]), d});
                slots.push_back(4 * s + g);
            }
        }
        std::vector<double> values(samples.size()), radii(samples.size(), 0.0);
        parallel_for(samples.size(), cfg_.threads, [&](std::size_t k) {
            KobayashiConfig c = cfg_;
            c.threads = 1;
            c.radius_hint = hint_[slots[k]];
            try {
                const PseudonormEstimate e = pseudonorm(J_, samples[k], c);
                values[k] = e.value;
                radii[k] = e.r_lo;
            } catch (const Error&) {
                values[k] = kInf;
            }
        });
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (radii[k] > 0.0 && std::isfinite(radii[k])) hint_[slots[k]] = radii[k];
            const std::size_t s = slots[k] / 4;
            if (slots[k] % 4 == 0) segs[s] = 0.0;
            segs[s] += kGaussW[slots[k] % 4] * values[k];
        }
        return segs;
    }

    const AlmostComplexStructure& J_;
    const KobayashiConfig& cfg_;
    std::vector<double> seg_;
    std::vector<double> hint_;
};

std::vector<Point> subdivide(const std::vector<Point>& path, int segments) {
    // resample the polyline at equal parameter steps
    const int old = static_cast<int>(path.size()) - 1;
    std::vector<Point> out;
    for (int k = 0; k <= segments; ++k) {
        const double t = static_cast<double>(k) * old / segments;
        const int s = std::min(static_cast<int>(t), old - 1);
        out.push_back(lerp(path[s], path[s + 1], t - s));
    }
    return out;
}

// first-improvement coordinate pattern search over the interior control points
double pattern_search(std::vector<Point>& path, double value, PathFunctional& F, const std::vector<double>& scale,
                      double initial_step, const PathConfig& pc) {
    const int n = static_cast<int>(scale.size());
    const int controls = static_cast<int>(path.size()) - 2;
    if (controls <= 0) return value;
    std::vector<double> step(static_cast<std::size_t>(2 * n));
    for (int c = 0; c < 2 * n; ++c) step[c] = initial_step * scale[c / 2];
    const int budget = F.evaluations + pc.max_evaluations;
    std::vector<double> segs;
    while (F.evaluations < budget) {
        bool improved = false;
        for (int k = 1; k <= controls && F.evaluations < budget; ++k) {
            for (int c = 0; c < 2 * n && F.evaluations < budget; ++c) {
                const cplx dir = (c % 2 == 0) ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
                for (double sign : {1.0, -1.0}) {
                    if (F.evaluations >= budget) break;
                    std::vector<Point> trial = path;
                    trial[k][c / 2] += sign * step[c] * dir;
                    const double v = F.trial(trial, k, segs);
                    if (v < value) {
                        value = v;
                        path = std::move(trial);
                        F.accept(std::move(segs));
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (!improved) {
            bool small = true;
            for (int c = 0; c < 2 * n; ++c) {
                step[c] *= 0.5;
                if (step[c] > pc.min_step * scale[c / 2]) small = false;
            }
            if (small) break;
        }
    }
    return value;
}

// ---------------------------------------------------------------- chain

// Unit-disk map g(w) = f_u(kappa R*(u) w) through `from` with g'(0) parallel to u.
class LinkDisk {
public:
    LinkDisk(const AlmostComplexStructure& J, Point from, const KobayashiConfig& cfg, double kappa)
        : J_(J), from_(std::move(from)), cfg_(cfg), kappa_(kappa) {}

    // empty result when the disk could not be produced
    std::vector<cplx> operator()(const Point& u, cplx w) const {
        const ModelDomain& dom = J_.domain();
        const int n = dom.n;
        const double r = kappa_ * moebius_radius(dom, from_, u);
        if (!std::isfinite(r)) return {};
        std::vector<cplx> out(static_cast<std::size_t>(n));
        if (J_.integrable()) {
            for (int i = 0; i < n; ++i) {
                const double rh = rho(dom, i);
                const cplx q = from_[i] / rh;
                const cplx x = u[i] * rh / (rh * rh - std::norm(from_[i])) * r * w;
                out[i] = rh * (q + x) / (1.0 + std::conj(q) * x);
            }
            return out;
        }
        const double rs = cfg_.probe_radius > 0.0 ? cfg_.probe_radius : 0.5 * dom.R;
        SolveConfig sc = cfg_.solve;
        sc.radius = rs;
        sc.delta = kInf;
        sc.scheme = Scheme::direct;
        sc.seed = moebius_seed(dom, from_, u, r, rs);
        const SolveResult res = solve_direct(J_, JetCondition{}, sc);
        if (!res.converged()) return {};
        return res.disk.value(w * rs);
    }

private:
    const AlmostComplexStructure& J_;
    Point from_;
    const KobayashiConfig& cfg_;
    double kappa_;
};

struct LinkSolution {
    bool matched = false;
    Point u;
    cplx w = 0.0;
    double mismatch = kInf;
};

// unknowns: u_i (i != j) and w as real pairs; u_j = 1
struct LinkUnknowns {
    int n = 0;
    int j = 0;

    Eigen::VectorXd pack(const Point& u, cplx w) const {
        Eigen::VectorXd x(2 * n);
        int k = 0;
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            x(k++) = u[i].real();
            x(k++) = u[i].imag();
        }
        x(k++) = w.real();
        x(k++) = w.imag();
        return x;
    }
    void unpack(const Eigen::VectorXd& x, Point& u, cplx& w) const {
        u.assign(static_cast<std::size_t>(n), 0.0);
        int k = 0;
        for (int i = 0; i < n; ++i) {
            if (i == j) {
                u[i] = 1.0;
                continue;
            }
            u[i] = cplx(x(k), x(k + 1));
            k += 2;
        }
        w = cplx(x(k), x(k + 1));
    }
};

LinkSolution solve_link(const AlmostComplexStructure& J, const Point& a, const Point& b, const KobayashiConfig& cfg) {
    const ModelDomain& dom = J.domain();
    const int n = dom.n;
    // integrable exact solution: w = t_j, u_i = t_i (rho_i^2 - |a_i|^2) / (rho_i r w)
    std::vector<cplx> t(static_cast<std::size_t>(n));
    int j = 0;
    for (int i = 0; i < n; ++i) {
        const double rh = rho(dom, i);
        const cplx q = a[i] / rh, y = b[i] / rh;
        t[i] = (y - q) / (1.0 - std::conj(q) * y);
        if (std::abs(t[i]) > std::abs(t[j])) j = i;
    }
    LinkSolution sol;
    if (std::abs(t[j]) == 0.0) {
        sol.matched = true;
        sol.u.assign(static_cast<std::size_t>(n), 0.0);
        sol.u[j] = 1.0;
        sol.mismatch = 0.0;
        return sol;
    }
    Point u(static_cast<std::size_t>(n));
    u[j] = 1.0;
    const double rj = rho(dom, j);
    const double rstar = (rj * rj - std::norm(a[j])) / rj;
    cplx w = t[j];
    for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        const double rh = rho(dom, i);
        u[i] = t[i] * (rh * rh - std::norm(a[i])) / (rh * rstar * w);
    }

    double kappa = 1.0;
    if (!J.integrable()) {
        try {
            const PseudonormEstimate est = pseudonorm(J, TangentVector{a, u}, cfg);
            kappa = std::min(1.0, est.r_lo / est.r_star);
        } catch (const Error&) {
            return sol;
        }
        w /= kappa;
    }

    const LinkUnknowns layout{n, j};
    const double scale = std::max(dom.R, dom.R1);
    const double fd = J.integrable() ? 1e-7 : 1e-4;
    const double target_tol = 1e-6 * scale;
    for (int attempt = 0; attempt < 3; ++attempt) {
        LinkDisk g(J, a, cfg, kappa);
        auto residual_of = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
            Point uu;
            cplx ww;
            layout.unpack(x, uu, ww);
            if (!(std::abs(ww) < 1.0)) return false;
            const auto val = g(uu, ww);
            if (val.empty()) return false;
            out.resize(2 * n);
            for (int i = 0; i < n; ++i) {
                out(2 * i) = (val[i] - b[i]).real();
                out(2 * i + 1) = (val[i] - b[i]).imag();
            }
            return true;
        };
        Eigen::VectorXd x = layout.pack(u, w);
        Eigen::VectorXd f;
        bool failed = !residual_of(x, f);
        for (int it = 0; !failed && it < 30; ++it) {
            const double norm = f.lpNorm<Eigen::Infinity>();
            if (norm < sol.mismatch) {
                sol.mismatch = norm;
                layout.unpack(x, sol.u, sol.w);
            }
            if (norm <= target_tol) break;
            Eigen::MatrixXd jac(2 * n, 2 * n);
            std::vector<Eigen::VectorXd> cols(static_cast<std::size_t>(2 * n));
            std::vector<char> ok(static_cast<std::size_t>(2 * n), 0);
            parallel_for(cols.size(), cfg.threads, [&](std::size_t c) {
                Eigen::VectorXd xp = x;
                xp(static_cast<Eigen::Index>(c)) += fd;
                ok[c] = residual_of(xp, cols[c]) ? 1 : 0;
            });
            for (std::size_t c = 0; c < cols.size(); ++c) {
                if (!ok[c]) {
                    failed = true;
                    break;
                }
                jac.col(static_cast<Eigen::Index>(c)) = (cols[c] - f) / fd;
            }
            if (failed) break;
            const Eigen::VectorXd dx = jac.colPivHouseholderQr().solve(-f);
            double damp = 1.0;
            bool stepped = false;
            for (int h = 0; h < 12; ++h, damp *= 0.5) {
                Eigen::VectorXd xn = x + damp * dx, fn;
                if (residual_of(xn, fn) && fn.lpNorm<Eigen::Infinity>() < norm) {
                    x = std::move(xn);
                    f = std::move(fn);
                    stepped = true;
                    break;
                }
            }
            if (!stepped) break;
        }
        if (!failed && f.size() == 2 * n && f.lpNorm<Eigen::Infinity>() < sol.mismatch) {
            sol.mismatch = f.lpNorm<Eigen::Infinity>();
            layout.unpack(x, sol.u, sol.w);
        }
        if (sol.mismatch <= target_tol) {
            sol.matched = true;
            return sol;
        }
        if (J.integrable()) break;
        kappa *= 0.98;
    }
    return sol;
}

Point point_on_guide(const std::vector<Point>& guide, double t) {
    const int segs = static_cast<int>(guide.size()) - 1;
    const double s = t * segs;
    const int k = std::min(static_cast<int>(s), segs - 1);
    return lerp(guide[k], guide[k + 1], s - k);
}

}  // namespace

DistanceResult path_distance(const AlmostComplexStructure& J, std::span<const cplx> p, std::span<const cplx> q,
                             const PathConfig& path_cfg, const KobayashiConfig& cfg) {
    check_endpoints(J, p, q);
    if (path_cfg.levels.empty()) throw Error("no refinement levels");
    DistanceResult res;
    res.method = "path_integral";
    const Point a(p.begin(), p.end()), b(q.begin(), q.end());
    if (a == b) {
        res.path = {a, b};
        res.level = path_cfg.levels.front();
        res.level_values.assign(path_cfg.levels.size(), 0.0);
        return res;
    }
    const ModelDomain& dom = J.domain();
    std::vector<double> scale(static_cast<std::size_t>(J.n()));
    for (int i = 0; i < J.n(); ++i) scale[i] = std::max(std::abs(b[i] - a[i]), 0.05 * rho(dom, i));

    PathFunctional F(J, cfg);
    std::vector<Point> best{a, b};
    double best_value = kInf;
    for (int level : path_cfg.levels) {
        if (level < 1) throw Error("segment count must be positive");
        std::vector<Point> path = subdivide(best, level);
        double value = F.reset(path);
        // finer levels start from a refined optimum and take proportionally smaller steps
        const double step = path_cfg.initial_step * std::min(1.0, 2.0 / level);
        value = pattern_search(path, value, F, scale, step, path_cfg);
        if (value < best_value) {
            best_value = value;
            best = std::move(path);
            res.level = level;
        }
        res.level_values.push_back(best_value);
    }
    if (!std::isfinite(best_value)) throw Error("no admissible path");
    res.value = best_value;
    res.path = std::move(best);
    return res;
}

DistanceResult chain_distance(const AlmostComplexStructure& J, std::span<const cplx> p, std::span<const cplx> q,
                              int max_links, const KobayashiConfig& cfg, const std::vector<Point>& guide) {
    check_endpoints(J, p, q);
    if (max_links < 1) throw Error("max_links must be positive");
    DistanceResult res;
    res.method = "chain";
    const Point a(p.begin(), p.end()), b(q.begin(), q.end());
    if (a == b) {
        res.path = {a};
        return res;
    }
    std::vector<Point> route = guide.size() >= 2 ? guide : std::vector<Point>{a, b};
    route.front() = a;
    route.back() = b;

    double best = kInf;
    std::vector<ChainLink> best_links;
    std::vector<Point> best_points;
    double partial = kInf;
    std::vector<ChainLink> partial_links;
    for (int m = 1; m <= max_links; ++m) {
        std::vector<Point> pts;
        for (int k = 0; k <= m; ++k) pts.push_back(point_on_guide(route, static_cast<double>(k) / m));
        std::vector<ChainLink> links;
        double cost = 0.0, mismatch = 0.0;
        bool all = true;
        for (int k = 0; k < m; ++k) {
            const LinkSolution s = solve_link(J, pts[k], pts[k + 1], cfg);
            ChainLink link{pts[k], pts[k + 1], s.u, s.w, std::atanh(std::min(std::abs(s.w), 1.0)), s.matched};
            all = all && s.matched;
            mismatch = std::max(mismatch, s.mismatch);
            cost += link.cost;
            links.push_back(std::move(link));
        }
        res.level_values.push_back(all ? cost : kInf);
        if (all && cost < best) {
            best = cost;
            best_links = links;
            best_points = pts;
            res.level = m;
        }
        if (!all && mismatch < partial) {
            partial = mismatch;
            partial_links = links;
        }
    }
    if (!std::isfinite(best)) {
        res.verdict = "no chain found";
        res.value = kInf;
        res.links = std::move(partial_links);
        return res;
    }
    res.value = best;
    res.links = std::move(best_links);
    res.path = std::move(best_points);
    return res;
}

}  // namespace pdisk
