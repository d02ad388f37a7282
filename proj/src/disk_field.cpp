#include "pdisk/disk_field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace pdisk {

namespace {

// Radial evaluation of every angular frequency k in [-d, d] on ring radius r:
// out[k + d] = sum_{l - m = k} c_{l,m} r^{l+m}.
Eigen::FFT<double>& grid_fft() {
    thread_local Eigen::FFT<double> fft = [] {
        Eigen::FFT<double> f;
        f.SetFlag(Eigen::FFT<double>::Unscaled);
        return f;
    }();
    return fft;
}

void ring_frequencies(const BiPoly& p, double r, std::vector<cplx>& out) {
    const int d = p.degree();
    out.assign(2 * d + 1, 0.0);
    double rs = 1.0;
    const auto c = p.coeffs();
    for (int s = 0; s <= d; ++s) {
        for (int m = 0; m <= s; ++m) {
            const int k = s - 2 * m;
            out[k + d] += c[BiPoly::index(s - m, m)] * rs;
        }
        rs *= r;
    }
}

// sum_{k=lo..hi} f[k] w^(k - d) for |w| = 1, by Horner in w starting from the
// top frequency; shift = w^(lo - d).
cplx angular_sum(const std::vector<cplx>& f, int lo, int hi, cplx w, cplx shift) {
    cplx acc = 0.0;
    for (int k = hi; k >= lo; --k) acc = acc * w + f[k];
    return acc * shift;
}

// index range of the nonzero angular frequencies of p (in ring_frequencies order)
std::pair<int, int> frequency_band(const BiPoly& p) {
    const int d = p.degree();
    int lo = 2 * d + 1, hi = -1;
    const auto c = p.coeffs();
    for (int s = 0; s <= d; ++s)
        for (int m = 0; m <= s; ++m)
            if (c[BiPoly::index(s - m, m)] != cplx(0.0)) {
                lo = std::min(lo, s - 2 * m + d);
                hi = std::max(hi, s - 2 * m + d);
            }
    return {lo, hi};
}

struct FrequencyPlan {
    int k = 0;
    std::vector<int> powers;  // total degrees s = |k| + 2j
    Eigen::MatrixXd pinv;     // (J+1) x n_radial, in the scaled variable r / R
};

struct FitPlan {
    int d_max = 0;
    std::vector<FrequencyPlan> freqs;  // k = -d .. d
};

using PlanKey = std::tuple<double, int, int, int>;

std::shared_ptr<const FitPlan> fit_plan(const PolarGrid& grid, int d_max) {
    static std::mutex mutex;
    static std::map<PlanKey, std::shared_ptr<const FitPlan>> cache;
    const PlanKey key{grid.radius(), grid.n_radial(), grid.n_angular(), d_max};
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto plan = std::make_shared<FitPlan>();
    plan->d_max = d_max;
    const auto radii = grid.radii();
    for (int k = -d_max; k <= d_max; ++k) {
        FrequencyPlan fp;
        fp.k = k;
        for (int s = std::abs(k); s <= d_max; s += 2) fp.powers.push_back(s);
        Eigen::MatrixXd basis(grid.n_radial(), fp.powers.size());
        for (int j = 0; j < grid.n_radial(); ++j) {
            const double t = radii[j] / grid.radius();
            for (std::size_t col = 0; col < fp.powers.size(); ++col) basis(j, col) = std::pow(t, fp.powers[col]);
        }
        fp.pinv = basis.completeOrthogonalDecomposition().pseudoInverse();
        plan->freqs.push_back(std::move(fp));
    }
    std::lock_guard<std::mutex> lock(mutex);
    auto [it, inserted] = cache.emplace(key, std::move(plan));
    return it->second;
}

BiPoly fit_component(const PolarGrid& grid, const FitPlan& plan, std::span<const cplx> samples) {
    const int d = plan.d_max;
    const int na = grid.n_angular();
    const int nr = grid.n_radial();
    // Fourier coefficients per ring for k = -d..d
    Eigen::MatrixXcd fourier(2 * d + 1, nr);
    std::vector<cplx> ring(na), spec;
    for (int j = 0; j < nr; ++j) {
        std::copy_n(samples.data() + static_cast<std::size_t>(j) * na, na, ring.begin());
        grid_fft().fwd(spec, ring);
        for (int k = -d; k <= d; ++k) fourier(k + d, j) = spec[((k % na) + na) % na] / static_cast<double>(na);
    }
    BiPoly p(d);
    for (const auto& fp : plan.freqs) {
        const Eigen::VectorXcd rhs = fourier.row(fp.k + d).transpose();
        const Eigen::VectorXcd a = fp.pinv.cast<cplx>() * rhs;
        for (std::size_t col = 0; col < fp.powers.size(); ++col) {
            const int s = fp.powers[col];
            const int l = (s + fp.k) / 2;
            const int m = (s - fp.k) / 2;
            p.set(l, m, a(col) / std::pow(grid.radius(), s));
        }
    }
    return p;
}

}  // namespace

std::vector<cplx> evaluate_on_grid(const BiPoly& p, const PolarGrid& grid) {
    std::vector<cplx> out(grid.size(), 0.0);
    if (p.degree() < 0) return out;
    const int d = p.degree();
    const auto [lo, hi] = frequency_band(p);
    if (hi < lo) return out;
    const int na = grid.n_angular();
    // the angles are 2 pi t / na, so frequencies fold mod na onto one inverse DFT per ring
    std::vector<cplx> freq, folded(na), ring;
    for (int j = 0; j < grid.n_radial(); ++j) {
        ring_frequencies(p, grid.radii()[j], freq);
        std::fill(folded.begin(), folded.end(), cplx(0.0));
        for (int k = lo; k <= hi; ++k) folded[(((k - d) % na) + na) % na] += freq[k];
        grid_fft().inv(ring, folded);
        std::copy(ring.begin(), ring.end(), out.begin() + static_cast<std::ptrdiff_t>(j) * na);
    }
    return out;
}

std::vector<cplx> evaluate_on_boundary(const BiPoly& p, const PolarGrid& grid) {
    std::vector<cplx> out(grid.n_angular(), 0.0);
    if (p.degree() < 0) return out;
    const int d = p.degree();
    const auto [lo, hi] = frequency_band(p);
    if (hi < lo) return out;
    std::vector<cplx> freq;
    ring_frequencies(p, grid.radius(), freq);
    for (int t = 0; t < grid.n_angular(); ++t)
        out[t] = angular_sum(freq, lo, hi, std::polar(1.0, grid.angle(t)), std::polar(1.0, (lo - d) * grid.angle(t)));
    return out;
}

DiskField::DiskField(GridPtr grid, std::vector<BiPoly> polys)
    : grid_(std::move(grid)), polys_(std::move(polys)) {
    samples_.reserve(polys_.size());
    for (const auto& p : polys_) samples_.push_back(evaluate_on_grid(p, *grid_));
}

DiskField::DiskField(GridPtr grid, std::vector<BiPoly> polys, NodeSamples samples, double fit_residual)
    : grid_(std::move(grid)), polys_(std::move(polys)), samples_(std::move(samples)), fit_residual_(fit_residual) {}

DiskField DiskField::zero(GridPtr grid, int components) {
    return DiskField(std::move(grid), std::vector<BiPoly>(components, BiPoly::constant(0.0)));
}

int DiskField::degree() const {
    int d = -1;
    for (const auto& p : polys_) d = std::max(d, p.degree());
    return d;
}

std::vector<cplx> DiskField::value(cplx zeta) const {
    std::vector<cplx> out;
    out.reserve(polys_.size());
    for (const auto& p : polys_) out.push_back(p(zeta));
    return out;
}

DiskField DiskField::on_grid(GridPtr grid) const { return DiskField(std::move(grid), polys_); }

DiskField DiskField::component(int i) const {
    return DiskField(grid_, {polys_[i]}, {samples_[i]}, fit_residual_);
}

DiskField& DiskField::operator+=(const DiskField& o) {
    for (std::size_t i = 0; i < polys_.size(); ++i) {
        polys_[i] += o.polys_[i];
        for (std::size_t k = 0; k < samples_[i].size(); ++k) samples_[i][k] += o.samples_[i][k];
    }
    fit_residual_ += o.fit_residual_;
    return *this;
}

DiskField& DiskField::operator-=(const DiskField& o) {
    for (std::size_t i = 0; i < polys_.size(); ++i) {
        polys_[i] -= o.polys_[i];
        for (std::size_t k = 0; k < samples_[i].size(); ++k) samples_[i][k] -= o.samples_[i][k];
    }
    fit_residual_ += o.fit_residual_;
    return *this;
}

DiskField& DiskField::operator*=(cplx s) {
    for (auto& p : polys_) p *= s;
    for (auto& comp : samples_) {
        for (auto& v : comp) v *= s;
    }
    fit_residual_ *= std::abs(s);
    return *this;
}

DiskField fit_polynomial(GridPtr grid, const NodeSamples& samples, int d_max) {
    if (d_max < 0) throw Error("fit_polynomial: d_max must be nonnegative");
    const std::size_t n_coeffs = BiPoly::size_for(d_max);
    if (grid->size() < n_coeffs || grid->n_angular() <= 2 * d_max || grid->n_radial() < d_max / 2 + 1) {
        throw Error("insufficient nodes");
    }
    for (const auto& comp : samples) {
        if (comp.size() != grid->size()) throw Error("fit_polynomial: sample count does not match grid");
    }
    const auto plan = fit_plan(*grid, d_max);
    std::vector<BiPoly> polys;
    polys.reserve(samples.size());
    double residual = 0.0;
    for (const auto& comp : samples) {
        polys.push_back(fit_component(*grid, *plan, comp));
        const auto back = evaluate_on_grid(polys.back(), *grid);
        for (std::size_t k = 0; k < comp.size(); ++k) residual = std::max(residual, std::abs(back[k] - comp[k]));
    }
    return DiskField(std::move(grid), std::move(polys), samples, residual);
}

DiskField fit_polynomial(GridPtr grid, std::span<const cplx> samples, int d_max) {
    return fit_polynomial(std::move(grid), NodeSamples{std::vector<cplx>(samples.begin(), samples.end())}, d_max);
}

DiskField dbar(const DiskField& f) {
    std::vector<BiPoly> out;
    out.reserve(f.components());
    for (const auto& p : f.polys()) out.push_back(p.dbar());
    return DiskField(f.grid_ptr(), std::move(out));
}

DiskField del(const DiskField& f) {
    std::vector<BiPoly> out;
    out.reserve(f.components());
    for (const auto& p : f.polys()) out.push_back(p.del());
    return DiskField(f.grid_ptr(), std::move(out));
}

}  // namespace pdisk
