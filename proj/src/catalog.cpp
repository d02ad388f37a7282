#include <algorithm>
#include <cmath>

#include "pdisk/structure.hpp"

namespace pdisk {

namespace {

class ZeroField : public CoefficientField {
public:
    explicit ZeroField(int n) : n_(n) {}
    int dimension() const override { return n_; }
    bool identically_zero() const override { return true; }
    void evaluate(std::span<const cplx>, std::span<cplx> out) const override { std::fill(out.begin(), out.end(), 0.0); }

private:
    int n_;
};

cplx ipow(cplx z, int k) {
    cplx r = 1.0;
    for (; k > 0; --k) r *= z;
    return r;
}

class PolynomialField : public CoefficientField {
public:
    PolynomialField(int n, std::vector<PolyTerm> terms) : n_(n), terms_(std::move(terms)) {
        for (const auto& t : terms_) {
            if (t.i < 0 || t.i >= n || t.mbar < 0 || t.mbar >= n) throw Error("term index out of range");
            if (static_cast<int>(t.alpha.size()) != n || static_cast<int>(t.beta.size()) != n)
                throw Error("term multi-index has wrong length");
            for (int k = 0; k < n; ++k)
                if (t.alpha[k] < 0 || t.beta[k] < 0) throw Error("negative exponent");
            if (t.c != 0.0) zero_ = false;
        }
    }
    int dimension() const override { return n_; }
    bool identically_zero() const override { return zero_; }
    void evaluate(std::span<const cplx> z, std::span<cplx> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& t : terms_) {
            cplx v = t.c;
            for (int k = 0; k < n_; ++k) {
                if (t.alpha[k]) v *= ipow(z[k], t.alpha[k]);
                if (t.beta[k]) v *= ipow(std::conj(z[k]), t.beta[k]);
            }
            out[static_cast<std::size_t>(t.i * n_ + t.mbar)] += v;
        }
    }

private:
    int n_;
    std::vector<PolyTerm> terms_;
    bool zero_ = true;
};

// a^I_1bar(z) = A^I(z^1, z); every other coefficient vanishes.
class LinearTransverseField : public CoefficientField {
public:
    explicit LinearTransverseField(LinearModel model) : model_(std::move(model)) {}
    int dimension() const override { return model_.n; }
    bool identically_zero() const override { return model_.is_zero(); }
    void evaluate(std::span<const cplx> z, std::span<cplx> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
        for (int I = 1; I < model_.n; ++I) out[static_cast<std::size_t>(I * model_.n)] = model_.eval(I, z[0], z);
    }

private:
    LinearModel model_;
};

// Smooth, non-polynomial coefficients vanishing to first order on the
// central disk and localized to the transverse radius R1:
// a^i_mbar = amp w_im s(z^I) g(z^1) exp(-sum |z^I|^2 / R1^2),
// s = sum_I (z^I + conj(z^I) / 2), w_im = 1 / (i + m + 1).
class PerturbedField : public CoefficientField {
public:
    PerturbedField(int n, double R, double R1, double amplitude) : n_(n), R_(R), R1_(R1), amp_(amplitude) {}
    int dimension() const override { return n_; }
    bool identically_zero() const override { return amp_ == 0.0 || n_ < 2; }
    void evaluate(std::span<const cplx> z, std::span<cplx> out) const override {
        cplx s = 0.0;
        double q = 0.0;
        for (int k = 1; k < n_; ++k) {
            s += z[k] + 0.5 * std::conj(z[k]);
            q += std::norm(z[k]);
        }
        const double x = z[0].real() / R_, y = z[0].imag() / R_;
        const cplx g(std::cos(x), 0.5 * std::sin(y));
        const cplx base = amp_ * s * g * std::exp(-q / (R1_ * R1_));
        for (int i = 0; i < n_; ++i)
            for (int m = 0; m < n_; ++m) out[static_cast<std::size_t>(i * n_ + m)] = base / double(i + m + 1);
    }

private:
    int n_;
    double R_, R1_, amp_;
};

ModelDomain domain_from(const CatalogParams& p) {
    ModelDomain d{p.R, p.R1 > 0.0 ? p.R1 : p.R / 10.0, p.n};
    d.validate();
    return d;
}

}  // namespace

LinearModel LinearModel::zero(int n) {
    LinearModel m;
    m.n = n;
    m.p.assign(static_cast<std::size_t>(n * n), BiPoly());
    m.pbar.assign(static_cast<std::size_t>(n * n), BiPoly());
    return m;
}

bool LinearModel::is_zero() const {
    for (const auto& q : p)
        if (q.max_abs() != 0.0) return false;
    for (const auto& q : pbar)
        if (q.max_abs() != 0.0) return false;
    return true;
}

cplx LinearModel::eval(int I, cplx zeta, std::span<const cplx> z) const {
    cplx v = 0.0;
    for (int m = 1; m < n; ++m) {
        const BiPoly& a = holo(I, m);
        const BiPoly& b = anti(I, m);
        if (a.degree() >= 0) v += a(zeta) * z[m];
        if (b.degree() >= 0) v += b(zeta) * std::conj(z[m]);
    }
    return v;
}

BiPoly LinearModel::apply(int I, std::span<const BiPoly> P) const {
    BiPoly out;
    for (int m = 1; m < n; ++m) {
        const BiPoly& a = holo(I, m);
        const BiPoly& b = anti(I, m);
        if (a.max_abs() != 0.0) out += a * P[m];
        if (b.max_abs() != 0.0) out += b * P[m].conj();
    }
    return out;
}

AlmostComplexStructure polynomial_structure(ModelDomain domain, std::vector<PolyTerm> terms, std::string label) {
    domain.validate();
    auto field = std::make_shared<PolynomialField>(domain.n, std::move(terms));
    AlmostComplexStructure J(domain, field, std::move(label));
    return J.with_adapted(validate_adapted(J).adapted);
}

std::vector<std::string> catalog_names() { return {"integrable", "linear-transverse", "perturbed", "product-disk"}; }

AlmostComplexStructure catalog(const std::string& name, const CatalogParams& params) {
    const ModelDomain d = domain_from(params);
    if (name == "integrable" || name == "product-disk")
        return AlmostComplexStructure(d, std::make_shared<ZeroField>(d.n), name, {}, true);
    if (name == "linear-transverse") {
        LinearModel model = params.linear;
        if (model.p.empty()) {
            model = LinearModel::zero(d.n);
            for (int I = 1; I < d.n; ++I) model.anti(I, I) = BiPoly::constant(params.amplitude);
        }
        if (model.n != d.n) throw Error("linear model dimension does not match n");
        return AlmostComplexStructure(d, std::make_shared<LinearTransverseField>(std::move(model)), name, {}, true);
    }
    if (name == "perturbed")
        return AlmostComplexStructure(d, std::make_shared<PerturbedField>(d.n, d.R, d.R1, params.amplitude), name, {},
                                      true);
    throw Error("unknown structure: " + name);
}

}  // namespace pdisk
