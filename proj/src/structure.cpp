#include "pdisk/structure.hpp"

#include <algorithm>
#include <cmath>

namespace pdisk {

void ModelDomain::validate() const {
    if (n < 1) throw Error("dimension must be at least 1");
    if (!(R > 0.0) || !(R1 > 0.0)) throw Error("radii must be positive");
    if (R1 > R) throw Error("R1 must not exceed R");
}

double ModelDomain::gauge(std::span<const cplx> z) const {
    double g = std::abs(z[0]) / R;
    for (std::size_t k = 1; k < z.size(); ++k) g = std::max(g, std::abs(z[k]) / R1);
    return g;
}

bool ModelDomain::contains(std::span<const cplx> z, double slack) const { return gauge(z) <= 1.0 + slack; }

AlmostComplexStructure::AlmostComplexStructure(ModelDomain domain, std::shared_ptr<const CoefficientField> field,
                                               std::string label, Smoothness smoothness, bool adapted)
    : domain_(domain), field_(std::move(field)), label_(std::move(label)), smoothness_(smoothness), adapted_(adapted) {
    // R1 <= R is checked where domains are created from user input; rescaled
    // coordinates may legitimately have R1 > R.
    if (domain_.n < 1) throw Error("dimension must be at least 1");
    if (!(domain_.R > 0.0) || !(domain_.R1 > 0.0)) throw Error("radii must be positive");
    if (!field_) throw Error("missing coefficient field");
    if (field_->dimension() != domain_.n) throw Error("coefficient field dimension does not match domain");
}

std::vector<cplx> AlmostComplexStructure::coefficients(std::span<const cplx> z) const {
    std::vector<cplx> out(static_cast<std::size_t>(n() * n()));
    field_->evaluate(z, out);
    return out;
}

cplx AlmostComplexStructure::coefficient(int i, int m, std::span<const cplx> z) const {
    return coefficients(z)[static_cast<std::size_t>(i * n() + m)];
}

AlmostComplexStructure AlmostComplexStructure::with_adapted(bool adapted) const {
    AlmostComplexStructure out = *this;
    out.adapted_ = adapted;
    return out;
}

AlmostComplexStructure AlmostComplexStructure::with_domain(ModelDomain domain) const {
    return AlmostComplexStructure(domain, field_, label_, smoothness_, adapted_);
}

std::vector<cplx> central_disk_samples(double R, int n_samples) {
    std::vector<cplx> out;
    if (n_samples <= 0) return out;
    out.emplace_back(0.0, 0.0);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 1; k < n_samples; ++k) {
        const double r = R * std::sqrt(static_cast<double>(k) / (n_samples - 1));
        out.push_back(std::polar(r, golden * k));
    }
    return out;
}

AdaptedReport validate_adapted(const AlmostComplexStructure& J, int n_samples) {
    if (n_samples < 1) throw Error("n_samples must be positive");
    const int n = J.n();
    std::vector<cplx> z(static_cast<std::size_t>(n), 0.0), a(static_cast<std::size_t>(n * n));
    AdaptedReport rep;
    for (cplx w : central_disk_samples(J.domain().R, n_samples)) {
        z[0] = w;
        J.coefficients(z, a);
        for (cplx v : a) rep.max_violation = std::max(rep.max_violation, std::abs(v));
    }
    rep.adapted = rep.max_violation <= 1e-10;
    return rep;
}

namespace {

// complex (z, zbar) coordinates -> interleaved real coordinates
Eigen::MatrixXd to_real(const Eigen::MatrixXcd& Jc, int n) {
    // V^z = x + i y, V^zbar = x - i y
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        W(k, 2 * k) = 1.0;
        W(k, 2 * k + 1) = cplx(0.0, 1.0);
        W(n + k, 2 * k) = 1.0;
        W(n + k, 2 * k + 1) = cplx(0.0, -1.0);
    }
    const Eigen::MatrixXcd Jr = W.inverse() * Jc * W;
    return Jr.real();
}

}  // namespace

Eigen::MatrixXd j_from_coefficients(std::span<const cplx> a, int n) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < n; ++m) {
            M(i, n + m) = a[static_cast<std::size_t>(i * n + m)];
            M(n + i, m) = std::conj(a[static_cast<std::size_t>(i * n + m)]);
        }
    }
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        D(k, k) = cplx(0.0, 1.0);
        D(n + k, n + k) = cplx(0.0, -1.0);
    }
    const Eigen::MatrixXcd Jc = M.partialPivLu().solve(D * M);
    return to_real(Jc, n);
}

Eigen::MatrixXd standard_j(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        J(2 * k + 1, 2 * k) = 1.0;
        J(2 * k, 2 * k + 1) = -1.0;
    }
    return J;
}

double cr_coefficients_check(const Eigen::MatrixXd& J, const AlmostComplexStructure& a, std::span<const cplx> z,
                             std::span<const cplx> P) {
    const int n = a.n();
    if (J.rows() != 2 * n || J.cols() != 2 * n) throw Error("structure matrix has wrong size");
    const Eigen::MatrixXd sq = J * J + Eigen::MatrixXd::Identity(2 * n, 2 * n);
    if (sq.cwiseAbs().maxCoeff() > 1e-10) throw Error("not almost complex");
    const auto coeffs = a.coefficients(z);
    std::vector<cplx> Q(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m) Q[i] -= coeffs[static_cast<std::size_t>(i * n + m)] * std::conj(P[m]);
    auto df = [&](cplx xi) {
        Eigen::VectorXd v(2 * n);
        for (int k = 0; k < n; ++k) {
            const cplx w = P[k] * xi + Q[k] * std::conj(xi);
            v(2 * k) = w.real();
            v(2 * k + 1) = w.imag();
        }
        return v;
    };
    const cplx I(0.0, 1.0);
    double worst = 0.0;
    for (cplx xi : {cplx(1.0, 0.0), I}) {
        const Eigen::VectorXd r = df(I * xi) - J * df(xi);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

namespace {

class RescaledField : public CoefficientField {
public:
    RescaledField(std::shared_ptr<const CoefficientField> base, double N) : base_(std::move(base)), N_(N) {}
    int dimension() const override { return base_->dimension(); }
    bool identically_zero() const override { return base_->identically_zero(); }
    void evaluate(std::span<const cplx> z, std::span<cplx> out) const override {
        const int n = dimension();
        cplx buf[16];
        std::vector<cplx> heap;
        cplx* w = buf;
        if (n > 16) {
            heap.resize(static_cast<std::size_t>(n));
            w = heap.data();
        }
        w[0] = z[0];
        for (int k = 1; k < n; ++k) w[k] = z[k] / N_;
        base_->evaluate(std::span<const cplx>(w, static_cast<std::size_t>(n)), out);
        for (int i = 0; i < n; ++i) {
            for (int m = 0; m < n; ++m) {
                if (i == 0 && m > 0) out[static_cast<std::size_t>(i * n + m)] /= N_;
                if (i > 0 && m == 0) out[static_cast<std::size_t>(i * n + m)] *= N_;
            }
        }
    }
    const std::shared_ptr<const CoefficientField>& base() const { return base_; }
    double factor() const { return N_; }

private:
    std::shared_ptr<const CoefficientField> base_;
    double N_;
};

}  // namespace

AlmostComplexStructure rescale(const AlmostComplexStructure& J, double N) {
    if (!(N > 0.0) || !std::isfinite(N)) throw Error("rescale factor must be positive");
    if (N == 1.0) return J;
    ModelDomain d = J.domain();
    d.R1 *= N;
    std::shared_ptr<const CoefficientField> field;
    if (auto r = std::dynamic_pointer_cast<const RescaledField>(J.field())) {
        const double combined = r->factor() * N;
        field = combined == 1.0 ? r->base() : std::make_shared<RescaledField>(r->base(), combined);
    } else {
        field = std::make_shared<RescaledField>(J.field(), N);
    }
    return AlmostComplexStructure(d, field, J.label(), J.smoothness(), J.adapted());
}

}  // namespace pdisk
