#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdisk/bipoly.hpp"

namespace pdisk {

/// The polydisc {|z^1| <= R, |z^k| <= R1 for k >= 2} in C^n.
struct ModelDomain {
    double R = 1.0;
    double R1 = 0.1;
    int n = 1;

    /// Throws on non-positive radii, n < 1 or R1 > R.
    void validate() const;
    /// True when R1 > R / 10 (allowed but outside the small-transverse regime).
    bool wide_transverse() const { return R1 > R / 10.0; }
    /// Containment with relative slack.
    bool contains(std::span<const cplx> z, double slack = 1e-9) const;
    /// max(|z^1| / R, |z^k| / R1); at most 1 inside the domain.
    double gauge(std::span<const cplx> z) const;
};

/// Pointwise coefficients a^i_{mbar}(z) of the Cauchy-Riemann system.
/// evaluate() fills an n x n row-major block: out[i * n + m] = a^i_{mbar}(z),
/// indices 0-based. Implementations must be reentrant.
class CoefficientField {
public:
    virtual ~CoefficientField() = default;
    virtual int dimension() const = 0;
    virtual void evaluate(std::span<const cplx> z, std::span<cplx> out) const = 0;
    /// True when the field vanishes identically (lets solvers skip work).
    virtual bool identically_zero() const { return false; }
};

/// Declared smoothness class C^{k + lambda}; metadata only.
struct Smoothness {
    int k = std::numeric_limits<int>::max();
    double lambda = 0.5;
};

/// An almost complex structure on the model domain, given by its
/// Cauchy-Riemann coefficients.
class AlmostComplexStructure {
public:
    AlmostComplexStructure(ModelDomain domain, std::shared_ptr<const CoefficientField> field,
                           std::string label = "custom", Smoothness smoothness = {}, bool adapted = false);

    const ModelDomain& domain() const { return domain_; }
    int n() const { return domain_.n; }
    const std::string& label() const { return label_; }
    const Smoothness& smoothness() const { return smoothness_; }
    bool adapted() const { return adapted_; }
    bool integrable() const { return field_->identically_zero(); }
    const std::shared_ptr<const CoefficientField>& field() const { return field_; }

    void coefficients(std::span<const cplx> z, std::span<cplx> out) const { field_->evaluate(z, out); }
    std::vector<cplx> coefficients(std::span<const cplx> z) const;
    cplx coefficient(int i, int m, std::span<const cplx> z) const;

    AlmostComplexStructure with_adapted(bool adapted) const;
    AlmostComplexStructure with_domain(ModelDomain domain) const;

private:
    ModelDomain domain_;
    std::shared_ptr<const CoefficientField> field_;
    std::string label_;
    Smoothness smoothness_;
    bool adapted_;
};

struct AdaptedReport {
    bool adapted = true;
    double max_violation = 0.0;
};

/// n_samples deterministic points on the central disk D_R x {0} (spiral
/// layout, including the origin and a boundary point).
std::vector<cplx> central_disk_samples(double R, int n_samples);

/// Samples |a| on the central disk; adapted iff the maximum is <= 1e-10.
AdaptedReport validate_adapted(const AlmostComplexStructure& J, int n_samples = 256);

/// Real 2n x 2n matrix, coordinates ordered (x1, y1, ..., xn, yn), whose
/// (1,0)-forms are dz^i + sum_m a^i_mbar dz-bar^m.
Eigen::MatrixXd j_from_coefficients(std::span<const cplx> a, int n);
/// The standard structure J0 (d/dx -> d/dy).
Eigen::MatrixXd standard_j(int n);

/// Affine-map consistency check between a real structure matrix and the
/// coefficients a at z. P is the complex-linear part of a candidate
/// differential (dz/dzeta); its antilinear part is taken from the algebraic
/// equation dbar z^i = -sum_m a^i_mbar conj(P^m). Returns
/// max |df(i xi) - J df(xi)| over xi in {1, i}. Throws "not almost complex"
/// when J^2 != -1 within 1e-10.
double cr_coefficients_check(const Eigen::MatrixXd& J, const AlmostComplexStructure& a, std::span<const cplx> z,
                             std::span<const cplx> P);

/// Coordinate change zhat = (z^1, N z^2, ..., N z^n). The new coefficients are
/// ahat^i_mbar(w) = (s_i / s_m) a^i_mbar(w^1, w^I / N) with s_1 = 1, s_I = N;
/// the transverse radius becomes N R1. A disk z(zeta) solves the old system iff
/// (z^1, N z^I) solves the new one.
AlmostComplexStructure rescale(const AlmostComplexStructure& J, double N);

/// Linear-in-z^I model A^I(zeta, z) = sum_{m >= 2} (p^I_m(zeta) z^m + pbar^I_m(zeta) conj(z^m)),
/// transverse indices I, m in [1, n) (0-based).
struct LinearModel {
    int n = 1;
    std::vector<BiPoly> p;     // p[I * n + m]
    std::vector<BiPoly> pbar;  // pbar[I * n + m]

    static LinearModel zero(int n);
    BiPoly& holo(int I, int m) { return p[static_cast<std::size_t>(I * n + m)]; }
    BiPoly& anti(int I, int m) { return pbar[static_cast<std::size_t>(I * n + m)]; }
    const BiPoly& holo(int I, int m) const { return p[static_cast<std::size_t>(I * n + m)]; }
    const BiPoly& anti(int I, int m) const { return pbar[static_cast<std::size_t>(I * n + m)]; }

    bool is_zero() const;
    /// A^I(zeta, z) with z a full n-vector (component 0 ignored).
    cplx eval(int I, cplx zeta, std::span<const cplx> z) const;
    /// A^I(zeta, P(zeta)) as a polynomial; P holds n polynomials (index 0 ignored).
    BiPoly apply(int I, std::span<const BiPoly> P) const;
};

/// Transverse linearization of a^I_1bar along the central disk.
struct LinearizedStructure {
    AlmostComplexStructure structure;
    double fd_step = 0.0;
    int degree = 0;
    LinearModel model;
    /// sup over the fit nodes (and a 2x refined check grid) of |alpha| = |true - fit|.
    double fit_error = 0.0;
    /// Largest |ahat^I_1bar(z)| / |z^I|^2 seen for |z^I| <= R1 / 4.
    double hat_constant = 0.0;
    /// sup |a^1_1bar| on the sampled neighbourhood used for hat_constant.
    double a11_sup = 0.0;

    /// Finite-difference linear coefficients at (z1, 0): d a^I_1bar / d z^m
    /// (conj = false) or d / d conj(z^m) (conj = true).
    cplx linear_coeff(int I, int m, bool conj, cplx z1) const;
    /// sum_m (linear_coeff z^m + linear_coeff_conj conj z^m) with true coefficients.
    cplx linear_part(int I, std::span<const cplx> z) const;
    /// a^I_1bar(z) minus its true linear part.
    cplx hat_remainder(int I, std::span<const cplx> z) const;
    /// a^1_1bar(z).
    cplx a11(std::span<const cplx> z) const;
};

/// Linearizes the transverse rows of J at z^I = 0 with central differences
/// and fits the coefficient functions by polynomials of total degree
/// `degree` on D_R. Throws "degree too low" when the fit error is >= eps.
LinearizedStructure linearize(const AlmostComplexStructure& J, double fd_step, int degree, double eps);
/// Same, trying degrees start, start + 2, ... up to max_degree.
LinearizedStructure linearize_auto(const AlmostComplexStructure& J, double fd_step, double eps, int start_degree = 0,
                                   int max_degree = 16);

/// One term c z^alpha conj(z)^beta of a^i_mbar.
struct PolyTerm {
    int i = 0;
    int mbar = 0;
    std::vector<int> alpha;
    std::vector<int> beta;
    cplx c = 0.0;
};

struct CatalogParams {
    int n = 2;
    double R = 1.0;
    /// <= 0 selects R / 10.
    double R1 = 0.0;
    double amplitude = 0.05;
    /// linear-transverse: model coefficients; empty selects A^I = amplitude * conj(z^I).
    LinearModel linear;
};

/// Names: "integrable", "linear-transverse", "perturbed", "product-disk".
/// Throws on unknown names.
AlmostComplexStructure catalog(const std::string& name, const CatalogParams& params = {});
std::vector<std::string> catalog_names();

/// Structure whose coefficients are finite sums of monomials.
AlmostComplexStructure polynomial_structure(ModelDomain domain, std::vector<PolyTerm> terms,
                                            std::string label = "polynomial");

}  // namespace pdisk
