#pragma once

#include <span>
#include <vector>

#include "pdisk/common.hpp"

namespace pdisk {

/// Complex polynomial sum c_{l,m} zeta^l conj(zeta)^m with total degree l + m
/// bounded by degree(). Coefficients are stored by total degree, so raising the
/// bound never moves existing entries.
class BiPoly {
public:
    BiPoly() = default;
    explicit BiPoly(int degree);

    static std::size_t index(int l, int m) {
        const auto s = static_cast<std::size_t>(l + m);
        return s * (s + 1) / 2 + static_cast<std::size_t>(m);
    }
    static std::size_t size_for(int degree) {
        return degree < 0 ? 0 : static_cast<std::size_t>(degree + 1) * (degree + 2) / 2;
    }

    static BiPoly constant(cplx c);
    static BiPoly monomial(int l, int m, cplx c = 1.0);

    /// Storage bound on the total degree; -1 for the empty (zero) polynomial.
    int degree() const { return degree_; }
    /// Highest total degree carrying a nonzero coefficient; -1 when all vanish.
    int effective_degree() const;

    cplx coeff(int l, int m) const;
    /// Sets c_{l,m}, growing the degree bound when needed.
    void set(int l, int m, cplx c);
    void add(int l, int m, cplx c);

    std::span<const cplx> coeffs() const { return c_; }
    std::span<cplx> coeffs() { return c_; }

    cplx operator()(cplx zeta) const;

    BiPoly conj() const;
    BiPoly dbar() const;
    BiPoly del() const;
    BiPoly truncated(int degree) const;
    void grow(int degree);

    double max_abs() const;

    BiPoly& operator+=(const BiPoly& o);
    BiPoly& operator-=(const BiPoly& o);
    BiPoly& operator*=(cplx s);

    friend BiPoly operator+(BiPoly a, const BiPoly& b) { return a += b; }
    friend BiPoly operator-(BiPoly a, const BiPoly& b) { return a -= b; }
    friend BiPoly operator*(BiPoly a, cplx s) { return a *= s; }
    friend BiPoly operator*(cplx s, BiPoly a) { return a *= s; }
    friend BiPoly operator*(const BiPoly& a, const BiPoly& b);

private:
    int degree_ = -1;
    std::vector<cplx> c_;
};

/// Largest coefficient-wise difference.
double max_coeff_diff(const BiPoly& a, const BiPoly& b);

}  // namespace pdisk
