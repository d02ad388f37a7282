#include "pdisk/bipoly.hpp"

#include <algorithm>
#include <cmath>

namespace pdisk {

BiPoly::BiPoly(int degree) : degree_(degree), c_(size_for(degree)) {}

BiPoly BiPoly::constant(cplx c) {
    BiPoly p(0);
    p.c_[0] = c;
    return p;
}

BiPoly BiPoly::monomial(int l, int m, cplx c) {
    BiPoly p(l + m);
    p.c_[index(l, m)] = c;
    return p;
}

int BiPoly::effective_degree() const {
    for (int s = degree_; s >= 0; --s) {
        for (int m = 0; m <= s; ++m) {
            if (c_[index(s - m, m)] != cplx(0.0)) return s;
        }
    }
    return -1;
}

cplx BiPoly::coeff(int l, int m) const {
    if (l < 0 || m < 0 || l + m > degree_) return 0.0;
    return c_[index(l, m)];
}

void BiPoly::grow(int degree) {
    if (degree <= degree_) return;
    degree_ = degree;
    c_.resize(size_for(degree));
}

void BiPoly::set(int l, int m, cplx c) {
    grow(l + m);
    c_[index(l, m)] = c;
}

void BiPoly::add(int l, int m, cplx c) {
    grow(l + m);
    c_[index(l, m)] += c;
}

cplx BiPoly::operator()(cplx zeta) const {
    if (degree_ < 0) return 0.0;
    std::vector<cplx> zp(degree_ + 1), zbp(degree_ + 1);
    zp[0] = zbp[0] = 1.0;
    const cplx zb = std::conj(zeta);
    for (int k = 1; k <= degree_; ++k) {
        zp[k] = zp[k - 1] * zeta;
        zbp[k] = zbp[k - 1] * zb;
    }
    cplx sum = 0.0;
    for (int s = 0; s <= degree_; ++s) {
        for (int m = 0; m <= s; ++m) sum += c_[index(s - m, m)] * zp[s - m] * zbp[m];
    }
    return sum;
}

BiPoly BiPoly::conj() const {
    BiPoly out(degree_);
    for (int s = 0; s <= degree_; ++s) {
        for (int m = 0; m <= s; ++m) out.c_[index(m, s - m)] = std::conj(c_[index(s - m, m)]);
    }
    return out;
}

BiPoly BiPoly::dbar() const {
    BiPoly out(std::max(degree_ - 1, 0));
    for (int s = 1; s <= degree_; ++s) {
        for (int m = 1; m <= s; ++m) out.c_[index(s - m, m - 1)] = static_cast<double>(m) * c_[index(s - m, m)];
    }
    return out;
}

BiPoly BiPoly::del() const {
    BiPoly out(std::max(degree_ - 1, 0));
    for (int s = 1; s <= degree_; ++s) {
        for (int m = 0; m < s; ++m) {
            const int l = s - m;
            out.c_[index(l - 1, m)] = static_cast<double>(l) * c_[index(l, m)];
        }
    }
    return out;
}

BiPoly BiPoly::truncated(int degree) const {
    if (degree >= degree_) return *this;
    BiPoly out(degree);
    std::copy_n(c_.begin(), size_for(degree), out.c_.begin());
    return out;
}

double BiPoly::max_abs() const {
    double m = 0.0;
    for (const auto& c : c_) m = std::max(m, std::abs(c));
    return m;
}

BiPoly& BiPoly::operator+=(const BiPoly& o) {
    grow(o.degree_);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

BiPoly& BiPoly::operator-=(const BiPoly& o) {
    grow(o.degree_);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

BiPoly& BiPoly::operator*=(cplx s) {
    for (auto& c : c_) c *= s;
    return *this;
}

BiPoly operator*(const BiPoly& a, const BiPoly& b) {
    if (a.degree_ < 0 || b.degree_ < 0) return BiPoly();
    BiPoly out(a.degree_ + b.degree_);
    for (int sa = 0; sa <= a.degree_; ++sa) {
        for (int ma = 0; ma <= sa; ++ma) {
            const cplx ca = a.c_[BiPoly::index(sa - ma, ma)];
            if (ca == cplx(0.0)) continue;
            for (int sb = 0; sb <= b.degree_; ++sb) {
                for (int mb = 0; mb <= sb; ++mb) {
                    const cplx cb = b.c_[BiPoly::index(sb - mb, mb)];
                    if (cb == cplx(0.0)) continue;
                    out.c_[BiPoly::index(sa - ma + sb - mb, ma + mb)] += ca * cb;
                }
            }
        }
    }
    return out;
}

double max_coeff_diff(const BiPoly& a, const BiPoly& b) {
    const int d = std::max(a.degree(), b.degree());
    double m = 0.0;
    for (int s = 0; s <= d; ++s) {
        for (int k = 0; k <= s; ++k) m = std::max(m, std::abs(a.coeff(s - k, k) - b.coeff(s - k, k)));
    }
    return m;
}

}  // namespace pdisk
