#include "orb/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace orb {

Polynomial Polynomial::constant(int dim, double c) {
    Polynomial p(dim);
    if (c != 0.0) p.terms_.push_back({c, std::vector<int>(dim, 0)});
    return p;
}

Polynomial Polynomial::coordinate(int dim, int i) {
    Polynomial p(dim);
    std::vector<int> e(dim, 0);
    e[i] = 1;
    p.terms_.push_back({1.0, std::move(e)});
    return p;
}

Polynomial Polynomial::affine_form(const Vec& a, double b) {
    Polynomial p(static_cast<int>(a.size()));
    for (Index i = 0; i < a.size(); ++i) {
        if (a[i] != 0.0) {
            std::vector<int> e(a.size(), 0);
            e[static_cast<size_t>(i)] = 1;
            p.terms_.push_back({a[i], std::move(e)});
        }
    }
    if (b != 0.0) p.terms_.push_back({b, std::vector<int>(a.size(), 0)});
    p.normalize();
    return p;
}

int Polynomial::degree() const {
    int deg = 0;
    for (const auto& t : terms_) {
        int d = 0;
        for (int e : t.expo) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

double Polynomial::operator()(const Vec& x) const {
    double value = 0.0;
    for (const auto& t : terms_) {
        double m = t.coeff;
        for (int i = 0; i < dim_; ++i) {
            for (int k = 0; k < t.expo[i]; ++k) m *= x[i];
        }
        value += m;
    }
    return value;
}

Polynomial Polynomial::partial(int i) const {
    Polynomial p(dim_);
    for (const auto& t : terms_) {
        if (t.expo[i] == 0) continue;
        Term d = t;
        d.coeff *= t.expo[i];
        d.expo[i] -= 1;
        p.terms_.push_back(std::move(d));
    }
    p.normalize();
    return p;
}

Vec Polynomial::gradient(const Vec& x) const {
    Vec g = Vec::Zero(dim_);
    for (int i = 0; i < dim_; ++i) g[i] = partial(i)(x);
    return g;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    if (dim_ == 0) dim_ = other.dim_;
    for (const auto& t : other.terms_) terms_.push_back(t);
    normalize();
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    for (auto& t : terms_) t.coeff *= s;
    normalize();
    return *this;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    Polynomial p(dim_);
    for (const auto& a : terms_) {
        for (const auto& b : other.terms_) {
            Term t;
            t.coeff = a.coeff * b.coeff;
            t.expo.resize(dim_);
            for (int i = 0; i < dim_; ++i) t.expo[i] = a.expo[i] + b.expo[i];
            p.terms_.push_back(std::move(t));
        }
    }
    p.normalize();
    return p;
}

Polynomial Polynomial::compose_affine(const Mat& A, const Vec& b) const {
    Polynomial result(dim_);
    for (const auto& t : terms_) {
        Polynomial m = Polynomial::constant(dim_, t.coeff);
        for (int i = 0; i < dim_; ++i) {
            if (t.expo[i] == 0) continue;
            Polynomial lin = Polynomial::affine_form(A.row(i).transpose(), b[i]);
            for (int k = 0; k < t.expo[i]; ++k) m = m * lin;
        }
        result += m;
    }
    return result;
}

void Polynomial::normalize() {
    std::map<std::vector<int>, double> acc;
    for (const auto& t : terms_) acc[t.expo] += t.coeff;
    terms_.clear();
    for (auto& [e, c] : acc) {
        if (std::abs(c) > 1e-300) terms_.push_back({c, e});
    }
}

Tolerances& tol() {
    static Tolerances instance;
    return instance;
}

}  // namespace orb
