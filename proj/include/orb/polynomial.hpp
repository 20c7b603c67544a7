#pragma once

#include <vector>

#include "orb/types.hpp"

namespace orb {

/// Sparse real polynomial in d variables: sum of coeff * x^alpha with
/// multi-index alpha. Closed under sum, product and affine substitution,
/// which keeps transported lifts and group averages in closed form.
class Polynomial {
  public:
    struct Term {
        double coeff = 0.0;
        std::vector<int> expo;  // size d
    };

    Polynomial() = default;
    explicit Polynomial(int dim) : dim_(dim) {}
    Polynomial(int dim, std::vector<Term> terms) : dim_(dim), terms_(std::move(terms)) { normalize(); }

    static Polynomial constant(int dim, double c);
    /// The coordinate polynomial x_i.
    static Polynomial coordinate(int dim, int i);
    /// Affine form a.x + b.
    static Polynomial affine_form(const Vec& a, double b);

    int dim() const { return dim_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool zero() const { return terms_.empty(); }
    int degree() const;

    double operator()(const Vec& x) const;
    /// Partial derivative with respect to coordinate i, as a polynomial.
    Polynomial partial(int i) const;
    Vec gradient(const Vec& x) const;

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    Polynomial operator*(const Polynomial& other) const;

    /// Substitute x = A y + b; the result is a polynomial in y.
    Polynomial compose_affine(const Mat& A, const Vec& b) const;

  private:
    void normalize();  // merge duplicate exponents, drop ~0 coefficients

    int dim_ = 0;
    std::vector<Term> terms_;
};

}  // namespace orb
