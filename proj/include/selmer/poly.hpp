#pragma once

// Dense univariate polynomials over Q and over F_p.

#include "selmer/arith.hpp"

#include <utility>
#include <vector>

namespace selmer {

/// Coefficients low degree first; the zero polynomial is empty.
class QPoly {
public:
    QPoly() = default;
    explicit QPoly(std::vector<Rational> coeffs);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(int i) const;
    Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

    Rational operator()(const Rational& x) const;
    QPoly derivative() const;
    QPoly monic() const;

    friend QPoly operator+(const QPoly& a, const QPoly& b);
    friend QPoly operator-(const QPoly& a, const QPoly& b);
    friend QPoly operator*(const QPoly& a, const QPoly& b);
    friend QPoly operator*(const Rational& s, const QPoly& a);
    friend bool operator==(const QPoly&, const QPoly&) = default;

    /// Euclidean division; b nonzero.
    static std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b);
    static QPoly gcd(QPoly a, QPoly b);  // monic

    /// Integer polynomial with the same roots (denominators cleared, content removed).
    std::vector<Integer> primitive_integer_coeffs() const;

    std::string to_string(const std::string& var = "x") const;

private:
    void trim();
    std::vector<Rational> c_;
};

/// All rational roots, ascending, without multiplicity.
std::vector<Rational> rational_roots(const QPoly& f);

/// Number of distinct real roots (Sturm).
int real_root_count(const QPoly& f);

/// Polynomial over F_p with reduced coefficients, low degree first.
class FpPoly {
public:
    FpPoly(Integer p, std::vector<Integer> coeffs);

    const Integer& modulus() const { return p_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Integer>& coeffs() const { return c_; }

    Integer operator()(const Integer& x) const;
    FpPoly derivative() const;

    static FpPoly mul_mod(const FpPoly& a, const FpPoly& b, const FpPoly& m);
    static FpPoly rem(const FpPoly& a, const FpPoly& b);
    static FpPoly gcd(FpPoly a, FpPoly b);  // monic

    /// Number of distinct roots in F_p: deg gcd(x^p - x, f).
    int distinct_root_count() const;

private:
    void trim();
    Integer p_;
    std::vector<Integer> c_;
};

}  // namespace selmer
