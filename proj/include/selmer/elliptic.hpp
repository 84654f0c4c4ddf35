#pragma once

// Elliptic curves over Q in long Weierstrass form, quadratic twists and
// rational 3-isogenies.

#include "selmer/arith.hpp"
#include "selmer/poly.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selmer {

struct Invariants {
    Rational b2, b4, b6, b8, c4, c6, disc, j;
};

/// x = u^2 x' + r, y = u^3 y' + s u^2 x' + t; then omega' = u * omega.
struct ModelChange {
    Rational u = 1, r = 0, s = 0, t = 0;

    /// Apply *this first, then next.
    ModelChange then(const ModelChange& next) const;
    ModelChange inverse() const;
    friend bool operator==(const ModelChange&, const ModelChange&) = default;
};

template <class F>
struct Point {
    F x{}, y{};
    bool infinity = true;

    static Point at(F x, F y) { return Point{std::move(x), std::move(y), false}; }
    friend bool operator==(const Point&, const Point&) = default;
};

using RationalPoint = Point<Rational>;

class Curve {
public:
    /// Throws DomainError("singular model") when the discriminant vanishes.
    Curve(Rational a1, Rational a2, Rational a3, Rational a4, Rational a6);
    explicit Curve(const std::array<Rational, 5>& a) : Curve(a[0], a[1], a[2], a[3], a[4]) {}

    /// "[a1,a2,a3,a4,a6]" with integer or p/q entries; UsageError on bad text.
    static Curve parse(std::string_view text);

    const Rational& a1() const { return a_[0]; }
    const Rational& a2() const { return a_[1]; }
    const Rational& a3() const { return a_[2]; }
    const Rational& a4() const { return a_[3]; }
    const Rational& a6() const { return a_[4]; }
    const std::array<Rational, 5>& coeffs() const { return a_; }
    const Invariants& invariants() const { return inv_; }

    bool is_integral() const;
    std::string to_string() const;

    Curve transform(const ModelChange& m) const;
    /// Integral model reached by a pure scaling u = 1/k; returns the change used.
    std::pair<Curve, ModelChange> integral_model() const;

    /// psi_3 = 3x^4 + b2 x^3 + 3 b4 x^2 + 3 b6 x + b8.
    QPoly division_polynomial_3() const;
    /// (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6, as a polynomial in x.
    QPoly two_torsion_cubic() const;

    bool contains(const RationalPoint& P) const;
    /// Rational points with the given x-coordinate (0, 1 or 2 of them).
    std::vector<RationalPoint> points_with_x(const Rational& x) const;

    friend bool operator==(const Curve& a, const Curve& b) { return a.a_ == b.a_; }

private:
    std::array<Rational, 5> a_;
    Invariants inv_;
};

Invariants invariants(const Curve& E);

/// All rational isomorphisms from -> to (u = +-u0), empty if none.
std::vector<ModelChange> isomorphisms(const Curve& from, const Curve& to);

/// Map a point to the transformed model E.transform(m).
RationalPoint apply_change(const ModelChange& m, const RationalPoint& P);

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

// Generic group law, usable over Q and over residue fields.
template <class F>
struct WeierstrassOver {
    F a1, a2, a3, a4, a6;

    bool contains(const Point<F>& P) const {
        if (P.infinity) return true;
        return P.y * P.y + a1 * P.x * P.y + a3 * P.y ==
               P.x * P.x * P.x + a2 * P.x * P.x + a4 * P.x + a6;
    }

    Point<F> negate(const Point<F>& P) const {
        if (P.infinity) return P;
        return Point<F>::at(P.x, F(-P.y) - a1 * P.x - a3);
    }

    Point<F> add(const Point<F>& P, const Point<F>& Q) const {
        if (P.infinity) return Q;
        if (Q.infinity) return P;
        F lambda, nu;
        if (P.x == Q.x) {
            F den = P.y + Q.y + a1 * Q.x + a3;
            if (is_zero(den)) return Point<F>{};
            F two_y = P.y + P.y + a1 * P.x + a3;
            F x2 = P.x * P.x;
            lambda = (x2 + x2 + x2 + (a2 + a2) * P.x + a4 - a1 * P.y) / two_y;
            nu = (F(-(x2 * P.x)) + a4 * P.x + a6 + a6 - a3 * P.y) / two_y;
        } else {
            lambda = (Q.y - P.y) / (Q.x - P.x);
            nu = (P.y * Q.x - Q.y * P.x) / (Q.x - P.x);
        }
        F x3 = lambda * lambda + a1 * lambda - a2 - P.x - Q.x;
        F y3 = F(-(lambda + a1)) * x3 - nu - a3;
        return Point<F>::at(x3, y3);
    }

    Point<F> multiply(long n, const Point<F>& P) const {
        if (n < 0) return multiply(-n, negate(P));
        Point<F> acc{}, base = P;
        while (n > 0) {
            if (n & 1) acc = add(acc, base);
            base = add(base, base);
            n >>= 1;
        }
        return acc;
    }
};

WeierstrassOver<Rational> over_rationals(const Curve& E);

/// Residue class modulo a prime; arithmetic assumes equal moduli.
struct ModP {
    Integer v, p;

    ModP() = default;
    ModP(Integer value, Integer modulus);
    static ModP from_rational(const Rational& q, const Integer& p);

    friend ModP operator+(const ModP& a, const ModP& b);
    friend ModP operator-(const ModP& a, const ModP& b);
    friend ModP operator*(const ModP& a, const ModP& b);
    friend ModP operator/(const ModP& a, const ModP& b);
    ModP operator-() const;
    friend bool operator==(const ModP& a, const ModP& b) { return a.v == b.v; }
};

inline bool is_zero(const ModP& a) { return a.v == 0; }

/// Reduction of a p-integral model modulo p.
WeierstrassOver<ModP> reduce_mod(const Curve& E, const Integer& p);

/// Quadratic twist by d (reduced to its squarefree part), as an integral model.
Curve quadratic_twist(const Curve& E, const Integer& d);

struct TwistMap {
    Curve curve;
    Rational x_scale;  // x-coordinates of 3-kernels scale by this factor
};
TwistMap quadratic_twist_with_map(const Curve& E, const Integer& d);

/// Rational roots of psi_3, ascending; exhaustive.
std::vector<Rational> rational_three_kernels(const Curve& E);

/// Fundamental discriminant of Q(y) for points over x = kernel_x.
Integer kernel_character(const Curve& E, const Rational& kernel_x);

class ThreeIsogeny {
public:
    const Curve& domain() const { return domain_; }
    const Curve& codomain() const { return codomain_; }
    const Rational& kernel_x() const { return x0_; }
    const Integer& kernel_character() const { return chi_; }
    /// phi^* omega_codomain = alpha * omega_domain on the stored models.
    const Rational& differential_scalar() const { return alpha_; }

    /// Value of 4x0^3 + b2 x0^2 + 2 b4 x0 + b6: the kernel y-coordinates
    /// generate Q(sqrt of this).
    const Rational& kernel_y_discriminant() const { return ydisc_; }

    RationalPoint operator()(const RationalPoint& P) const;
    Point<ModP> map_mod(const Point<ModP>& P, const Integer& p) const;

private:
    friend ThreeIsogeny velu_quotient(const Curve& E, const Rational& kernel_x);
    ThreeIsogeny(Curve domain, Curve codomain) : domain_(std::move(domain)), codomain_(std::move(codomain)) {}

    Curve domain_, codomain_;
    Rational x0_, t_, u_, alpha_ = 1, ydisc_;
    Integer chi_ = 1;
};

/// Throws DomainError when kernel_x is not a root of psi_3.
ThreeIsogeny velu_quotient(const Curve& E, const Rational& kernel_x);

/// x-coordinate of the kernel of the dual direction on the codomain.
Rational dual_kernel_x(const ThreeIsogeny& phi);

/// phi' : B -> C with C isomorphic to A; `to_domain` carries C onto A.
struct DualIsogeny {
    ThreeIsogeny phi_prime;
    ModelChange to_domain;
};
DualIsogeny velu_dual(const ThreeIsogeny& phi);

/// phi_d : A_d -> B_d on the integral twist model of A.
ThreeIsogeny twist_isogeny(const ThreeIsogeny& phi, const Integer& d);

}  // namespace selmer
