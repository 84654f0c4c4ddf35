#pragma once

// p-adic numbers at fixed relative precision, with explicit precision loss.

#include "selmer/arith.hpp"

#include <optional>
#include <span>
#include <vector>

namespace selmer {

/// Raised when a result depends on digits that were not carried.
class PrecisionExhausted : public DomainError {
public:
    using DomainError::DomainError;
};

class NoRoot : public DomainError {
public:
    using DomainError::DomainError;
};

class NoCertifiedLift : public DomainError {
public:
    using DomainError::DomainError;
};

inline constexpr int kDefaultPadicPrecision = 20;

/// x = p^valuation * unit with unit known modulo p^precision.
/// A value with precision 0 is "zero to absolute precision valuation":
/// only x in p^valuation Z_p is known.
class PadicElement {
public:
    PadicElement(Integer p, int valuation, Integer unit, int precision);

    static PadicElement from_rational(const Rational& q, const Integer& p, int precision);
    static PadicElement zero(const Integer& p, int absolute_precision);

    const Integer& prime() const { return p_; }
    int valuation() const { return v_; }
    const Integer& unit() const { return u_; }
    int precision() const { return n_; }
    int absolute_precision() const { return v_ + n_; }
    bool is_indistinguishable_from_zero() const { return n_ == 0; }

    /// Representative integer (or p-power fraction) agreeing to absolute precision.
    Rational lift() const;

    friend PadicElement operator+(const PadicElement& a, const PadicElement& b);
    friend PadicElement operator-(const PadicElement& a, const PadicElement& b);
    friend PadicElement operator*(const PadicElement& a, const PadicElement& b);
    friend PadicElement operator/(const PadicElement& a, const PadicElement& b);
    PadicElement operator-() const;

    /// Square root if one exists; throws PrecisionExhausted when the unit is
    /// known too coarsely to decide (needs 1 digit for odd p, 3 for p = 2).
    std::optional<PadicElement> sqrt() const;

private:
    Integer p_;
    int v_;
    Integer u_;
    int n_;
};

/// Lift an approximate root x0 of f (integer coefficients, low degree first)
/// to a root known modulo p^target_precision.
/// Throws NoRoot if f has no root modulo p at all and NoCertifiedLift when
/// |f(x0)|_p < |f'(x0)|_p^2 fails but roots mod p exist.
PadicElement hensel_lift(std::span<const Integer> f, const Integer& x0, const Integer& p,
                         int target_precision);

}  // namespace selmer
