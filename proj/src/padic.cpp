#include "selmer/padic.hpp"

#include "selmer/poly.hpp"

#include <algorithm>

namespace selmer {

namespace {

Integer mod_reduce(const Integer& a, const Integer& m) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

Integer mod_inverse(const Integer& a, const Integer& m) {
    Integer r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw std::domain_error("p-adic unit not invertible");
    return r;
}

// Square root of a quadratic residue a modulo an odd prime p.
Integer tonelli_shanks(const Integer& a, const Integer& p) {
    Integer n = mod_reduce(a, p);
    if (n == 0) return 0;
    Integer q = p - 1;
    unsigned long s = mpz_scan1(q.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(q.get_mpz_t(), q.get_mpz_t(), s);
    Integer z = 2;
    while (mpz_jacobi(z.get_mpz_t(), p.get_mpz_t()) != -1) ++z;
    Integer c, r, t, e;
    mpz_powm(c.get_mpz_t(), z.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    e = (q + 1) / 2;
    mpz_powm(r.get_mpz_t(), n.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    mpz_powm(t.get_mpz_t(), n.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    unsigned long m = s;
    while (t != 1) {
        unsigned long i = 0;
        Integer tt = t;
        while (tt != 1) {
            tt = tt * tt % p;
            ++i;
        }
        Integer b = c;
        for (unsigned long j = 0; j + i + 1 < m; ++j) b = b * b % p;
        r = r * b % p;
        c = b * b % p;
        t = t * c % p;
        m = i;
    }
    return r;
}

}  // namespace

PadicElement::PadicElement(Integer p, int valuation, Integer unit, int precision)
    : p_(std::move(p)), v_(valuation), u_(std::move(unit)), n_(precision) {
    if (n_ < 0) throw std::invalid_argument("PadicElement: negative precision");
    if (n_ == 0) {
        u_ = 0;
        return;
    }
    u_ = mod_reduce(u_, pow_int(p_, static_cast<unsigned long>(n_)));
    if (mpz_divisible_p(u_.get_mpz_t(), p_.get_mpz_t()))
        throw std::invalid_argument("PadicElement: unit part divisible by p");
}

PadicElement PadicElement::zero(const Integer& p, int absolute_precision) {
    return PadicElement(p, absolute_precision, 0, 0);
}

PadicElement PadicElement::from_rational(const Rational& q, const Integer& p, int precision) {
    if (q == 0) return zero(p, precision);
    Integer num = q.get_num(), den = q.get_den();
    int v = static_cast<int>(mpz_remove(num.get_mpz_t(), num.get_mpz_t(), p.get_mpz_t())) -
            static_cast<int>(mpz_remove(den.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t()));
    Integer m = pow_int(p, static_cast<unsigned long>(precision));
    return PadicElement(p, v, mod_reduce(num * mod_inverse(den, m), m), precision);
}

Rational PadicElement::lift() const {
    Rational r = u_;
    if (v_ >= 0) r *= pow_int(p_, static_cast<unsigned long>(v_));
    else r /= pow_int(p_, static_cast<unsigned long>(-v_));
    r.canonicalize();
    return r;
}

namespace {

PadicElement add_impl(const PadicElement& a, const PadicElement& b, bool negate_b) {
    const Integer& p = a.prime();
    if (p != b.prime()) throw std::invalid_argument("p-adic primes differ");
    const int abs_prec = std::min(a.absolute_precision(), b.absolute_precision());
    const int vm = std::min(a.valuation(), b.valuation());
    const int width = abs_prec - vm;
    if (width <= 0) return PadicElement::zero(p, abs_prec);
    const Integer m = pow_int(p, static_cast<unsigned long>(width));
    Integer x = a.is_indistinguishable_from_zero()
                    ? Integer(0)
                    : Integer(a.unit() * pow_int(p, static_cast<unsigned long>(a.valuation() - vm)));
    Integer y = b.is_indistinguishable_from_zero()
                    ? Integer(0)
                    : Integer(b.unit() * pow_int(p, static_cast<unsigned long>(b.valuation() - vm)));
    Integer s = mod_reduce(negate_b ? Integer(x - y) : Integer(x + y), m);
    if (s == 0) return PadicElement::zero(p, abs_prec);
    int w = static_cast<int>(mpz_remove(s.get_mpz_t(), s.get_mpz_t(), p.get_mpz_t()));
    return PadicElement(p, vm + w, s, width - w);
}

}  // namespace

PadicElement operator+(const PadicElement& a, const PadicElement& b) { return add_impl(a, b, false); }
PadicElement operator-(const PadicElement& a, const PadicElement& b) { return add_impl(a, b, true); }

PadicElement PadicElement::operator-() const {
    if (n_ == 0) return *this;
    return PadicElement(p_, v_, -u_, n_);
}

PadicElement operator*(const PadicElement& a, const PadicElement& b) {
    const int n = std::min(a.n_, b.n_);
    const int v = a.v_ + b.v_;
    if (n == 0) return PadicElement::zero(a.p_, v);
    return PadicElement(a.p_, v, a.u_ * b.u_, n);
}

PadicElement operator/(const PadicElement& a, const PadicElement& b) {
    if (b.n_ == 0) throw PrecisionExhausted("p-adic division by a value indistinguishable from zero");
    const int n = std::min(a.n_, b.n_);
    const int v = a.v_ - b.v_;
    if (n == 0) return PadicElement::zero(a.p_, v);
    const Integer m = pow_int(a.p_, static_cast<unsigned long>(n));
    return PadicElement(a.p_, v, a.u_ * mod_inverse(b.u_, m), n);
}

std::optional<PadicElement> PadicElement::sqrt() const {
    if (n_ == 0) throw PrecisionExhausted("square root of a value indistinguishable from zero");
    if (v_ % 2 != 0) return std::nullopt;
    if (p_ == 2) {
        if (n_ < 3) throw PrecisionExhausted("2-adic square root needs the unit modulo 8");
        if (mod_reduce(u_, 8) != 1) return std::nullopt;
        Integer r = 1;
        for (int k = 3; k < n_; ++k) {
            Integer mod = pow_int(2, static_cast<unsigned long>(k + 1));
            if (mod_reduce(r * r - u_, mod) != 0) r += pow_int(2, static_cast<unsigned long>(k - 1));
        }
        return PadicElement(p_, v_ / 2, r, n_ - 1);
    }
    if (legendre(u_, p_) != 1) return std::nullopt;
    Integer r = tonelli_shanks(u_, p_);
    for (int k = 1; k < n_;) {
        k = std::min(2 * k, n_);
        Integer m = pow_int(p_, static_cast<unsigned long>(k));
        r = mod_reduce(r - (r * r - u_) * mod_inverse(2 * r, m), m);
    }
    return PadicElement(p_, v_ / 2, r, n_);
}

PadicElement hensel_lift(std::span<const Integer> f, const Integer& x0, const Integer& p,
                         int target_precision) {
    std::vector<Rational> coeffs(f.begin(), f.end());
    QPoly poly(coeffs);
    if (poly.degree() < 1) throw std::invalid_argument("hensel_lift: constant polynomial");
    auto truncated = [&](const Rational& x) {
        if (x == 0) return PadicElement::zero(p, target_precision);
        int v = valuation(x, p);
        if (v >= target_precision) return PadicElement::zero(p, target_precision);
        return PadicElement::from_rational(x, p, target_precision - v);
    };
    if (poly.degree() == 1) {
        Rational root = -poly.coeff(0) / poly.coeff(1);
        if (root != 0 && valuation(root, p) < 0) throw NoRoot("hensel_lift: root is not p-integral");
        return truncated(root);
    }
    QPoly deriv = poly.derivative();
    Integer x = x0;
    Rational fx = poly(x), dfx = deriv(x);
    if (fx == 0) return truncated(x);
    const bool certified = dfx != 0 && valuation(fx, p) > 2 * valuation(dfx, p);
    if (!certified) {
        FpPoly reduced(p, std::vector<Integer>(f.begin(), f.end()));
        if (!reduced.is_zero() && reduced.distinct_root_count() == 0) throw NoRoot("hensel_lift: no root in Z_p");
        throw NoCertifiedLift("hensel_lift: simple-root criterion fails at the given approximation");
    }
    const int k = valuation(dfx, p);
    const Integer modulus = pow_int(p, static_cast<unsigned long>(target_precision + 2 * k + 2));
    for (int guard = 0; guard < 64; ++guard) {
        fx = poly(x);
        if (fx == 0 || valuation(fx, p) - k >= target_precision) return truncated(x);
        dfx = deriv(x);
        Integer pk = pow_int(p, static_cast<unsigned long>(k));
        Integer num = fx.get_num() / pk;
        Integer den = dfx.get_num() / pk;
        x = mod_reduce(x - num * mod_inverse(den, modulus), modulus);
    }
    throw PrecisionExhausted("hensel_lift: Newton iteration did not converge");
}

}  // namespace selmer
