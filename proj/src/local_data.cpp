#include "selmer/local_data.hpp"

#include <map>
#include <mutex>
#include <set>

namespace selmer {

std::string to_string(ReductionClass r) {
    switch (r) {
        case ReductionClass::Good: return "good";
        case ReductionClass::SplitMultiplicative: return "split";
        case ReductionClass::NonsplitMultiplicative: return "nonsplit";
        case ReductionClass::Additive: return "additive";
    }
    return "?";
}

namespace {

Integer mod(const Integer& a, const Integer& m) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

Integer inv_mod(const Integer& a, const Integer& m) {
    Integer r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw std::logic_error("Tate: non-invertible residue");
    return r;
}

bool divides(const Integer& p, const Integer& a) { return mpz_divisible_p(a.get_mpz_t(), p.get_mpz_t()) != 0; }

int val(const Integer& a, const Integer& p) {
    if (a == 0) return 1 << 20;
    return valuation(a, p);
}

Integer ppow(const Integer& p, int e) { return pow_int(p, static_cast<unsigned long>(e)); }

// Integral model with its accumulated change of variables from the input.
struct Model {
    Integer a1, a2, a3, a4, a6;
    ModelChange total;

    void rst(const Integer& r, const Integer& s, const Integer& t) {
        Integer n1 = a1 + 2 * s;
        Integer n2 = a2 - s * a1 + 3 * r - s * s;
        Integer n3 = a3 + r * a1 + 2 * t;
        Integer n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        Integer n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        a1 = n1, a2 = n2, a3 = n3, a4 = n4, a6 = n6;
        total = total.then(ModelChange{1, Rational(r), Rational(s), Rational(t)});
    }

    void scale_down(const Integer& p) {
        a1 /= p;
        a2 /= ppow(p, 2);
        a3 /= ppow(p, 3);
        a4 /= ppow(p, 4);
        a6 /= ppow(p, 6);
        total = total.then(ModelChange{Rational(p), 0, 0, 0});
    }

    Integer b2() const { return a1 * a1 + 4 * a2; }
    Integer b4() const { return 2 * a4 + a1 * a3; }
    Integer b6() const { return a3 * a3 + 4 * a6; }
    Integer b8() const { return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4; }
    Integer c4() const { return b2() * b2() - 24 * b4(); }
    Integer c6() const { return -b2() * b2() * b2() + 36 * b2() * b4() - 216 * b6(); }
    Integer disc() const {
        Integer B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
        return -B2 * B2 * B8 - 8 * B4 * B4 * B4 - 27 * B6 * B6 + 9 * B2 * B4 * B6;
    }
    Curve curve() const { return Curve(a1, a2, a3, a4, a6); }
};

// Does a T^2 + b T + c have a root mod p?
bool quad_has_root(const Integer& a, const Integer& b, const Integer& c, const Integer& p) {
    Integer A = mod(a, p), B = mod(b, p), C = mod(c, p);
    if (A == 0) return B != 0 || C == 0;
    if (p == 2) {
        for (int x = 0; x < 2; ++x)
            if (mod(A * x * x + B * x + C, p) == 0) return true;
        return false;
    }
    return legendre(B * B - 4 * A * C, p) != -1;
}

// Distinct roots mod p of T^3 + b T^2 + c T + d.
int cubic_root_count(const Integer& b, const Integer& c, const Integer& d, const Integer& p) {
    if (p <= 3) {
        int n = 0;
        for (long x = 0; x < p; ++x)
            if (mod(Integer(x * x * x) + b * x * x + c * x + d, p) == 0) ++n;
        return n;
    }
    return FpPoly(p, {d, c, b, Integer(1)}).distinct_root_count();
}

// A root mod p of T^3 + bT^2 + cT + d that is also a root of the derivative.
Integer cubic_multiple_root(const Integer& b, const Integer& c, const Integer& d, const Integer& p, bool triple) {
    if (p <= 3) {
        for (long x = 0; x < p; ++x) {
            Integer f = Integer(x * x * x) + b * x * x + c * x + d;
            Integer df = Integer(3 * x * x) + 2 * b * x + c;
            if (mod(f, p) == 0 && mod(df, p) == 0) return x;
        }
        throw std::logic_error("Tate: expected a multiple root mod p");
    }
    if (triple) return mod(-b * inv_mod(3, p), p);
    // Double root of a cubic with a simple root elsewhere: (bc - 9d) / (2(3c - b^2)).
    return mod((b * c - 9 * d) * inv_mod(mod(2 * (3 * c - b * b), p), p), p);
}

LocalReduction tate_uncached(const Curve& input, const Integer& p) {
    auto [integral, u0] = input.integral_model();
    Model m{integral.a1().get_num(), integral.a2().get_num(), integral.a3().get_num(),
            integral.a4().get_num(), integral.a6().get_num(), u0};
    const Integer p2 = p * p;

    auto finish = [&](std::string kod, int c, ReductionClass red, int f, int vD) {
        return LocalReduction{p, std::move(kod), c, red, f, vD, m.total, m.curve()};
    };

    for (;;) {
        const int vD = val(m.disc(), p);
        if (vD == 0) return finish("I0", 1, ReductionClass::Good, 0, 0);

        // Move the singular point of the reduction to (0, 0).
        Integer r, t;
        if (p == 2 || p == 3) {
            bool found = false;
            for (long x = 0; x < p && !found; ++x)
                for (long y = 0; y < p && !found; ++y) {
                    Integer F = Integer(y * y) + m.a1 * x * y + m.a3 * y - x * x * x - m.a2 * x * x - m.a4 * x - m.a6;
                    Integer Fx = m.a1 * y - 3 * x * x - 2 * m.a2 * x - m.a4;
                    Integer Fy = 2 * y + m.a1 * x + m.a3;
                    if (mod(F, p) == 0 && mod(Fx, p) == 0 && mod(Fy, p) == 0) {
                        r = x, t = y, found = true;
                    }
                }
            if (!found) throw std::logic_error("Tate: no singular point mod p");
        } else {
            Integer b2 = m.b2(), c4 = m.c4(), c6 = m.c6();
            if (divides(p, c4)) r = mod(-b2 * inv_mod(12, p), p);
            else r = mod(-(c6 + b2 * c4) * inv_mod(mod(12 * c4, p), p), p);
            t = mod(-(m.a1 * r + m.a3) * inv_mod(2, p), p);
        }
        m.rst(r, 0, t);

        if (!divides(p, m.c4())) {
            if (quad_has_root(1, m.a1, -m.a2, p))
                return finish("I" + std::to_string(vD), vD, ReductionClass::SplitMultiplicative, 1, vD);
            return finish("I" + std::to_string(vD), vD % 2 == 0 ? 2 : 1, ReductionClass::NonsplitMultiplicative,
                          1, vD);
        }
        if (val(m.a6, p) < 2) return finish("II", 1, ReductionClass::Additive, vD, vD);
        if (val(m.b8(), p) < 3) return finish("III", 2, ReductionClass::Additive, vD - 1, vD);
        if (val(m.b6(), p) < 3) {
            int c = quad_has_root(1, m.a3 / p, -m.a6 / p2, p) ? 3 : 1;
            return finish("IV", c, ReductionClass::Additive, vD - 2, vD);
        }

        // Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
        auto normalized = [&](const Model& x) {
            return divides(p, x.a1) && divides(p, x.a2) && val(x.a3, p) >= 2 && val(x.a4, p) >= 2 &&
                   val(x.a6, p) >= 3;
        };
        if (p == 2 || p == 3) {
            bool found = false;
            for (long s = 0; s < p && !found; ++s)
                for (long tt = 0; tt < p * p && !found; ++tt) {
                    Model trial = m;
                    trial.rst(0, s, tt);
                    if (normalized(trial)) m = trial, found = true;
                }
            if (!found) throw std::logic_error("Tate: cannot normalise at step 6");
        } else {
            Integer s = mod(-m.a1 * inv_mod(2, p), p);
            Integer tt = mod(-m.a3 * inv_mod(2, p2), p2);
            m.rst(0, s, tt);
            if (!normalized(m)) throw std::logic_error("Tate: cannot normalise at step 6");
        }

        const Integer b = m.a2 / p, c = m.a4 / p2, d = m.a6 / (p2 * p);
        const Integer w = 27 * d * d - b * b * c * c + 4 * b * b * b * d - 18 * b * c * d + 4 * c * c * c;
        const Integer x3 = 3 * c - b * b;

        if (!divides(p, w)) {
            int c0 = 1 + cubic_root_count(b, c, d, p);
            return finish("I0*", c0, ReductionClass::Additive, vD - 4, vD);
        }

        if (!divides(p, x3)) {
            // Double root: subprocedure for I_n*.
            m.rst(p * cubic_multiple_root(b, c, d, p, false), 0, 0);
            int ix = 3, iy = 3;
            Integer mx = p2, my = p2;
            int cp = 0;
            for (;;) {
                Integer a2t = m.a2 / p, a3t = m.a3 / my, a4t = (m.a4 / p) / mx, a6t = (m.a6 / mx) / my;
                if (!divides(p, a3t * a3t + 4 * a6t)) {
                    cp = quad_has_root(1, a3t, -a6t, p) ? 4 : 2;
                    break;
                }
                Integer tt = p == 2 ? Integer(my * mod(a6t, 2)) : Integer(my * mod(-a3t * inv_mod(2, p), p));
                m.rst(0, 0, tt);
                my *= p;
                ++iy;
                a2t = m.a2 / p, a3t = m.a3 / my, a4t = (m.a4 / p) / mx, a6t = (m.a6 / mx) / my;
                if (!divides(p, a4t * a4t - 4 * a6t * a2t)) {
                    cp = quad_has_root(a2t, a4t, a6t, p) ? 4 : 2;
                    break;
                }
                Integer rr = p == 2 ? Integer(mx * mod(a6t * a2t, 2))
                                    : Integer(mx * mod(-a4t * inv_mod(mod(2 * a2t, p), p), p));
                m.rst(rr, 0, 0);
                mx *= p;
                ++ix;
            }
            int n = ix + iy - 5;
            return finish("I" + std::to_string(n) + "*", cp, ReductionClass::Additive, vD - n - 4, vD);
        }

        // Triple root.
        m.rst(p * cubic_multiple_root(b, c, d, p, true), 0, 0);
        Integer a3t = m.a3 / p2, a6t = m.a6 / (p2 * p2);
        if (!divides(p, a3t * a3t + 4 * a6t)) {
            int c0 = quad_has_root(1, a3t, -a6t, p) ? 3 : 1;
            return finish("IV*", c0, ReductionClass::Additive, vD - 6, vD);
        }
        Integer tt = p == 2 ? Integer(p2 * mod(a6t, 2)) : Integer(p2 * mod(-a3t * inv_mod(2, p), p));
        m.rst(0, 0, tt);
        if (val(m.a4, p) < 4) return finish("III*", 2, ReductionClass::Additive, vD - 7, vD);
        if (val(m.a6, p) < 6) return finish("II*", 1, ReductionClass::Additive, vD - 8, vD);
        m.scale_down(p);
    }
}

}  // namespace

LocalReduction tate_algorithm(const Curve& E, const Integer& p) {
    static std::mutex mu;
    static std::map<std::pair<std::string, Integer>, LocalReduction> cache;
    auto key = std::make_pair(E.to_string(), p);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    if (!is_prime(p)) throw std::invalid_argument("tate_algorithm: " + p.get_str() + " is not prime");
    LocalReduction r = tate_uncached(E, p);
    std::lock_guard lock(mu);
    if (cache.size() > 200000) cache.clear();
    cache.emplace(std::move(key), r);
    return r;
}

Integer conductor(const Curve& E) {
    Curve integral = E.integral_model().first;
    Integer N = 1;
    for (const auto& [p, e] : factorize(integral.invariants().disc.get_num()).factors)
        N *= ppow(p, tate_algorithm(E, p).conductor_exponent);
    return N;
}

std::vector<Place> relevant_places(const ThreeIsogeny& phi) {
    Integer n = 6 * conductor(phi.domain());
    std::vector<Place> places;
    for (const auto& pp : factorize(n).factors) places.push_back(Place::finite(pp.prime.get_si()));
    places.push_back(Place::infinity());
    return places;
}

}  // namespace selmer
