#include "selmer/ratios.hpp"

#include <algorithm>

namespace selmer {

Pow3 Pow3::from_rational(const Rational& q) {
    if (q <= 0) throw DomainError("Selmer ratio " + q.get_str() + " is not a power of 3");
    Integer num = q.get_num(), den = q.get_den();
    const Integer three = 3;
    int a = static_cast<int>(mpz_remove(num.get_mpz_t(), num.get_mpz_t(), three.get_mpz_t()));
    int b = static_cast<int>(mpz_remove(den.get_mpz_t(), den.get_mpz_t(), three.get_mpz_t()));
    if (num != 1 || den != 1) throw DomainError("Selmer ratio " + q.get_str() + " is not a power of 3");
    return Pow3(a - b);
}

Rational Pow3::value() const {
    Integer p = pow_int(3, static_cast<unsigned long>(std::abs(e_)));
    return e_ >= 0 ? Rational(p) : Rational(1, p);
}

std::string Pow3::to_string() const { return value().get_str(); }

IsogenyChain make_chain(const Curve& E, const std::optional<Rational>& kernel_x) {
    Rational x0;
    if (kernel_x) {
        x0 = *kernel_x;
    } else {
        auto kernels = rational_three_kernels(E);
        if (kernels.empty()) throw DomainError("curve " + E.to_string() + " has no rational 3-isogeny");
        x0 = kernels.front();
    }
    ThreeIsogeny phi = velu_quotient(E, x0);
    DualIsogeny dual = velu_dual(phi);
    auto places = relevant_places(phi);
    return IsogenyChain{std::move(phi), std::move(dual), std::move(places)};
}

namespace {

Integer three_adic_gamma(const ThreeIsogeny& phi_d) {
    // phi^* omega_B = alpha omega_A; omega_min = u omega on each side.
    const Rational uA = tate_algorithm(phi_d.domain(), 3).change.u;
    const Rational uB = tate_algorithm(phi_d.codomain(), 3).change.u;
    Rational alpha_min = phi_d.differential_scalar() * uB / uA;
    int v = valuation(alpha_min, Integer(3));
    if (v != 0 && v != 1)
        throw DomainError("gamma at 3 is 3^" + std::to_string(v) + " for " + phi_d.domain().to_string() +
                          ", outside {1, 3}");
    return v == 0 ? 1 : 3;
}

bool good_away_from_3(const ThreeIsogeny& phi_d, long p) {
    if (p == 3) return false;
    Curve integral = phi_d.domain().integral_model().first;
    return !mpz_divisible_ui_p(integral.invariants().disc.get_num_mpz_t(), static_cast<unsigned long>(p));
}

Pow3 ratio_on_twist(const ThreeIsogeny& phi_d, const Place& v) {
    if (v.is_infinite()) {
        // Kernel points are real iff the twisted kernel y-discriminant is positive.
        return Pow3::from_exponent(phi_d.kernel_y_discriminant() > 0 ? -1 : 0);
    }
    const long p = v.prime();
    if (good_away_from_3(phi_d, p)) return Pow3{};
    const Integer P = p;
    Rational r(tate_algorithm(phi_d.codomain(), P).tamagawa, tate_algorithm(phi_d.domain(), P).tamagawa);
    r.canonicalize();
    if (p == 3) r *= three_adic_gamma(phi_d);
    return Pow3::from_rational(r);
}

}  // namespace

LocalRatio local_ratio(const ThreeIsogeny& phi, const Integer& d, const Place& v) {
    return {v, ratio_on_twist(twist_isogeny(phi, squarefree_part(d)), v)};
}

Pow3 gamma_at_3(const ThreeIsogeny& phi, const Integer& d) {
    return Pow3::from_rational(three_adic_gamma(twist_isogeny(phi, squarefree_part(d))));
}

std::vector<Place> twist_places(const std::vector<Place>& S, const Integer& d) {
    std::vector<Place> out = S;
    for (const auto& pp : factorize(d).factors) {
        Place v = Place::finite(pp.prime.get_si());
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

GlobalRatio global_ratio(const ThreeIsogeny& phi, const std::vector<Place>& S, const Integer& d_in) {
    const Integer d = squarefree_part(d_in);
    const ThreeIsogeny phi_d = twist_isogeny(phi, d);
    GlobalRatio g;
    for (const Place& v : twist_places(S, d)) {
        Pow3 c = ratio_on_twist(phi_d, v);
        g.c *= c;
        g.breakdown.push_back({v, c});
    }
    g.t = std::abs(g.c.exponent());
    return g;
}

ChainReport chain_check(const IsogenyChain& chain, const Integer& d_in) {
    ChainReport rep;
    rep.d = squarefree_part(d_in);
    const ThreeIsogeny phi_d = twist_isogeny(chain.phi, rep.d);
    const ThreeIsogeny phip_d = twist_isogeny(chain.phi_prime(), rep.d);
    for (const Place& v : twist_places(chain.places, rep.d)) {
        ChainRow row;
        row.place = v;
        try {
            row.c_phi = ratio_on_twist(phi_d, v);
            row.c_phiprime = ratio_on_twist(phip_d, v);
        } catch (const DomainError& e) {
            rep.failures.push_back("place " + v.to_string() + ": " + e.what());
            continue;
        }
        row.c_pi = row.c_phi * row.c_phiprime;
        rep.c_phi *= row.c_phi;
        rep.c_phiprime *= row.c_phiprime;
        rep.c_pi *= row.c_pi;
        int want = v.is_infinite() ? -1 : (v.prime() == 3 ? 1 : 0);
        if (row.c_pi.exponent() != want)
            rep.failures.push_back("c_v(pi) = " + row.c_pi.to_string() + " at place " + v.to_string() +
                                   ", expected " + Pow3::from_exponent(want).to_string());
        rep.rows.push_back(row);
    }
    if (rep.c_pi != Pow3{}) rep.failures.push_back("global c(pi) = " + rep.c_pi.to_string() + ", expected 1");
    if (rep.c_phi * rep.c_phiprime != Pow3{})
        rep.failures.push_back("c(phi) c(phi') = " + (rep.c_phi * rep.c_phiprime).to_string() + ", expected 1");
    return rep;
}

}  // namespace selmer
