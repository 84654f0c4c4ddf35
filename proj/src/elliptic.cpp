#include "selmer/elliptic.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace selmer {

namespace {

Integer mod_reduce(const Integer& a, const Integer& m) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

std::optional<Rational> rational_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t()))
        return std::nullopt;
    Integer n, d;
    mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
    mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
    return Rational(n, d);
}

std::optional<Rational> rational_cbrt(const Rational& q) {
    Integer n, d;
    Integer an = abs(q.get_num());
    if (mpz_root(n.get_mpz_t(), an.get_mpz_t(), 3) == 0) return std::nullopt;
    if (mpz_root(d.get_mpz_t(), q.get_den_mpz_t(), 3) == 0) return std::nullopt;
    if (q < 0) n = -n;
    return Rational(n, d);
}

Integer ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

// ---------------------------------------------------------------- models

ModelChange ModelChange::then(const ModelChange& n) const {
    ModelChange c;
    c.u = u * n.u;
    c.r = u * u * n.r + r;
    c.s = s + u * n.s;
    c.t = t + u * u * u * n.t + s * u * u * n.r;
    return c;
}

ModelChange ModelChange::inverse() const {
    ModelChange c;
    c.u = 1 / u;
    c.r = -r / (u * u);
    c.s = -s / u;
    c.t = (s * r - t) / (u * u * u);
    return c;
}

Invariants invariants(const Curve& E) { return E.invariants(); }

Curve::Curve(Rational a1, Rational a2, Rational a3, Rational a4, Rational a6)
    : a_{std::move(a1), std::move(a2), std::move(a3), std::move(a4), std::move(a6)} {
    for (auto& a : a_) a.canonicalize();
    const auto& [A1, A2, A3, A4, A6] = a_;
    Invariants& I = inv_;
    I.b2 = A1 * A1 + 4 * A2;
    I.b4 = 2 * A4 + A1 * A3;
    I.b6 = A3 * A3 + 4 * A6;
    I.b8 = A1 * A1 * A6 + 4 * A2 * A6 - A1 * A3 * A4 + A2 * A3 * A3 - A4 * A4;
    I.c4 = I.b2 * I.b2 - 24 * I.b4;
    I.c6 = -I.b2 * I.b2 * I.b2 + 36 * I.b2 * I.b4 - 216 * I.b6;
    I.disc = -I.b2 * I.b2 * I.b8 - 8 * I.b4 * I.b4 * I.b4 - 27 * I.b6 * I.b6 + 9 * I.b2 * I.b4 * I.b6;
    if (I.disc == 0) throw DomainError("singular model " + to_string());
    I.j = I.c4 * I.c4 * I.c4 / I.disc;
}

Curve Curve::parse(std::string_view text) {
    static const std::regex entry(R"(^\s*([+-]?[0-9]+(/[0-9]+)?)\s*$)");
    std::string s(text);
    auto open = s.find('['), close = s.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open ||
        s.find_first_not_of(" \t", close + 1) != std::string::npos ||
        s.find_first_not_of(" \t") != open)
        throw UsageError("curve must be written [a1,a2,a3,a4,a6], got '" + s + "'");
    std::string body = s.substr(open + 1, close - open - 1);
    std::vector<Rational> coeffs;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::smatch m;
        if (!std::regex_match(item, m, entry))
            throw UsageError("bad curve coefficient '" + item + "' in '" + s + "'");
        Rational q;
        if (m[2].matched) {
            if (Integer(m[2].str().substr(1)) == 0)
                throw UsageError("zero denominator in curve coefficient '" + item + "'");
        }
        q.set_str(m[1].str(), 10);
        q.canonicalize();
        coeffs.push_back(q);
    }
    if (coeffs.size() != 5 || (!body.empty() && body.back() == ','))
        throw UsageError("curve needs exactly five coefficients, got '" + s + "'");
    return Curve(coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]);
}

bool Curve::is_integral() const {
    return std::all_of(a_.begin(), a_.end(), [](const Rational& a) { return a.get_den() == 1; });
}

std::string Curve::to_string() const {
    std::string s = "[";
    for (int i = 0; i < 5; ++i) s += (i ? "," : "") + a_[i].get_str();
    return s + "]";
}

Curve Curve::transform(const ModelChange& m) const {
    const auto& [a1, a2, a3, a4, a6] = a_;
    const Rational &u = m.u, &r = m.r, &s = m.s, &t = m.t;
    if (u == 0) throw std::invalid_argument("model change with u = 0");
    Rational u2 = u * u, u3 = u2 * u, u4 = u2 * u2, u6 = u3 * u3;
    return Curve((a1 + 2 * s) / u, (a2 - s * a1 + 3 * r - s * s) / u2, (a3 + r * a1 + 2 * t) / u3,
                 (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u4,
                 (a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1) / u6);
}

std::pair<Curve, ModelChange> Curve::integral_model() const {
    Integer den = 1;
    for (const auto& a : a_) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), a.get_den_mpz_t());
    Integer k = 1;
    for (const auto& [p, e] : factorize(den).factors) {
        int need = 0;
        for (int i = 0; i < 5; ++i) {
            static constexpr int weight[5] = {1, 2, 3, 4, 6};
            if (a_[i] == 0) continue;
            int v = -valuation(a_[i], p);
            if (v > 0) need = std::max<int>(need, static_cast<int>(ceil_div(v, weight[i]).get_si()));
        }
        for (int i = 0; i < need; ++i) k *= p;
    }
    ModelChange m;
    m.u = Rational(1, k);
    return {transform(m), m};
}

QPoly Curve::division_polynomial_3() const {
    const auto& I = inv_;
    return QPoly({I.b8, 3 * I.b6, 3 * I.b4, I.b2, Rational(3)});
}

QPoly Curve::two_torsion_cubic() const {
    const auto& I = inv_;
    return QPoly({I.b6, 2 * I.b4, I.b2, Rational(4)});
}

bool Curve::contains(const RationalPoint& P) const { return over_rationals(*this).contains(P); }

std::vector<RationalPoint> Curve::points_with_x(const Rational& x) const {
    std::vector<RationalPoint> pts;
    auto root = rational_sqrt(two_torsion_cubic()(x));
    if (!root) return pts;
    Rational base = -(a1() * x + a3());
    pts.push_back(RationalPoint::at(x, (base + *root) / 2));
    if (*root != 0) pts.push_back(RationalPoint::at(x, (base - *root) / 2));
    return pts;
}

RationalPoint apply_change(const ModelChange& m, const RationalPoint& P) {
    if (P.infinity) return P;
    Rational x = (P.x - m.r) / (m.u * m.u);
    Rational y = (P.y - m.s * (P.x - m.r) - m.t) / (m.u * m.u * m.u);
    return RationalPoint::at(x, y);
}

std::vector<ModelChange> isomorphisms(const Curve& from, const Curve& to) {
    const auto &A = from.invariants(), &B = to.invariants();
    if (A.j != B.j) return {};
    // c4' = u^-4 c4 and c6' = u^-6 c6.
    std::optional<Rational> u2;
    if (A.c4 != 0 && A.c6 != 0) {
        u2 = (A.c6 / B.c6) / (A.c4 / B.c4);
    } else if (A.c4 == 0) {
        u2 = rational_cbrt(A.c6 / B.c6);
    } else {
        u2 = rational_sqrt(A.c4 / B.c4);
    }
    if (!u2 || *u2 <= 0) return {};
    auto u = rational_sqrt(*u2);
    if (!u) return {};
    std::vector<ModelChange> out;
    for (Rational uu : {*u, Rational(-*u)}) {
        ModelChange m;
        m.u = uu;
        m.s = (uu * to.a1() - from.a1()) / 2;
        m.r = (uu * uu * to.a2() - from.a2() + m.s * from.a1() + m.s * m.s) / 3;
        m.t = (uu * uu * uu * to.a3() - from.a3() - m.r * from.a1()) / 2;
        if (from.transform(m) == to) out.push_back(m);
    }
    return out;
}

WeierstrassOver<Rational> over_rationals(const Curve& E) {
    return {E.a1(), E.a2(), E.a3(), E.a4(), E.a6()};
}

// ---------------------------------------------------------------- F_p

ModP::ModP(Integer value, Integer modulus) : v(mod_reduce(value, modulus)), p(std::move(modulus)) {}

ModP ModP::from_rational(const Rational& q, const Integer& p) {
    Integer inv;
    if (mpz_invert(inv.get_mpz_t(), q.get_den_mpz_t(), p.get_mpz_t()) == 0)
        throw DomainError("rational " + q.get_str() + " is not " + p.get_str() + "-integral");
    return ModP(q.get_num() * inv, p);
}

ModP operator+(const ModP& a, const ModP& b) { return ModP(a.v + b.v, a.p); }
ModP operator-(const ModP& a, const ModP& b) { return ModP(a.v - b.v, a.p); }
ModP operator*(const ModP& a, const ModP& b) { return ModP(a.v * b.v, a.p); }
ModP ModP::operator-() const { return ModP(-v, p); }

ModP operator/(const ModP& a, const ModP& b) {
    Integer inv;
    if (mpz_invert(inv.get_mpz_t(), b.v.get_mpz_t(), a.p.get_mpz_t()) == 0)
        throw std::domain_error("division by zero mod p");
    return ModP(a.v * inv, a.p);
}

WeierstrassOver<ModP> reduce_mod(const Curve& E, const Integer& p) {
    auto r = [&](const Rational& q) { return ModP::from_rational(q, p); };
    return {r(E.a1()), r(E.a2()), r(E.a3()), r(E.a4()), r(E.a6())};
}

// ---------------------------------------------------------------- twists

TwistMap quadratic_twist_with_map(const Curve& E, const Integer& d_in) {
    const Integer d = squarefree_part(d_in);
    const Rational D(d);
    Rational scale;
    std::optional<Curve> naive;
    if (E.a1() == 0 && E.a3() == 0) {
        naive.emplace(Rational(0), D * E.a2(), Rational(0), D * D * E.a4(), D * D * D * E.a6());
        scale = D;
    } else {
        // Y^2 = X^3 + b2 X^2 + 8 b4 X + 16 b6 with X = 4x, then twist.
        const auto& I = E.invariants();
        naive.emplace(Rational(0), D * I.b2, Rational(0), 8 * D * D * I.b4, 16 * D * D * D * I.b6);
        scale = 4 * D;
    }
    auto [curve, change] = naive->integral_model();
    return {curve, scale / (change.u * change.u)};
}

Curve quadratic_twist(const Curve& E, const Integer& d) { return quadratic_twist_with_map(E, d).curve; }

// ---------------------------------------------------------------- 3-isogenies

std::vector<Rational> rational_three_kernels(const Curve& E) {
    return rational_roots(E.division_polynomial_3());
}

Integer kernel_character(const Curve& E, const Rational& kernel_x) {
    Rational ydisc = E.two_torsion_cubic()(kernel_x);
    if (ydisc == 0) throw DomainError("kernel x-coordinate is a 2-torsion abscissa");
    return fundamental_discriminant(squarefree_part(ydisc));
}

RationalPoint ThreeIsogeny::operator()(const RationalPoint& P) const {
    if (P.infinity || P.x == x0_) return RationalPoint{};
    Rational dx = P.x - x0_;
    Rational X = P.x + t_ / dx + u_ / (dx * dx);
    Rational dX = 1 - t_ / (dx * dx) - 2 * u_ / (dx * dx * dx);
    Rational Y = ((2 * P.y + domain_.a1() * P.x + domain_.a3()) * dX - domain_.a1() * X - domain_.a3()) / 2;
    return RationalPoint::at(X, Y);
}

Point<ModP> ThreeIsogeny::map_mod(const Point<ModP>& P, const Integer& p) const {
    if (p == 2) throw std::invalid_argument("isogeny reduction needs an odd prime");
    auto r = [&](const Rational& q) { return ModP::from_rational(q, p); };
    const ModP x0 = r(x0_), t = r(t_), u = r(u_), a1 = r(domain_.a1()), a3 = r(domain_.a3());
    const ModP one(1, p), two(2, p);
    if (P.infinity || P.x == x0) return Point<ModP>{};
    ModP inv = one / (P.x - x0);
    ModP inv2 = inv * inv, inv3 = inv2 * inv;
    ModP X = P.x + t * inv + u * inv2;
    ModP dX = one - t * inv2 - two * u * inv3;
    ModP Y = ((two * P.y + a1 * P.x + a3) * dX - a1 * X - a3) / two;
    return Point<ModP>::at(X, Y);
}

ThreeIsogeny velu_quotient(const Curve& E, const Rational& kernel_x) {
    if (E.division_polynomial_3()(kernel_x) != 0)
        throw DomainError("x = " + kernel_x.get_str() + " is not a root of psi_3 on " + E.to_string());
    const auto& I = E.invariants();
    const Rational& x0 = kernel_x;
    Rational u = 4 * x0 * x0 * x0 + I.b2 * x0 * x0 + 2 * I.b4 * x0 + I.b6;
    Rational t = 6 * x0 * x0 + I.b2 * x0 + I.b4;
    Rational w = u + x0 * t;
    Curve B(E.a1(), E.a2(), E.a3(), E.a4() - 5 * t, E.a6() - I.b2 * t - 7 * w);
    ThreeIsogeny phi(E, B);
    phi.x0_ = x0;
    phi.t_ = t;
    phi.u_ = u;
    phi.ydisc_ = u;
    phi.chi_ = kernel_character(E, x0);
    return phi;
}

Rational dual_kernel_x(const ThreeIsogeny& phi) {
    const Curve& A = phi.domain();
    const Rational& x0 = phi.kernel_x();
    const QPoly x({Rational(0), Rational(1)});
    const QPoly lin({-x0, Rational(1)});
    auto [cofactor, rem] = QPoly::divmod(A.division_polynomial_3(), lin);
    if (!rem.is_zero()) throw std::logic_error("kernel x is not a root of psi_3");
    const auto& I = A.invariants();
    Rational u = 4 * x0 * x0 * x0 + I.b2 * x0 * x0 + 2 * I.b4 * x0 + I.b6;
    Rational t = 6 * x0 * x0 + I.b2 * x0 + I.b4;
    // On the other 3-torsion abscissae X = N/D takes the single value lambda.
    QPoly D = lin * lin;
    QPoly N = x * D + t * lin + QPoly({u});
    QPoly n = QPoly::divmod(N, cofactor).second, e = QPoly::divmod(D, cofactor).second;
    if (e.is_zero()) throw std::logic_error("degenerate dual kernel computation");
    Rational lambda = e.leading() == 0 ? Rational(0) : n.coeff(e.degree()) / e.leading();
    if (!(n - lambda * e).is_zero()) throw std::logic_error("dual kernel abscissa is not rational");
    return lambda;
}

DualIsogeny velu_dual(const ThreeIsogeny& phi) {
    ThreeIsogeny phi_prime = velu_quotient(phi.codomain(), dual_kernel_x(phi));
    auto isos = isomorphisms(phi_prime.codomain(), phi.domain());
    if (isos.empty()) throw std::logic_error("dual quotient is not isomorphic to the domain");
    std::sort(isos.begin(), isos.end(), [](const ModelChange& a, const ModelChange& b) { return a.u > b.u; });
    return {std::move(phi_prime), isos.front()};
}

ThreeIsogeny twist_isogeny(const ThreeIsogeny& phi, const Integer& d) {
    auto tw = quadratic_twist_with_map(phi.domain(), d);
    return velu_quotient(tw.curve, phi.kernel_x() * tw.x_scale);
}

}  // namespace selmer
