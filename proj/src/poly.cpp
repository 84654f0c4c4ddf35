#include "selmer/poly.hpp"

#include <algorithm>
#include <sstream>

namespace selmer {

QPoly::QPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) {
    for (auto& c : c_) c.canonicalize();
    trim();
}

void QPoly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational QPoly::coeff(int i) const {
    return i >= 0 && i < static_cast<int>(c_.size()) ? c_[i] : Rational(0);
}

Rational QPoly::operator()(const Rational& x) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

QPoly QPoly::derivative() const {
    std::vector<Rational> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<long>(i));
    return QPoly(std::move(d));
}

QPoly QPoly::monic() const {
    if (c_.empty()) return *this;
    return Rational(1) / c_.back() * *this;
}

QPoly operator+(const QPoly& a, const QPoly& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(int(i)) + b.coeff(int(i));
    return QPoly(std::move(r));
}

QPoly operator-(const QPoly& a, const QPoly& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(int(i)) - b.coeff(int(i));
    return QPoly(std::move(r));
}

QPoly operator*(const QPoly& a, const QPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return QPoly(std::move(r));
}

QPoly operator*(const Rational& s, const QPoly& a) {
    std::vector<Rational> r = a.c_;
    for (auto& c : r) c *= s;
    return QPoly(std::move(r));
}

std::pair<QPoly, QPoly> QPoly::divmod(const QPoly& a, const QPoly& b) {
    if (b.is_zero()) throw std::invalid_argument("QPoly::divmod by zero");
    std::vector<Rational> rem = a.c_;
    int db = b.degree();
    std::vector<Rational> quo(std::max(0, a.degree() - db + 1));
    for (int i = a.degree(); i >= db; --i) {
        if (rem[i] == 0) continue;
        Rational f = rem[i] / b.c_.back();
        quo[i - db] = f;
        for (int j = 0; j <= db; ++j) rem[i - db + j] -= f * b.c_[j];
    }
    return {QPoly(std::move(quo)), QPoly(std::move(rem))};
}

QPoly QPoly::gcd(QPoly a, QPoly b) {
    while (!b.is_zero()) {
        auto r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

std::vector<Integer> QPoly::primitive_integer_coeffs() const {
    Integer den = 1;
    for (const auto& c : c_) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    std::vector<Integer> r;
    Integer content = 0;
    for (const auto& c : c_) {
        Integer v = c.get_num() * (den / c.get_den());
        mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), v.get_mpz_t());
        r.push_back(v);
    }
    if (content > 1)
        for (auto& v : r) v /= content;
    return r;
}

std::string QPoly::to_string(const std::string& var) const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        if (c_[i] == 0) continue;
        Rational c = c_[i];
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        Rational a = abs(c);
        if (a != 1 || i == 0) os << a.get_str();
        if (i > 0) os << var;
        if (i > 1) os << "^" << i;
        first = false;
    }
    return os.str();
}

namespace {

std::vector<QPoly> sturm_chain(const QPoly& f) {
    std::vector<QPoly> chain{f, f.derivative()};
    while (!chain.back().is_zero()) {
        auto r = QPoly::divmod(chain[chain.size() - 2], chain.back()).second;
        if (r.is_zero()) break;
        chain.push_back(Rational(-1) * r);
    }
    return chain;
}

int sign_variations(const std::vector<QPoly>& chain, const Rational& x) {
    int variations = 0, last = 0;
    for (const auto& s : chain) {
        Rational v = s(x);
        int sg = sgn(v);
        if (sg == 0) continue;
        if (last != 0 && sg != last) ++variations;
        last = sg;
    }
    return variations;
}

QPoly squarefree_kernel(const QPoly& f) {
    QPoly g = QPoly::gcd(f, f.derivative());
    return g.degree() > 0 ? QPoly::divmod(f, g).first : f;
}

Rational cauchy_bound(const QPoly& f) {
    Rational m = 0;
    for (int i = 0; i < f.degree(); ++i) m = std::max(m, Rational(abs(f.coeff(i) / f.leading())));
    return m + 1;
}

std::vector<Integer> positive_divisors(const Integer& n) {
    std::vector<Integer> divs{1};
    for (const auto& [p, e] : factorize(n).factors) {
        std::size_t base = divs.size();
        Integer pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
        }
    }
    return divs;
}

}  // namespace

int real_root_count(const QPoly& f) {
    if (f.degree() <= 0) return 0;
    QPoly g = squarefree_kernel(f);
    auto chain = sturm_chain(g);
    Rational b = cauchy_bound(g);
    return sign_variations(chain, -b) - sign_variations(chain, b);
}

std::vector<Rational> rational_roots(const QPoly& f) {
    std::vector<Rational> roots;
    if (f.degree() <= 0) return roots;
    QPoly g = squarefree_kernel(f);
    // Peel off the root at zero so the integer model has a nonzero constant term.
    if (g.coeff(0) == 0) {
        roots.emplace_back(0);
        g = QPoly::divmod(g, QPoly({Rational(0), Rational(1)})).first;
    }
    if (g.degree() <= 0) return roots;
    auto ints = g.primitive_integer_coeffs();
    const Integer lead = abs(ints.back());
    const auto denominators = positive_divisors(lead);

    auto chain = sturm_chain(g);
    Rational bound = cauchy_bound(g);
    // Isolate real roots, then shrink each interval below width 1/lead so that
    // every admissible denominator leaves at most one numerator to test.
    std::vector<std::pair<Rational, Rational>> work{{-bound, bound}};
    const Rational target(1, lead);
    while (!work.empty()) {
        auto [lo, hi] = work.back();
        work.pop_back();
        int n = sign_variations(chain, lo) - sign_variations(chain, hi);
        if (n == 0) continue;
        if (n > 1 || hi - lo >= target) {
            Rational mid = (lo + hi) / 2;
            work.emplace_back(lo, mid);
            work.emplace_back(mid, hi);
            continue;
        }
        for (const auto& q : denominators) {
            Rational scaled_lo = lo * q;
            Integer num;
            mpz_fdiv_q(num.get_mpz_t(), scaled_lo.get_num_mpz_t(), scaled_lo.get_den_mpz_t());
            for (Integer p = num; Rational(p, q) <= hi; ++p) {
                Rational cand(p, q);
                cand.canonicalize();
                if (cand > lo && g(cand) == 0) roots.push_back(cand);
            }
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

// ---------------------------------------------------------------- F_p

namespace {
Integer mod_reduce(const Integer& a, const Integer& p) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
    return r;
}
Integer mod_inverse(const Integer& a, const Integer& p) {
    Integer r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t()) == 0)
        throw std::domain_error("not invertible mod p");
    return r;
}
}  // namespace

FpPoly::FpPoly(Integer p, std::vector<Integer> coeffs) : p_(std::move(p)), c_(std::move(coeffs)) {
    for (auto& c : c_) c = mod_reduce(c, p_);
    trim();
}

void FpPoly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Integer FpPoly::operator()(const Integer& x) const {
    Integer acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = mod_reduce(acc * x + *it, p_);
    return acc;
}

FpPoly FpPoly::derivative() const {
    std::vector<Integer> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<unsigned long>(i));
    return FpPoly(p_, std::move(d));
}

FpPoly FpPoly::rem(const FpPoly& a, const FpPoly& b) {
    if (b.is_zero()) throw std::invalid_argument("FpPoly::rem by zero");
    std::vector<Integer> r = a.c_;
    const int db = b.degree();
    const Integer inv = mod_inverse(b.c_.back(), a.p_);
    for (int i = a.degree(); i >= db; --i) {
        Integer f = mod_reduce(r[i] * inv, a.p_);
        if (f == 0) continue;
        for (int j = 0; j <= db; ++j) r[i - db + j] = mod_reduce(r[i - db + j] - f * b.c_[j], a.p_);
    }
    return FpPoly(a.p_, std::move(r));
}

FpPoly FpPoly::mul_mod(const FpPoly& a, const FpPoly& b, const FpPoly& m) {
    if (a.is_zero() || b.is_zero()) return FpPoly(a.p_, {});
    std::vector<Integer> r(a.c_.size() + b.c_.size() - 1, Integer(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return rem(FpPoly(a.p_, std::move(r)), m);
}

FpPoly FpPoly::gcd(FpPoly a, FpPoly b) {
    while (!b.is_zero()) {
        auto r = rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (a.is_zero()) return a;
    Integer inv = mod_inverse(a.c_.back(), a.p_);
    for (auto& c : a.c_) c = mod_reduce(c * inv, a.p_);
    return a;
}

int FpPoly::distinct_root_count() const {
    if (degree() <= 0) return 0;
    FpPoly x(p_, {Integer(0), Integer(1)});
    FpPoly result(p_, {Integer(1)});
    FpPoly base = rem(x, *this);
    for (std::size_t bit = mpz_sizeinbase(p_.get_mpz_t(), 2); bit-- > 0;) {
        result = mul_mod(result, result, *this);
        if (mpz_tstbit(p_.get_mpz_t(), bit)) result = mul_mod(result, base, *this);
    }
    std::vector<Integer> diff = result.c_;
    diff.resize(std::max<std::size_t>(diff.size(), 2), Integer(0));
    diff[1] -= 1;
    FpPoly g = gcd(*this, FpPoly(p_, std::move(diff)));
    return g.degree();
}

}  // namespace selmer
