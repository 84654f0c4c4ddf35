#include "selmer/arith.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace selmer {

FactorizationIncomplete::FactorizationIncomplete(const Integer& survivor)
    : DomainError("factorization incomplete: composite survivor " + survivor.get_str() +
                  " exceeds the configured effort bound"),
      survivor_(survivor) {}

Integer Factorization::value() const {
    Integer v = sign;
    for (const auto& [p, e] : factors) {
        Integer pe;
        mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(e));
        v *= pe;
    }
    return v;
}

const std::vector<std::uint32_t>& small_primes(std::uint32_t n) {
    static std::mutex mu;
    static std::vector<std::uint32_t> primes;
    static std::uint32_t limit = 0;
    std::lock_guard lock(mu);
    if (n > limit) {
        std::vector<bool> composite(n + 1, false);
        primes.clear();
        for (std::uint32_t i = 2; i <= n; ++i) {
            if (composite[i]) continue;
            primes.push_back(i);
            for (std::uint64_t j = std::uint64_t(i) * i; j <= n; j += i) composite[j] = true;
        }
        limit = n;
    }
    return primes;
}

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

bool strong_probable_prime(const Integer& n, const Integer& base) {
    Integer d = n - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    Integer x;
    mpz_powm(x.get_mpz_t(), base.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return true;
    for (unsigned long r = 1; r < s; ++r) {
        mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), 2, n.get_mpz_t());
        if (x == n - 1) return true;
        if (x == 1) return false;
    }
    return false;
}

// Bases 2..41 are a deterministic witness set below this bound.
const Integer& mr_deterministic_bound() {
    static const Integer bound("3317044064679887385961981");
    return bound;
}

struct RhoBudget {
    std::uint64_t remaining;
    std::uint64_t rng;
};

// Brent's cycle-finding variant; returns a nontrivial factor or 0.
Integer pollard_brent(const Integer& n, RhoBudget& budget) {
    if (mpz_even_p(n.get_mpz_t())) return 2;
    while (budget.remaining > 0) {
        Integer c = Integer(static_cast<unsigned long>(splitmix(budget.rng) % 1'000'003ull)) + 1;
        Integer y = Integer(static_cast<unsigned long>(splitmix(budget.rng) % 1'000'003ull));
        Integer g = 1, q = 1, x, ys;
        std::uint64_t r = 1;
        constexpr std::uint64_t m = 128;
        while (g == 1 && budget.remaining > 0) {
            x = y;
            for (std::uint64_t i = 0; i < r; ++i) y = (y * y + c) % n;
            std::uint64_t k = 0;
            while (k < r && g == 1) {
                ys = y;
                std::uint64_t steps = std::min(m, r - k);
                for (std::uint64_t i = 0; i < steps; ++i) {
                    y = (y * y + c) % n;
                    q = (q * abs(x - y)) % n;
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += steps;
                budget.remaining = budget.remaining > steps ? budget.remaining - steps : 0;
                if (budget.remaining == 0) break;
            }
            r *= 2;
        }
        if (g == n) {
            do {
                ys = (ys * ys + c) % n;
                mpz_gcd(g.get_mpz_t(), Integer(abs(x - ys)).get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != 1 && g != n) return g;
    }
    return 0;
}

void split_into(const Integer& m, std::map<Integer, int>& acc, RhoBudget& budget, int multiplicity);

void add_factor(const Integer& m, std::map<Integer, int>& acc, RhoBudget& budget, int multiplicity) {
    if (m == 1) return;
    split_into(m, acc, budget, multiplicity);
}

void split_into(const Integer& m, std::map<Integer, int>& acc, RhoBudget& budget, int multiplicity) {
    if (is_prime(m)) {
        acc[m] += multiplicity;
        return;
    }
    if (mpz_perfect_power_p(m.get_mpz_t())) {
        for (unsigned long k = mpz_sizeinbase(m.get_mpz_t(), 2); k >= 2; --k) {
            Integer root;
            if (mpz_root(root.get_mpz_t(), m.get_mpz_t(), k) != 0) {
                add_factor(root, acc, budget, multiplicity * static_cast<int>(k));
                return;
            }
        }
    }
    Integer f = pollard_brent(m, budget);
    if (f == 0) throw FactorizationIncomplete(m);
    add_factor(f, acc, budget, multiplicity);
    add_factor(Integer(m / f), acc, budget, multiplicity);
}

// Pocklington-Lehmer: n - 1 = F * R with F >= sqrt(n) fully factored.
bool pocklington_prime(const Integer& n) {
    FactorOptions opts;
    opts.rho_iterations = 1ull << 20;
    Integer nm1 = n - 1;
    Integer remaining = nm1;
    std::vector<Integer> qs;
    Integer F = 1;
    for (std::uint32_t p : small_primes()) {
        if (mpz_divisible_ui_p(remaining.get_mpz_t(), p)) {
            qs.emplace_back(p);
            while (mpz_divisible_ui_p(remaining.get_mpz_t(), p)) {
                remaining /= p;
                F *= p;
            }
        }
    }
    if (F * F <= n && remaining > 1) {
        // Try to finish the cofactor; partial progress is enough once F^2 > n.
        try {
            auto rest = factorize(remaining, opts);
            for (const auto& pp : rest.factors) {
                qs.push_back(pp.prime);
                for (int i = 0; i < pp.exponent; ++i) F *= pp.prime;
            }
        } catch (const FactorizationIncomplete&) {
        }
    }
    if (F * F <= n) throw DomainError("primality of " + n.get_str() + " could not be proven");
    for (const Integer& q : qs) {
        bool witnessed = false;
        for (unsigned long a = 2; a < 1000 && !witnessed; ++a) {
            Integer base = a, t;
            mpz_powm(t.get_mpz_t(), base.get_mpz_t(), nm1.get_mpz_t(), n.get_mpz_t());
            if (t != 1) return false;
            Integer e = nm1 / q;
            mpz_powm(t.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), n.get_mpz_t());
            Integer g;
            Integer tm1 = t - 1;
            mpz_gcd(g.get_mpz_t(), tm1.get_mpz_t(), n.get_mpz_t());
            if (g == 1) witnessed = true;
            else if (g != n) return false;
        }
        if (!witnessed) throw DomainError("primality of " + n.get_str() + " could not be proven");
    }
    return true;
}

}  // namespace

bool is_prime(const Integer& n) {
    if (n < 2) return false;
    for (unsigned long p : {2ul, 3ul, 5ul, 7ul, 11ul, 13ul, 17ul, 19ul, 23ul, 29ul, 31ul, 37ul, 41ul}) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
    }
    if (n < 43 * 43) return true;
    for (unsigned long a : {2ul, 3ul, 5ul, 7ul, 11ul, 13ul, 17ul, 19ul, 23ul, 29ul, 31ul, 37ul, 41ul}) {
        if (!strong_probable_prime(n, Integer(a))) return false;
    }
    if (n < mr_deterministic_bound()) return true;
    return pocklington_prime(n);
}

Factorization factorize(const Integer& n, const FactorOptions& options) {
    if (n == 0) throw std::invalid_argument("factorize: zero has no factorization");
    Factorization result;
    result.sign = n < 0 ? -1 : 1;
    Integer m = abs(n);
    std::map<Integer, int> acc;
    bool exhausted = true;
    const auto& primes = small_primes(std::max<std::uint32_t>(options.trial_bound, 2));
    std::size_t next = 0;
    // Native fast path while the cofactor fits in a machine word.
    if (mpz_fits_ulong_p(m.get_mpz_t())) {
        unsigned long w = m.get_ui();
        for (; next < primes.size(); ++next) {
            const std::uint64_t p = primes[next];
            if (p > options.trial_bound) break;
            if (p * p > w) {
                exhausted = false;
                break;
            }
            if (w % p != 0) continue;
            int e = 0;
            while (w % p == 0) {
                w /= p;
                ++e;
            }
            acc[Integer(static_cast<unsigned long>(p))] += e;
        }
        m = w;
        next = exhausted ? primes.size() : next;
    }
    for (; next < primes.size(); ++next) {
        const std::uint32_t p = primes[next];
        if (p > options.trial_bound) break;
        if (Integer(p) * p > m) {
            exhausted = false;
            break;
        }
        if (!mpz_divisible_ui_p(m.get_mpz_t(), p)) continue;
        int e = 0;
        while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
            ++e;
        }
        acc[Integer(p)] += e;
    }
    if (m > 1) {
        if (!exhausted) {
            acc[m] += 1;
        } else {
            RhoBudget budget{options.rho_iterations, options.seed};
            split_into(m, acc, budget, 1);
        }
    }
    for (auto& [p, e] : acc) result.factors.push_back({p, e});
    return result;
}

Integer pow_int(const Integer& base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

int valuation(const Integer& n, const Integer& p) {
    if (n == 0) throw std::invalid_argument("valuation of zero");
    Integer m = n;
    return static_cast<int>(mpz_remove(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t()));
}

int valuation(const Rational& q, const Integer& p) {
    return valuation(Integer(q.get_num()), p) - valuation(Integer(q.get_den()), p);
}

int legendre(const Integer& a, const Integer& p) {
    if (p == 2) return mpz_odd_p(a.get_mpz_t()) ? 1 : 0;
    return mpz_jacobi(a.get_mpz_t(), p.get_mpz_t());
}

bool is_squarefree(const Integer& n) {
    if (n == 0) return false;
    for (const auto& pp : factorize(n).factors)
        if (pp.exponent > 1) return false;
    return true;
}

Integer squarefree_part(const Integer& n, const FactorOptions& options) {
    if (n == 0) throw std::invalid_argument("squarefree part of zero");
    auto f = factorize(n, options);
    Integer r = f.sign;
    for (const auto& pp : f.factors)
        if (pp.exponent % 2) r *= pp.prime;
    return r;
}

Integer squarefree_part(const Rational& q, const FactorOptions& options) {
    return squarefree_part(Integer(q.get_num() * q.get_den()), options);
}

Integer fundamental_discriminant(const Integer& n, const FactorOptions& options) {
    Integer s = squarefree_part(n, options);
    if (s == 1) return 1;
    Integer r = s % 4;
    if (r < 0) r += 4;
    return r == 1 ? s : Integer(4 * s);
}

// ---------------------------------------------------------------- places

Place Place::finite(std::int64_t p) {
    if (p < 2) throw std::invalid_argument("Place::finite: not a prime");
    return Place(p);
}

std::int64_t Place::prime() const {
    if (is_infinite()) throw std::logic_error("Place::prime on the real place");
    return p_;
}

std::string Place::to_string() const { return is_infinite() ? "inf" : std::to_string(p_); }

bool operator<(const Place& a, const Place& b) {
    if (a.is_infinite()) return false;
    if (b.is_infinite()) return true;
    return a.p_ < b.p_;
}

int class_count(const Place& place) {
    if (place.is_infinite()) return 2;
    return place.prime() == 2 ? 8 : 4;
}

int LocalSquareClass::index() const {
    if (place.is_infinite()) return unit_label > 0 ? 0 : 1;
    if (place.prime() == 2) return 4 * valuation + (unit_label - 1) / 2;
    return 2 * valuation + unit_label;
}

LocalSquareClass LocalSquareClass::from_index(Place place, int index) {
    if (index < 0 || index >= class_count(place)) throw std::out_of_range("square class index");
    if (place.is_infinite()) return {place, 0, index == 0 ? 1 : -1};
    if (place.prime() == 2) return {place, index / 4, 2 * (index % 4) + 1};
    return {place, index / 2, index % 2};
}

std::string LocalSquareClass::label() const {
    if (place.is_infinite()) return unit_label > 0 ? "+" : "-";
    if (place.prime() == 2) return (valuation ? "2*" : "") + std::to_string(unit_label);
    std::string u = unit_label == 0 ? "u" : "n";
    return valuation ? "p" + u : u;
}

LocalSquareClass local_squareclass(const Integer& d, const Place& place) {
    if (d == 0) throw std::invalid_argument("local_squareclass: d = 0");
    if (place.is_infinite()) return {place, 0, d > 0 ? 1 : -1};
    const Integer p = static_cast<long>(place.prime());
    Integer u = d;
    int v = static_cast<int>(mpz_remove(u.get_mpz_t(), u.get_mpz_t(), p.get_mpz_t()));
    if (place.prime() == 2) {
        Integer r = u % 8;
        if (r < 0) r += 8;
        return {place, v % 2, static_cast<int>(r.get_si())};
    }
    return {place, v % 2, legendre(u, p) == 1 ? 0 : 1};
}

Rational local_class_density(const LocalSquareClass& cls) {
    if (cls.place.is_infinite()) return Rational(1, 2);
    const long p = static_cast<long>(cls.place.prime());
    if (p == 2) return cls.valuation ? Rational(1, 12) : Rational(1, 6);
    Rational r = cls.valuation ? Rational(1, 2 * (p + 1)) : Rational(p, 2 * (p + 1));
    r.canonicalize();
    return r;
}

}  // namespace selmer
