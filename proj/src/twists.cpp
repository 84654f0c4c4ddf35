#include "selmer/twists.hpp"

#include "selmer/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace selmer {

namespace {

constexpr std::uint64_t kWindow = 1ull << 20;

std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

double t_term(int t) { return t + std::pow(3.0, t); }

}  // namespace

std::string TwistSignature::label() const {
    std::string out;
    for (const auto& c : classes) {
        if (!out.empty()) out += '|';
        out += c.place.to_string() + ":" + c.label();
    }
    return out;
}

TwistSignature signature_of(const Integer& d, const std::vector<Place>& S) {
    TwistSignature s;
    for (const auto& v : S) s.classes.push_back(local_squareclass(d, v));
    return s;
}

SignatureLattice::SignatureLattice(std::vector<Place> S) : places_(std::move(S)) {
    for (const auto& v : places_) {
        stride_.push_back(size_);
        size_ *= static_cast<std::size_t>(class_count(v));
        std::vector<char> sq;
        if (!v.is_infinite() && v.prime() != 2 && v.prime() < (1 << 24)) {
            const auto p = static_cast<std::uint64_t>(v.prime());
            sq.assign(p, 0);
            for (std::uint64_t x = 1; x < p; ++x) sq[x * x % p] = 1;
        }
        residues_.push_back(std::move(sq));
    }
}

std::size_t SignatureLattice::index(const TwistSignature& s) const {
    if (s.classes.size() != places_.size()) throw std::invalid_argument("signature does not match the place set");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < places_.size(); ++i) {
        if (!(s.classes[i].place == places_[i])) throw std::invalid_argument("signature place mismatch");
        idx += stride_[i] * static_cast<std::size_t>(s.classes[i].index());
    }
    return idx;
}

TwistSignature SignatureLattice::signature(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("signature index");
    TwistSignature s;
    for (std::size_t i = 0; i < places_.size(); ++i) {
        const auto k = static_cast<std::size_t>(class_count(places_[i]));
        s.classes.push_back(LocalSquareClass::from_index(places_[i], static_cast<int>(index / stride_[i] % k)));
    }
    return s;
}

Rational SignatureLattice::density(std::size_t index) const {
    Rational r = 1;
    for (const auto& c : signature(index).classes) r *= local_class_density(c);
    r.canonicalize();
    return r;
}

std::size_t SignatureLattice::index_of(std::uint64_t n, int sign) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < places_.size(); ++i) {
        const Place& v = places_[i];
        int k;
        if (v.is_infinite()) {
            k = sign > 0 ? 0 : 1;
        } else {
            const auto p = static_cast<std::uint64_t>(v.prime());
            const int val = n % p == 0 ? 1 : 0;
            const std::uint64_t m = val ? n / p : n;
            if (p == 2) {
                std::uint64_t r = m % 8;
                if (sign < 0) r = (8 - r) % 8;
                k = 4 * val + static_cast<int>(r - 1) / 2;
            } else {
                std::uint64_t r = m % p;
                if (sign < 0) r = (p - r) % p;
                bool square = residues_[i].empty() ? legendre(Integer(static_cast<unsigned long>(r)), Integer(static_cast<unsigned long>(p))) == 1
                                                   : residues_[i][r] != 0;
                k = 2 * val + (square ? 0 : 1);
            }
        }
        idx += stride_[i] * static_cast<std::size_t>(k);
    }
    return idx;
}

void for_each_squarefree(std::uint64_t lo, std::uint64_t hi, const std::function<bool(std::uint64_t)>& f) {
    if (lo < 1) lo = 1;
    if (hi <= lo) return;
    const std::uint64_t root = isqrt(hi);
    const auto& primes = small_primes(static_cast<std::uint32_t>(std::max<std::uint64_t>(root, 2)));
    std::vector<char> keep;
    for (std::uint64_t a = lo; a < hi; a += kWindow) {
        const std::uint64_t b = std::min(hi, a + kWindow);
        keep.assign(b - a, 1);
        for (std::uint32_t q : primes) {
            const std::uint64_t q2 = std::uint64_t(q) * q;
            if (q2 >= b) break;
            for (std::uint64_t m = (a + q2 - 1) / q2 * q2; m < b; m += q2) keep[m - a] = 0;
        }
        for (std::uint64_t n = a; n < b; ++n)
            if (keep[n - a] && !f(n)) return;
    }
}

std::map<int, Rational> RatioProfile::mu() const {
    std::map<int, Rational> out;
    for (const auto& e : entries) out[e.c.exponent()] += e.density;
    for (auto& [m, r] : out) r.canonicalize();
    return out;
}

const ProfileEntry& RatioProfile::lookup(const Integer& d) const {
    return entries.at(lattice.index(signature_of(squarefree_part(d), lattice.places())));
}

RatioProfile build_profile(const ThreeIsogeny& phi, const std::vector<Place>& S, const ProfileOptions& options) {
    const int k = std::max(1, options.representatives);
    RatioProfile prof{SignatureLattice(S), {}};
    const auto& lat = prof.lattice;
    prof.entries.resize(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        prof.entries[i].signature = lat.signature(i);
        prof.entries[i].density = lat.density(i);
    }

    // Smallest-|d| representatives: n ascending, +n before -n.
    std::size_t missing = lat.size();
    const std::uint64_t cap = 1ull << 36;
    std::uint64_t scanned = 1;
    for (std::uint64_t span = kWindow; missing > 0; span *= 2) {
        if (scanned >= cap) throw DomainError("no representative found for some twist signature");
        const std::uint64_t top = std::min(cap, scanned + span);
        for_each_squarefree(scanned, top, [&](std::uint64_t n) {
            for (int sign : {1, -1}) {
                auto& reps = prof.entries[lat.index_of(n, sign)].representatives;
                if (static_cast<int>(reps.size()) < k) {
                    reps.emplace_back(static_cast<unsigned long>(n));
                    if (sign < 0) reps.back() = -reps.back();
                    if (static_cast<int>(reps.size()) == k) --missing;
                }
            }
            return missing > 0;
        });
        scanned = top;
    }

    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t i = 0; i < prof.entries.size(); ++i)
        for (std::size_t j = 0; j < prof.entries[i].representatives.size(); ++j) jobs.emplace_back(i, j);
    std::vector<Pow3> values(jobs.size());
    parallel_for(jobs.size(), options.threads, [&](std::size_t job) {
        const auto [i, j] = jobs[job];
        values[job] = global_ratio(phi, S, prof.entries[i].representatives[j]).c;
    });
    for (std::size_t job = 0; job < jobs.size(); ++job) {
        auto& e = prof.entries[jobs[job].first];
        if (jobs[job].second == 0) {
            e.c = values[job];
            e.t = std::abs(e.c.exponent());
        } else if (values[job] != e.c) {
            throw DomainError("c(phi_d) not constant on signature " + e.signature.label() + ": d = " +
                              e.representatives[0].get_str() + " gives " + e.c.to_string() + ", d = " +
                              e.representatives[jobs[job].second].get_str() + " gives " +
                              values[job].to_string());
        }
    }
    return prof;
}

Rational exact_density(const RatioProfile& profile, const std::function<bool(int m)>& predicate) {
    Rational r = 0;
    for (const auto& e : profile.entries)
        if (predicate(e.c.exponent())) r += e.density;
    r.canonicalize();
    return r;
}

std::map<int, std::uint64_t> HeightTally::m_counts(const RatioProfile& profile) const {
    std::map<int, std::uint64_t> out;
    for (const auto& e : profile.entries) out[e.c.exponent()];
    for (std::size_t i = 0; i < signature_counts.size(); ++i)
        out[profile.entries[i].c.exponent()] += signature_counts[i];
    return out;
}

double HeightTally::mu_hat(const RatioProfile& profile, int m) const {
    if (total == 0) return 0;
    auto counts = m_counts(profile);
    auto it = counts.find(m);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

double HeightTally::average_t_term(const RatioProfile& profile) const {
    if (total == 0) return 0;
    long double sum = 0;
    for (std::size_t i = 0; i < signature_counts.size(); ++i)
        sum += static_cast<long double>(signature_counts[i]) * t_term(profile.entries[i].t);
    return static_cast<double>(sum / static_cast<long double>(total));
}

HeightTally enumerate_by_height(const RatioProfile& profile, std::uint64_t X, int threads) {
    if (X < 1) throw std::invalid_argument("enumerate_by_height: X must be at least 1");
    const auto& lat = profile.lattice;
    const std::size_t blocks = (X + kWindow - 1) / kWindow;
    std::vector<std::vector<std::uint64_t>> partial(blocks, std::vector<std::uint64_t>(lat.size(), 0));
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::uint64_t lo = 1 + b * kWindow;
        const std::uint64_t hi = std::min<std::uint64_t>(X + 1, lo + kWindow);
        auto& counts = partial[b];
        for_each_squarefree(lo, hi, [&](std::uint64_t n) {
            ++counts[lat.index_of(n, 1)];
            ++counts[lat.index_of(n, -1)];
            return true;
        });
    });
    HeightTally tally;
    tally.X = X;
    tally.signature_counts.assign(lat.size(), 0);
    for (const auto& counts : partial)
        for (std::size_t i = 0; i < counts.size(); ++i) tally.signature_counts[i] += counts[i];
    for (auto c : tally.signature_counts) tally.total += c;
    return tally;
}

SpotCheck spot_check(const ThreeIsogeny& phi, const RatioProfile& profile, std::uint64_t X, int samples,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> pick(1, X);
    SpotCheck out;
    long double sum = 0;
    while (out.samples < samples) {
        const std::uint64_t n = pick(rng);
        const bool negative = rng() & 1;
        Integer d(static_cast<unsigned long>(n));
        if (!is_squarefree(d)) continue;
        if (negative) d = -d;
        const GlobalRatio g = global_ratio(phi, profile.lattice.places(), d);
        if (g.c != profile.lookup(d).c) {
            ++out.mismatches;
            out.mismatched.push_back(d);
        }
        sum += t_term(g.t);
        ++out.samples;
    }
    out.average_t_term = samples > 0 ? static_cast<double>(sum / samples) : 0.0;
    return out;
}

std::vector<WeightedRatio> weighted_table(const RatioProfile& profile) {
    std::vector<WeightedRatio> out;
    out.reserve(profile.entries.size());
    for (const auto& e : profile.entries) out.push_back({e.signature.label(), e.c, e.density});
    return out;
}

std::map<int, Rational> mu_table(const std::vector<WeightedRatio>& table) {
    std::map<int, Rational> out;
    for (const auto& w : table) out[w.c.exponent()] += w.density;
    for (auto& [m, r] : out) r.canonicalize();
    return out;
}

Rational rank_bound(const std::vector<WeightedRatio>& table, int g) {
    if (g < 1) throw std::invalid_argument("rank_bound: g must be positive");
    Rational r = 0;
    for (const auto& w : table) {
        const int t = std::abs(w.c.exponent());
        r += w.density * (t + pow_int(3, static_cast<unsigned long>(t)));
    }
    r *= g;
    r.canonicalize();
    return r;
}

Rational rank_bound(const RatioProfile& profile, int g) { return rank_bound(weighted_table(profile), g); }

ProportionBounds proportion_bounds(const std::vector<WeightedRatio>& table) {
    auto mu = mu_table(table);
    const Rational t0 = mu.count(0) ? mu[0] : Rational(0);
    Rational t1 = (mu.count(1) ? mu[1] : Rational(0)) + (mu.count(-1) ? mu[-1] : Rational(0));
    t1.canonicalize();
    ProportionBounds b;
    b.rank0_lower = t0 / 2;
    b.selmer1_lower = Rational(5, 6) * t1;
    b.rank0_lower.canonicalize();
    b.selmer1_lower.canonicalize();
    b.t0_positive = t0 > 0;
    b.t1_positive = t1 > 0;
    return b;
}

ProportionBounds proportion_bounds(const RatioProfile& profile) { return proportion_bounds(weighted_table(profile)); }

}  // namespace selmer
