#include "selmer/twists.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace selmer;

namespace {
const Curve E0(1, 0, 1, 0, 0);

const IsogenyChain& e0_chain() {
    static const IsogenyChain chain = make_chain(E0);
    return chain;
}

const RatioProfile& e0_profile() {
    static const RatioProfile prof = build_profile(e0_chain().phi, e0_chain().places);
    return prof;
}

std::vector<Place> s_e0() {
    return {Place::finite(2), Place::finite(3), Place::finite(13), Place::infinity()};
}
}  // namespace

TEST(Signature, Examples) {
    auto one = signature_of(1, s_e0());
    for (auto& c : one.classes) EXPECT_EQ(c.index(), 0);
    auto s = signature_of(-26, s_e0());
    EXPECT_EQ(s.classes[0].valuation, 1);
    EXPECT_EQ(s.classes[0].unit_label, 3);
    EXPECT_EQ(s.classes[1].valuation, 0);
    EXPECT_EQ(s.classes[1].unit_label, 0);
    EXPECT_EQ(s.classes[2].valuation, 1);
    EXPECT_EQ(s.classes[2].unit_label, 1);
    EXPECT_EQ(s.classes[3].unit_label, -1);
    EXPECT_EQ(s.label(), "2:2*3|3:u|13:pn|inf:-");
}

TEST(Signature, SquareclassInvariance) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Integer d = static_cast<long>(rng() % 100000) + 1;
        if (rng() & 1) d = -d;
        Integer m = static_cast<long>(rng() % 50) + 1;
        EXPECT_EQ(signature_of(d, s_e0()), signature_of(squarefree_part(Integer(d * m * m)), s_e0()));
    }
}

TEST(Lattice, IndexingAndDensity) {
    SignatureLattice lat(s_e0());
    EXPECT_EQ(lat.size(), 256u);
    Rational total = 0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        EXPECT_EQ(lat.index(lat.signature(i)), i);
        total += lat.density(i);
    }
    EXPECT_EQ(total, 1);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t n = rng() % 10'000'000 + 1;
        int sign = (rng() & 1) ? 1 : -1;
        Integer d(static_cast<unsigned long>(n));
        if (!is_squarefree(d)) continue;
        EXPECT_EQ(lat.index_of(n, sign), lat.index(signature_of(sign * d, lat.places()))) << n;
    }
}

TEST(Sieve, SmallHeight) {
    std::vector<long> got;
    for_each_squarefree(1, 11, [&](std::uint64_t n) {
        got.push_back(static_cast<long>(n));
        return true;
    });
    EXPECT_EQ(got, (std::vector<long>{1, 2, 3, 5, 6, 7, 10}));
    auto tally = enumerate_by_height(e0_profile(), 10);
    EXPECT_EQ(tally.total, 14u);
}

TEST(Sieve, MatchesTrialDivisionAcrossWindows) {
    std::uint64_t lo = (1u << 20) - 500, hi = (1u << 20) + 500, count = 0, expect = 0;
    for_each_squarefree(lo, hi, [&](std::uint64_t) {
        ++count;
        return true;
    });
    for (std::uint64_t n = lo; n < hi; ++n) expect += is_squarefree(Integer(static_cast<unsigned long>(n)));
    EXPECT_EQ(count, expect);
}

TEST(Density, LocalOracles) {
    // Exact values against counts of squarefree |d| <= 10^6.
    const Rational rho2_even = local_class_density({Place::finite(2), 1, 1}) * 4;
    const Rational rho13_sq = local_class_density({Place::finite(13), 0, 0});
    EXPECT_EQ(rho2_even, Rational(1, 3));
    EXPECT_EQ(rho13_sq, Rational(13, 28));
    std::uint64_t total = 0, even = 0, sq13 = 0;
    std::vector<char> qr(13, 0);
    for (int x = 1; x < 13; ++x) qr[x * x % 13] = 1;
    for_each_squarefree(1, 1'000'001, [&](std::uint64_t n) {
        ++total;
        even += n % 2 == 0;
        sq13 += qr[n % 13];
        return true;
    });
    EXPECT_NEAR(static_cast<double>(even) / total, 1.0 / 3, 2e-3);
    EXPECT_NEAR(static_cast<double>(sq13) / total, 13.0 / 28, 2e-3);
}

TEST(Profile, E0Structure) {
    const auto& prof = e0_profile();
    EXPECT_EQ(prof.entries.size(), 256u);
    EXPECT_EQ(exact_density(prof, [](int) { return true; }), 1);
    Rational sum = 0;
    for (auto& [m, r] : prof.mu()) sum += r;
    EXPECT_EQ(sum, 1);
    for (const auto& e : prof.entries) {
        EXPECT_EQ(e.representatives.size(), 4u);
        EXPECT_LE(e.t, 1 + 4);
        EXPECT_EQ(prof.lookup(e.representatives[0]).c, e.c);
    }
    EXPECT_EQ(prof.lookup(1).c, global_ratio(e0_chain().phi, e0_chain().places, 1).c);
}

TEST(Profile, DualIsNegated) {
    const auto& prof = e0_profile();
    auto dual = build_profile(e0_chain().phi_prime(), e0_chain().places);
    for (std::size_t i = 0; i < prof.entries.size(); ++i)
        EXPECT_EQ(dual.entries[i].c.exponent(), -prof.entries[i].c.exponent());
    EXPECT_EQ(rank_bound(dual), rank_bound(prof));
}

TEST(Profile, ThreadCountDoesNotMatter) {
    auto a = build_profile(e0_chain().phi, e0_chain().places, {4, 3});
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_EQ(a.entries[i].c, e0_profile().entries[i].c);
        EXPECT_EQ(a.entries[i].representatives, e0_profile().entries[i].representatives);
    }
    auto t1 = enumerate_by_height(e0_profile(), 3'000'000, 1);
    auto t3 = enumerate_by_height(e0_profile(), 3'000'000, 3);
    EXPECT_EQ(t1.signature_counts, t3.signature_counts);
}

TEST(Bounds, Formulas) {
    RatioProfile flat = e0_profile();
    for (auto& e : flat.entries) {
        e.c = Pow3{};
        e.t = 0;
    }
    EXPECT_EQ(rank_bound(flat, 1), 1);
    EXPECT_EQ(rank_bound(flat, 3), 3);
    auto b = proportion_bounds(flat);
    EXPECT_EQ(b.rank0_lower, Rational(1, 2));
    EXPECT_EQ(b.selmer1_lower, 0);
    EXPECT_FALSE(b.t1_positive);

    auto e0 = proportion_bounds(e0_profile());
    EXPECT_TRUE(e0.t0_positive);
    EXPECT_TRUE(e0.t1_positive);
    auto mu = e0_profile().mu();
    EXPECT_EQ(e0.rank0_lower, mu[0] / 2);
    EXPECT_EQ(e0.selmer1_lower, Rational(5, 6) * (mu[1] + mu[-1]));
    EXPECT_LE(e0.rank0_lower + e0.selmer1_lower, Rational(4, 3));
}

TEST(Enumeration, E0AgreesWithExactDensities) {
    const auto& prof = e0_profile();
    auto tally = enumerate_by_height(prof, 1'000'000);
    for (auto& [m, mu] : prof.mu()) EXPECT_NEAR(tally.mu_hat(prof, m), mu.get_d(), 0.005) << "m=" << m;
    const double exact = rank_bound(prof).get_d();
    EXPECT_NEAR(tally.average_t_term(prof) / exact, 1.0, 0.01);
}

TEST(Enumeration, SpotCheckFullPipeline) {
    auto sc = spot_check(e0_chain().phi, e0_profile(), 1'000'000, 150, 42);
    EXPECT_EQ(sc.samples, 150);
    EXPECT_EQ(sc.mismatches, 0);
    EXPECT_GT(sc.average_t_term, 1.0);
}
