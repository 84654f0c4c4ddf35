#include "selmer/rm_io.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace selmer;

namespace {

std::string fixture(const std::string& name) { return std::string(SELMER_FIXTURES) + "/" + name; }

bool failed(const ValidationReport& r, const std::string& identity) {
    auto f = r.failed();
    return std::find(f.begin(), f.end(), identity) != f.end();
}

// Small descriptor over Q with places 3 and inf only.
std::string toy(const std::string& extra = "", const std::string& three = "1 3", const std::string& inf_plus = "1/3 1") {
    return "rmd 1\nname toy\ng 1\nchi 1\nchi_prime -3\n" + extra +
           "place 3 finite classes 4 above3 1\n"
           "class 3 u ratio " + three + "\n"
           "class 3 n ratio 1 3\n"
           "class 3 pu ratio 3 1\n"
           "class 3 pn ratio 3 1\n"
           "place inf real classes 2\n"
           "class inf + ratio " + inf_plus + "\n"
           "class inf - ratio 1 1/3\n";
}

}  // namespace

TEST(Descriptor, FixturesParseAndValidate) {
    for (const char* f : {"genus2_rm3.rmd", "j0_127.rmd", "j0_109.rmd"}) {
        auto d = read_descriptor(fixture(f));
        auto r = validate(d);
        EXPECT_TRUE(r.pass()) << f << "\n" << r.csv();
    }
}

TEST(Descriptor, FixtureStatedConstants) {
    auto g2 = read_descriptor(fixture("genus2_rm3.rmd"));
    EXPECT_EQ(g2.g, 2);
    EXPECT_EQ(*g2.curve_f, (std::vector<Integer>{1, -1, 1, -3, -1, 5}));
    ASSERT_EQ(g2.fixed_points.size(), 1u);
    EXPECT_EQ(g2.fixed_points[0], -1);
    EXPECT_EQ(*g2.rm_poly, (std::vector<Integer>{1, 0, -3}));

    auto a127 = read_descriptor(fixture("j0_127.rmd"));
    EXPECT_EQ(a127.g, 7);
    EXPECT_EQ(*a127.polarization_degree, 8);

    auto a109 = read_descriptor(fixture("j0_109.rmd"));
    EXPECT_EQ(a109.g, 4);
    EXPECT_EQ(*a109.torsion, 9);
    EXPECT_EQ(*a109.polarization_degree, 32);
    EXPECT_EQ(*a109.rm_poly, (std::vector<Integer>{1, -5, 3, 6, 1}));

    // Placeholders are marked; stated values are not.
    for (const auto* d : {&g2, &a127, &a109}) {
        EXPECT_TRUE(d->hypothetical.count("k"));
        EXPECT_FALSE(d->hypothetical.count("g"));
        EXPECT_FALSE(d->hypothetical.count("polarization_degree"));
        for (const auto& p : d->places)
            for (const auto& c : p.classes) EXPECT_TRUE(c.hypothetical);
    }
}

TEST(Descriptor, GenusTwoBadPrimeFromDiscriminant) {
    // disc(x^5 - x^4 + x^3 - 3x^2 - x + 5) = 2^8 17^3 (PARI): 17 must be a place.
    auto d = read_descriptor(fixture("genus2_rm3.rmd"));
    d.places.erase(std::remove_if(d.places.begin(), d.places.end(), [](const RMPlace& p) { return p.name == "17"; }),
                   d.places.end());
    auto r = validate(d);
    EXPECT_TRUE(failed(r, "bad_places"));
    EXPECT_NE(r.csv().find("bad prime 17"), std::string::npos);
}

TEST(Descriptor, SingularModelAndMovedFixedPoint) {
    auto d = read_descriptor(fixture("genus2_rm3.rmd"));
    d.curve_f = std::vector<Integer>{1, 0, -2, 0, 1, 0};  // x (x^2 - 1)^2
    d.fixed_points = {};
    EXPECT_TRUE(failed(validate(d), "curve_model"));

    auto e = read_descriptor(fixture("genus2_rm3.rmd"));
    e.fixed_points = {Rational(1)};
    EXPECT_TRUE(failed(validate(e), "fixed_points"));
}

TEST(Descriptor, MutationsFail) {
    for (const char* f : {"genus2_rm3.rmd", "j0_127.rmd", "j0_109.rmd"}) {
        auto d = read_descriptor(fixture(f));
        for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
            auto ms = mutate(d, 10, seed);
            ASSERT_EQ(ms.size(), 10u);
            for (const auto& m : ms) EXPECT_FALSE(validate(m.descriptor).pass()) << f << ": " << m.description;
        }
        EXPECT_EQ(mutate(d, 10, 5)[3].description, mutate(d, 10, 5)[3].description);
    }
}

TEST(Descriptor, MutationsSurviveTextRoundTrip) {
    auto d = read_descriptor(fixture("j0_109.rmd"));
    for (const auto& m : mutate(d, 10, 11)) {
        auto back = parse_descriptor(write_descriptor(m.descriptor));
        EXPECT_FALSE(validate(back).pass()) << m.description;
    }
}

TEST(Descriptor, TextRoundTrip) {
    for (const char* f : {"genus2_rm3.rmd", "j0_127.rmd", "j0_109.rmd"}) {
        auto d = read_descriptor(fixture(f));
        auto text = write_descriptor(d);
        auto again = parse_descriptor(text);
        EXPECT_EQ(write_descriptor(again), text);
        EXPECT_EQ(again.hypothetical, d.hypothetical);
        EXPECT_EQ(analyze(again).rank_bound, analyze(d).rank_bound);
    }
}

TEST(Descriptor, ParseErrorsCarryLine) {
    auto line_of = [](const std::string& text) {
        try {
            parse_descriptor(text);
        } catch (const DescriptorParseError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("rmd 2\n"), 1);
    EXPECT_EQ(line_of("# c\n\nfoo 1\n"), 3);
    EXPECT_EQ(line_of("rmd 1\ng 1\nchi 1\nchi_prime x\n"), 4);
    EXPECT_EQ(line_of("rmd 1\ng 1\ng 2\n"), 3);
    EXPECT_EQ(line_of("rmd 1\ng 1\nchi 1\nchi_prime -3\nclass 3 u ratio 1 3\n"), 5);
    EXPECT_EQ(line_of("rmd 1\ng 1\nchi 1\nchi_prime -3\nplace 3 finite classes 4\nclass 3 u ratio 2 1\n"), 6);
    EXPECT_EQ(line_of("rmd 1\ng 1\nchi 1\nchi_prime -3\nplace 3 finite classes 4\nclass 3 u ratio 1 1 extra\n"), 6);
    EXPECT_EQ(line_of("rmd 1\ng 1\nchi 1\nchi_prime -3\nplace inf real classes 2 above3 1\n"), 5);
    EXPECT_EQ(line_of("rmd 1\ng 1\nwhat\n"), 3);
    EXPECT_THROW(read_descriptor("/nonexistent/x.rmd"), UsageError);
}

TEST(Descriptor, TamagawaForm) {
    auto d = parse_descriptor(toy());
    ASSERT_TRUE(validate(d).pass()) << validate(d).csv();
    auto t = parse_descriptor(
        "rmd 1\ng 1\nchi 1\nchi_prime -3\nplace 3 finite classes 4 above3 1\n"
        "class 3 u tamagawa 1 1 gamma 1 3\nclass 3 n tamagawa 3 1 gamma 3 9\n"
        "class 3 pu tamagawa 1 3\nclass 3 pn ratio 3 1\n"
        "place inf real classes 2\nclass inf + ratio 1/3 1\nclass inf - ratio 1 1/3\n");
    const auto& cls = t.places[0].classes;
    EXPECT_EQ(cls[1].c_phi.exponent(), 0);       // 1/3 * 3
    EXPECT_EQ(cls[1].c_phiprime.exponent(), 3);  // 3 * 9
    EXPECT_EQ(cls[2].c_phi.exponent(), 1);
    EXPECT_EQ(cls[2].c_phiprime.exponent(), -1);
    auto r = validate(t);
    EXPECT_TRUE(failed(r, "pi_at_3"));   // 3 * 27 and 1 at the Tamagawa-only class
    EXPECT_FALSE(failed(r, "archimedean"));
    EXPECT_NE(write_descriptor(t).find("tamagawa 3 1 gamma 3 9"), std::string::npos);
}

TEST(Descriptor, NamedFailures) {
    auto bad_chi = parse_descriptor(toy());
    bad_chi.chi_prime = 5;
    auto r = validate(bad_chi);
    EXPECT_TRUE(failed(r, "kernel_duality"));
    EXPECT_FALSE(failed(r, "kernel_characters"));

    // k = 2 with a signature whose c(pi) is not 1.
    auto k2 = parse_descriptor(toy("k 2\n", "1 9"));
    auto r2 = validate(k2);
    EXPECT_TRUE(failed(r2, "pi_global"));

    auto arch = parse_descriptor(toy("", "1 3", "1/3 1/3"));
    EXPECT_TRUE(failed(validate(arch), "archimedean"));

    // c_3(phi_d) = 9 on the integral locus with [F:Q] = 1.
    auto win = parse_descriptor(toy("", "9 1"));
    auto rw = validate(win);
    EXPECT_TRUE(failed(rw, "c3_window"));

    auto pol = parse_descriptor(toy("polarization_degree 6\n"));
    EXPECT_TRUE(failed(validate(pol), "polarization_prime_to_3"));

    auto rm = parse_descriptor(toy("rm_poly 1 0 1\n"));  // x^2 + 1 with g = 1
    EXPECT_TRUE(failed(validate(rm), "rm_field"));
    auto g2 = parse_descriptor(toy("rm_poly 1 0 1\n"));
    g2.g = 2;
    EXPECT_TRUE(failed(validate(g2), "rm_field"));  // no real roots
    EXPECT_FALSE(failed(validate(g2), "dimensions"));

    auto tors = parse_descriptor(toy("torsion 4\n"));
    EXPECT_TRUE(failed(validate(tors), "rational_kernel"));
}

TEST(Descriptor, AllTrivialRatiosGiveRankBoundG) {
    std::string text =
        "rmd 1\ng 7\nchi 1\nchi_prime -3\n"
        "place 3 finite classes 4 above3 1\n"
        "class 3 u ratio 3 1\nclass 3 n ratio 3 1\nclass 3 pu ratio 3 1\nclass 3 pn ratio 3 1\n"
        "place inf real classes 2\nclass inf + ratio 1/3 1\nclass inf - ratio 1/3 1\n";
    auto a = analyze(parse_descriptor(text));
    EXPECT_EQ(a.rank_bound, 7);
    EXPECT_EQ(a.bounds.rank0_lower, Rational(1, 2));
    EXPECT_EQ(a.bounds.selmer1_lower, 0);
    EXPECT_EQ(a.table.size(), 8u);
}

TEST(Descriptor, DensitiesRequiredOverLargerFields) {
    std::string base =
        "rmd 1\ng 2\nfield_degree 2\nreal_places 2\nchi 1\nchi_prime -3\n"
        "place v3 finite classes 2 above3 2\n"
        "class v3 a ratio 3 3 D1\nclass v3 b ratio 9 1 D1\n"
        "place r1 real classes 2\nclass r1 + ratio 1/3 1 D2\nclass r1 - ratio 1 1/3 D2\n"
        "place r2 real classes 2\nclass r2 + ratio 1/3 1 D2\nclass r2 - ratio 1 1/3 D2\n";
    auto with = [&](const std::string& d1, const std::string& d2) {
        std::string s = base;
        for (auto [tag, val] : {std::pair{std::string("D1"), d1}, std::pair{std::string("D2"), d2}}) {
            for (auto pos = s.find(tag); pos != std::string::npos; pos = s.find(tag)) s.replace(pos, 2, val);
        }
        return parse_descriptor(s);
    };
    auto none = with("", "");
    EXPECT_TRUE(validate(none).pass()) << validate(none).csv();
    try {
        analyze(none);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("densities required"), std::string::npos);
    }
    auto full = with("density 1/2", "density 1/2");
    auto a = analyze(full);
    // c(phi_d) exponents: (1 or 2) + (-1 or 0) + (-1 or 0).
    EXPECT_EQ(a.table.size(), 8u);
    EXPECT_EQ(a.mu.at(0), Rational(3, 8));
    EXPECT_EQ(a.mu.at(1), Rational(3, 8));
    EXPECT_EQ(a.mu.at(-1), Rational(1, 8));
    EXPECT_EQ(a.mu.at(2), Rational(1, 8));
    EXPECT_EQ(a.rank_bound, 2 * (Rational(3, 8) * 1 + Rational(4, 8) * 4 + Rational(1, 8) * 11));
}

TEST(Descriptor, EllipticRoundTripMatchesNative) {
    for (const char* text : {"[1,0,1,0,0]", "[0,0,0,0,16]", "[0,0,0,0,2]", "[-3,0,1,0,0]", "[4,0,7,0,0]"}) {
        auto chain = make_chain(Curve::parse(text));
        auto d = extract_descriptor(chain);
        auto r = validate(d);
        ASSERT_TRUE(r.pass()) << text << "\n" << r.csv();
        auto back = parse_descriptor(write_descriptor(d));
        auto a = analyze(back);
        auto prof = build_profile(chain.phi, chain.places);
        auto native = weighted_table(prof);
        ASSERT_EQ(a.table.size(), native.size());
        for (std::size_t i = 0; i < native.size(); ++i) {
            EXPECT_EQ(a.table[i].signature, native[i].signature);
            EXPECT_EQ(a.table[i].c, native[i].c) << native[i].signature;
            EXPECT_EQ(a.table[i].density, native[i].density);
        }
        auto nb = proportion_bounds(prof);
        EXPECT_EQ(a.rank_bound, rank_bound(prof)) << text;
        EXPECT_EQ(a.bounds.rank0_lower, nb.rank0_lower);
        EXPECT_EQ(a.bounds.selmer1_lower, nb.selmer1_lower);
        EXPECT_EQ(a.mu, prof.mu());
    }
}

TEST(Descriptor, ExtractedCharactersAndModel) {
    // y^2 = x^3 + 2 has kernel characters 8 and -24.
    auto d = extract_descriptor(make_chain(Curve::parse("[0,0,0,0,2]")));
    std::set<Integer> chars{d.chi, d.chi_prime};
    EXPECT_EQ(chars, (std::set<Integer>{8, -24}));
    auto e = d;
    e.chi = 5;
    e.chi_prime = -15;
    auto r = validate(e);
    EXPECT_FALSE(failed(r, "kernel_duality"));
    EXPECT_TRUE(failed(r, "curve_model"));
}
