#pragma once

// Twist signatures, ratio profiles over the signature lattice, exact
// densities of T_m and enumeration of squarefree twists by height.

#include "selmer/ratios.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace selmer {

struct TwistSignature {
    std::vector<LocalSquareClass> classes;  // one per place of S, in S order

    std::string label() const;  // e.g. "2:2*3|3:u|13:pn|inf:-"
    friend bool operator==(const TwistSignature&, const TwistSignature&) = default;
};

TwistSignature signature_of(const Integer& d, const std::vector<Place>& S);

/// Mixed-radix indexing of the signature lattice of S.
class SignatureLattice {
public:
    explicit SignatureLattice(std::vector<Place> S);

    const std::vector<Place>& places() const { return places_; }
    std::size_t size() const { return size_; }
    std::size_t index(const TwistSignature& s) const;
    TwistSignature signature(std::size_t index) const;
    /// Product of local squarefree densities.
    Rational density(std::size_t index) const;

    /// Index of sign * n for a positive squarefree n, without big integers.
    std::size_t index_of(std::uint64_t n, int sign) const;

private:
    std::vector<Place> places_;
    std::vector<std::size_t> stride_;
    std::vector<std::vector<char>> residues_;  // squares mod odd p, when p is small
    std::size_t size_ = 1;
};

struct ProfileEntry {
    TwistSignature signature;
    std::vector<Integer> representatives;  // smallest |d| first
    Pow3 c;
    int t = 0;
    Rational density;
};

struct RatioProfile {
    SignatureLattice lattice;
    std::vector<ProfileEntry> entries;  // indexed like the lattice

    /// mu(T_m) for every m with T_m nonempty.
    std::map<int, Rational> mu() const;
    const ProfileEntry& lookup(const Integer& d) const;
};

struct ProfileOptions {
    int representatives = 4;  // 1 used for the table, the rest check constancy
    int threads = 1;
};

/// Throws DomainError naming the signature if c(phi_d) differs between
/// representatives of one signature.
RatioProfile build_profile(const ThreeIsogeny& phi, const std::vector<Place>& S, const ProfileOptions& options = {});

Rational exact_density(const RatioProfile& profile, const std::function<bool(int m)>& predicate);

/// Calls f(n) for every squarefree n in [lo, hi), ascending, sieving by
/// squared primes in windows of 2^20. Stops early when f returns false.
void for_each_squarefree(std::uint64_t lo, std::uint64_t hi, const std::function<bool(std::uint64_t)>& f);

struct HeightTally {
    std::uint64_t X = 0;
    std::uint64_t total = 0;                    // squarefree d with |d| <= X, both signs
    std::vector<std::uint64_t> signature_counts;  // indexed like the lattice

    std::map<int, std::uint64_t> m_counts(const RatioProfile& profile) const;
    double mu_hat(const RatioProfile& profile, int m) const;
    /// Average of t + 3^t over the enumerated twists.
    double average_t_term(const RatioProfile& profile) const;
};

HeightTally enumerate_by_height(const RatioProfile& profile, std::uint64_t X, int threads = 1);

struct SpotCheck {
    int samples = 0;
    int mismatches = 0;
    double average_t_term = 0;  // Monte-Carlo average of t + 3^t
    std::vector<Integer> mismatched;
};

/// Seeded sample of squarefree |d| <= X recomputed through global_ratio and
/// compared with the profile lookup.
SpotCheck spot_check(const ThreeIsogeny& phi, const RatioProfile& profile, std::uint64_t X, int samples,
                     std::uint64_t seed);

/// One signature's contribution, independent of how the table was built.
struct WeightedRatio {
    std::string signature;
    Pow3 c;
    Rational density;
};

std::vector<WeightedRatio> weighted_table(const RatioProfile& profile);
std::map<int, Rational> mu_table(const std::vector<WeightedRatio>& table);

/// g * sum over signatures of density * (t + 3^t).
Rational rank_bound(const std::vector<WeightedRatio>& table, int g = 1);
Rational rank_bound(const RatioProfile& profile, int g = 1);

struct ProportionBounds {
    Rational rank0_lower;    // mu(T_0) / 2
    Rational selmer1_lower;  // 5/6 (mu(T_1) + mu(T_-1))
    bool t0_positive = false;
    bool t1_positive = false;
};

ProportionBounds proportion_bounds(const std::vector<WeightedRatio>& table);
ProportionBounds proportion_bounds(const RatioProfile& profile);

}  // namespace selmer
