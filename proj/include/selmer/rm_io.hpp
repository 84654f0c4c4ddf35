#pragma once

// RM descriptors: line-oriented records carrying the dimension, kernel
// characters and per-place local Selmer ratio data of a 3-isogeny chain on an
// abelian variety with real multiplication. Grammar in docs/descriptor.md.

#include "selmer/twists.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace selmer {

/// Malformed descriptor text; line is 1-based.
class DescriptorParseError : public UsageError {
public:
    DescriptorParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

enum class PlaceKind { Finite, Real };

struct RMClass {
    std::string label;
    Pow3 c_phi, c_phiprime;
    // Set when the record was given as Tamagawa numbers c(A_d), c(B_d) and
    // the gamma pair at places over 3; c_phi and c_phiprime are then derived.
    std::optional<std::array<Integer, 2>> tamagawa;
    std::optional<std::array<Pow3, 2>> gamma;
    std::optional<Rational> density;
    bool hypothetical = false;
    int line = 0;
};

struct RMPlace {
    std::string name;  // over Q: a prime or "inf"
    PlaceKind kind = PlaceKind::Finite;
    int above3 = 0;    // [F_v : Q_3] for places over 3, else 0
    int class_count = 0;
    std::vector<RMClass> classes;
    int line = 0;
};

struct RMDescriptor {
    int version = 1;
    std::string name;
    int g = 1;
    int field_degree = 1;
    int real_places = 1;
    int k = 1;
    Integer chi = 1, chi_prime = -3;
    std::optional<std::vector<Integer>> rm_poly;  // leading coefficient first
    std::optional<Integer> polarization_degree;
    std::optional<Integer> torsion;                // order of a known rational torsion subgroup
    std::vector<Integer> bad_primes;
    std::optional<std::array<Rational, 5>> weierstrass;  // g = 1 model of A
    std::optional<std::vector<Integer>> curve_f, curve_h;  // y^2 + h y = f, leading first
    std::vector<Rational> fixed_points;                   // x of rational points fixed by the involution
    std::vector<RMPlace> places;
    std::set<std::string> hypothetical;  // scalar fields marked as placeholders
    std::map<std::string, int> lines;     // field -> line, for messages

    const RMPlace* find_place(const std::string& name) const;
};

RMDescriptor parse_descriptor(std::string_view text);
/// Throws UsageError when the file cannot be read.
RMDescriptor read_descriptor(const std::string& path);
/// Canonical text; parse_descriptor(write_descriptor(d)) reproduces d.
std::string write_descriptor(const RMDescriptor& d);

struct ValidationItem {
    std::string identity;
    bool pass = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationItem> items;

    bool pass() const;
    std::vector<std::string> failed() const;
    std::string csv() const;  // identity,result,detail
};

ValidationReport validate(const RMDescriptor& d);

struct RMAnalysis {
    std::vector<WeightedRatio> table;  // signatures, first place varying fastest
    std::map<int, Rational> mu;
    Rational rank_bound;
    ProportionBounds bounds;
};

/// Throws DomainError("densities required") when field_degree > 1 and some
/// class lacks a density, and DomainError listing the failures when validate
/// does not pass.
RMAnalysis analyze(const RMDescriptor& d);

/// g = 1 descriptor of an elliptic chain: every class of every place in S,
/// with c_v of phi_d and phi'_d taken at the smallest representative d.
RMDescriptor extract_descriptor(const IsogenyChain& chain, const std::string& name = "");

struct Mutation {
    std::string description;
    RMDescriptor descriptor;
};

/// Seeded single-constraint perturbations, cycling through a shuffled list
/// of the kinds applicable to d. Each one breaks at least one identity.
std::vector<Mutation> mutate(const RMDescriptor& d, int count, std::uint64_t seed);

}  // namespace selmer
