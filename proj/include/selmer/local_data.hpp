#pragma once

// Reduction data at finite primes via Tate's algorithm.

#include "selmer/elliptic.hpp"

#include <string>
#include <vector>

namespace selmer {

enum class ReductionClass { Good, SplitMultiplicative, NonsplitMultiplicative, Additive };

std::string to_string(ReductionClass r);

struct LocalReduction {
    Integer p;
    std::string kodaira;  // "I0", "I5", "I0*", "I2*", "II", "III", "IV", "IV*", "III*", "II*"
    int tamagawa = 1;
    ReductionClass reduction = ReductionClass::Good;
    int conductor_exponent = 0;
    int disc_valuation = 0;  // v_p of the minimal discriminant
    /// minimal model = input.transform(change); change.u is the scaling u.
    ModelChange change;
    Curve minimal_model;
};

/// Tate's algorithm at p on any (possibly non-integral) model. Results are
/// memoised behind a mutex; the cache never changes the answer.
LocalReduction tate_algorithm(const Curve& E, const Integer& p);

Integer conductor(const Curve& E);

/// Places {p | 6 N_A} and infinity, ascending with infinity last.
std::vector<Place> relevant_places(const ThreeIsogeny& phi);

}  // namespace selmer
