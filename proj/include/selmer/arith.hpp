#pragma once

// Exact arithmetic substrate: factorization, residue symbols and local
// square classes over Q.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace selmer {

using Integer = mpz_class;
using Rational = mpq_class;

/// Base of every recoverable mathematical failure (bad input, incomplete
/// factorization, violated identity). The CLI maps these to exit status 1.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input (bad curve text, unreadable file, bad flags). Exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FactorizationIncomplete : public DomainError {
public:
    explicit FactorizationIncomplete(const Integer& survivor);
    const Integer& survivor() const { return survivor_; }

private:
    Integer survivor_;
};

struct PrimePower {
    Integer prime;
    int exponent = 0;

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct Factorization {
    int sign = 1;
    std::vector<PrimePower> factors;  // primes strictly increasing

    Integer value() const;
    friend bool operator==(const Factorization&, const Factorization&) = default;
};

struct FactorOptions {
    std::uint32_t trial_bound = 1'000'000;
    std::uint64_t rho_iterations = 1ull << 22;  // total effort cap for Pollard rho
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

/// Primes p <= n (cached sieve; n up to a few million).
const std::vector<std::uint32_t>& small_primes(std::uint32_t n = 1'000'000);

/// Deterministic Miller-Rabin below 3.3e24, Pocklington-Lehmer above.
/// Throws DomainError if a large input can be neither refuted nor proven.
bool is_prime(const Integer& n);

/// Throws FactorizationIncomplete when a composite survives the effort cap.
Factorization factorize(const Integer& n, const FactorOptions& options = {});

Integer pow_int(const Integer& base, unsigned long e);

int valuation(const Integer& n, const Integer& p);   // n != 0
int valuation(const Rational& q, const Integer& p);  // q != 0

/// Jacobi symbol; for prime p this is the Legendre symbol (0 when p | a).
int legendre(const Integer& a, const Integer& p);

bool is_squarefree(const Integer& n);

/// Squarefree integer in the class of n (resp. q) modulo nonzero rational squares.
Integer squarefree_part(const Integer& n, const FactorOptions& options = {});
Integer squarefree_part(const Rational& q, const FactorOptions& options = {});

/// Discriminant of Q(sqrt(n)); 1 when n is a square.
Integer fundamental_discriminant(const Integer& n, const FactorOptions& options = {});

/// A place of Q: a finite prime or the real place.
class Place {
public:
    static Place infinity() { return Place(0); }
    static Place finite(std::int64_t p);

    bool is_infinite() const { return p_ == 0; }
    std::int64_t prime() const;
    std::string to_string() const;

    friend bool operator==(const Place&, const Place&) = default;
    // Finite places ascending, infinity last.
    friend bool operator<(const Place& a, const Place& b);

private:
    explicit Place(std::int64_t p) : p_(p) {}
    std::int64_t p_;
};

/// Class of d in Q_v^x / Q_v^x2.
///   odd p : valuation in {0,1}, unit_label 0 (square) or 1 (nonsquare)
///   p = 2 : valuation in {0,1}, unit_label the unit part mod 8 (1,3,5,7)
///   inf   : valuation 0, unit_label +1 or -1
struct LocalSquareClass {
    Place place = Place::infinity();
    int valuation = 0;
    int unit_label = 1;

    /// Dense index into [0, class_count(place)).
    int index() const;
    std::string label() const;
    static LocalSquareClass from_index(Place place, int index);

    friend bool operator==(const LocalSquareClass&, const LocalSquareClass&) = default;
};

int class_count(const Place& place);

/// Square class of a nonzero integer at a place; invariant under d -> d*m^2.
LocalSquareClass local_squareclass(const Integer& d, const Place& place);

/// Exact density of squarefree d (ordered by |d|) lying in the class.
Rational local_class_density(const LocalSquareClass& cls);

}  // namespace selmer
