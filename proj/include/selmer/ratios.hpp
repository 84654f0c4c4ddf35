#pragma once

// Local and global Selmer ratios of 3-isogenies and their quadratic twists.

#include "selmer/local_data.hpp"

#include <optional>
#include <string>
#include <vector>

namespace selmer {

/// An element 3^e of Q^x.
class Pow3 {
public:
    constexpr Pow3() = default;
    static constexpr Pow3 from_exponent(int e) { return Pow3(e); }
    /// Throws DomainError unless q is an integral power of 3.
    static Pow3 from_rational(const Rational& q);

    constexpr int exponent() const { return e_; }
    Rational value() const;
    std::string to_string() const;  // "1", "3", "1/9", ...

    friend constexpr Pow3 operator*(Pow3 a, Pow3 b) { return Pow3(a.e_ + b.e_); }
    friend constexpr Pow3 operator/(Pow3 a, Pow3 b) { return Pow3(a.e_ - b.e_); }
    Pow3& operator*=(Pow3 b) {
        e_ += b.e_;
        return *this;
    }
    constexpr Pow3 inverse() const { return Pow3(-e_); }
    friend constexpr bool operator==(Pow3, Pow3) = default;

private:
    constexpr explicit Pow3(int e) : e_(e) {}
    int e_ = 0;
};

struct LocalRatio {
    Place place = Place::infinity();
    Pow3 value;
};

struct GlobalRatio {
    Pow3 c;
    int t = 0;  // |ord_3 c|
    std::vector<LocalRatio> breakdown;
};

/// phi : A -> B, its Velu dual phi' : B -> C with C identified with A, and
/// the relevant places S = {p | 6 N_A} u {inf}.
struct IsogenyChain {
    ThreeIsogeny phi;
    DualIsogeny dual;
    std::vector<Place> places;

    const ThreeIsogeny& phi_prime() const { return dual.phi_prime; }
};

/// Default kernel: the first rational root of psi_3 (ascending).
/// Throws DomainError when the curve has no rational 3-isogeny.
IsogenyChain make_chain(const Curve& E, const std::optional<Rational>& kernel_x = std::nullopt);

/// c_v(phi_d). Finite p not dividing 6 * N_A * d returns 1 without computing
/// (good reduction away from 3); every other place is computed from Tate data.
LocalRatio local_ratio(const ThreeIsogeny& phi, const Integer& d, const Place& v);

/// gamma at 3 for phi_d from the differential scalar on minimal models.
Pow3 gamma_at_3(const ThreeIsogeny& phi, const Integer& d);

/// Product over S and the primes dividing d.
GlobalRatio global_ratio(const ThreeIsogeny& phi, const std::vector<Place>& S, const Integer& d);

/// Places where c_v(phi_d) can differ from 1: S together with primes dividing d.
std::vector<Place> twist_places(const std::vector<Place>& S, const Integer& d);

struct ChainRow {
    Place place = Place::infinity();
    Pow3 c_phi, c_phiprime, c_pi;
};

struct ChainReport {
    Integer d;
    std::vector<ChainRow> rows;
    Pow3 c_phi, c_phiprime, c_pi;
    std::vector<std::string> failures;  // each names the violated identity and place

    bool pass() const { return failures.empty(); }
};

ChainReport chain_check(const IsogenyChain& chain, const Integer& d);

}  // namespace selmer
