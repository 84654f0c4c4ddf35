#pragma once

// Descent by the dual 3-isogeny phi' : B -> A whose kernel is mu_3, i.e.
// when phi : A -> B has a rational kernel point T. The Kummer map for phi' is
// the value of y on a Kubert model y^2 + a1 xy + a3 y = x^3 with T = (0,0).

#include "selmer/ratios.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selmer {

/// F_3-coordinates of the class of a in Q_p^x / Q_p^x3:
/// (v_p(a) mod 3) and, for p = 3 or p = 1 mod 3, one unit coordinate.
using CubeCoords = std::vector<int>;

int cube_class_rank(long p);  // 1 or 2
CubeCoords cube_class(const Rational& a, long p);
/// Class from valuation and a unit known modulo p (modulo 9 when p = 3).
CubeCoords cube_class(int valuation, const Integer& unit, long p);
/// #mu_3(Q_p).
int mu3_order(long p);

/// Subspace of F_3^n kept in reduced echelon form.
class F3Span {
public:
    explicit F3Span(int n = 0) : n_(n) {}
    int ambient() const { return n_; }
    int rank() const { return static_cast<int>(rows_.size()); }
    long size() const;
    bool contains(const CubeCoords& v) const;
    bool insert(const CubeCoords& v);  // true when the span grew
    const std::vector<CubeCoords>& basis() const { return rows_; }
    friend bool operator==(const F3Span&, const F3Span&) = default;

private:
    CubeCoords reduce(CubeCoords v) const;
    int n_;
    std::vector<CubeCoords> rows_;
};

struct KubertForm {
    Curve curve;         // y^2 + a1 xy + a3 y = x^3, integral
    ModelChange change;  // curve = E.transform(change)
};

/// T must be a rational point of order 3.
KubertForm kubert_form(const Curve& E, const RationalPoint& T);

struct DescentOptions {
    int start_precision = 20;
    int max_precision = 320;
    int sample_budget = 4000;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct LocalImage {
    long p = 0;
    long predicted_size = 1;
    F3Span span;
    int samples = 0;
    int max_precision_used = 0;
};

/// Grows the image of y on Kubert-model points over Q_p until it reaches
/// predicted_size. Throws DomainError if the budget runs out or the span
/// overshoots the prediction.
LocalImage local_image(const Curve& kubert, long p, long predicted_size, const DescentOptions& options = {});

struct SelmerGroup {
    std::vector<long> primes;              // support of Q(S,3), ascending
    std::vector<CubeCoords> elements;      // exponent vectors over primes
    int dimension = 0;

    Integer value(const CubeCoords& exponents) const;
};

struct SelmerComputation {
    IsogenyChain chain;  // phi with rational kernel, phi' with kernel mu_3
    KubertForm kubert;
    std::vector<LocalImage> images;
    SelmerGroup selmer;  // Sel_phi'(B) inside Q(S,3)
    bool closed = false;
    bool stable = false;
};

/// Picks the kernel with trivial character (or checks the given one); throws
/// DomainError when the curve has none.
SelmerComputation selmer_compute(const Curve& E, const std::optional<Rational>& kernel_x = std::nullopt,
                                 const DescentOptions& options = {});

struct DualityReport {
    int dim_selmer_phiprime = 0;
    int dim_selmer_phi = 0;  // derived
    Pow3 c_phi;
    int dim_kernel_phi = 0;       // dim A[phi](Q)
    int dim_kernel_phiprime = 0;  // dim B[phi'](Q)
    int dim_torsion_pi = 0;       // dim A(Q)[3]
    int epsilon0 = 0;             // dim B(Q)[phi'] / phi(A(Q)[3])
    std::vector<std::string> failures;

    bool pass() const { return failures.empty(); }
};

DualityReport duality_report(const SelmerComputation& sc);

struct ParityWindow {
    int lo = 0, hi = 0;
    int m = 0;
    /// Window holds a dimension congruent to m + dim A(Q)[3] mod 2.
    bool consistent = false;
    /// Same test against m alone, with no rational torsion term.
    bool consistent_literal = false;

    std::string verdict() const { return consistent ? "consistent" : "inconsistent"; }
};

ParityWindow parity_window(const DualityReport& report);

struct KnownSelmer {
    int dim_phi = 0, dim_phiprime = 0;
};

/// Records "curve,dim_phi,dim_phiprime" keyed by the curve text "[a1,a2,a3,a4,a6]".
/// Throws UsageError on unreadable or malformed files.
std::map<std::string, KnownSelmer> load_selmer_fixture(const std::string& path);

}  // namespace selmer
