#include "selmer/descent.hpp"

#include "selmer/padic.hpp"
#include "selmer/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace selmer {

namespace {

int mod3(int v) { return ((v % 3) + 3) % 3; }

Integer mod_pos(const Integer& a, const Integer& m) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

// A fixed primitive cube root of unity modulo p, p = 1 mod 3.
Integer cube_root_of_unity(long p) {
    const Integer P = p, e = (p - 1) / 3;
    for (long c = 2;; ++c) {
        Integer z;
        mpz_powm(z.get_mpz_t(), Integer(c).get_mpz_t(), e.get_mpz_t(), P.get_mpz_t());
        if (z != 1) return z;
    }
}

int digits_needed(long p) { return p == 3 ? 2 : 1; }

}  // namespace

int cube_class_rank(long p) { return (p == 3 || p % 3 == 1) ? 2 : 1; }

int mu3_order(long p) { return p % 3 == 1 ? 3 : 1; }

CubeCoords cube_class(int valuation, const Integer& unit, long p) {
    CubeCoords c{mod3(valuation)};
    if (p == 3) {
        Integer u = mod_pos(unit, 9);
        if (u % 3 == 2) u = 9 - u;
        c.push_back(static_cast<int>((u.get_si() - 1) / 3));
    } else if (p % 3 == 1) {
        const Integer P = p, e = (p - 1) / 3;
        Integer w;
        mpz_powm(w.get_mpz_t(), mod_pos(unit, P).get_mpz_t(), e.get_mpz_t(), P.get_mpz_t());
        const Integer z = cube_root_of_unity(p);
        c.push_back(w == 1 ? 0 : (w == z ? 1 : 2));
    }
    return c;
}

CubeCoords cube_class(const Rational& a, long p) {
    if (a == 0) throw std::invalid_argument("cube_class of zero");
    const Integer P = p;
    Integer num = a.get_num(), den = a.get_den();
    int v = static_cast<int>(mpz_remove(num.get_mpz_t(), num.get_mpz_t(), P.get_mpz_t())) -
            static_cast<int>(mpz_remove(den.get_mpz_t(), den.get_mpz_t(), P.get_mpz_t()));
    const Integer m = p == 3 ? Integer(9) : P;
    Integer inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t());
    return cube_class(v, mod_pos(num * inv, m), p);
}

long F3Span::size() const {
    long s = 1;
    for (int i = 0; i < rank(); ++i) s *= 3;
    return s;
}

CubeCoords F3Span::reduce(CubeCoords v) const {
    for (const auto& row : rows_) {
        const int pivot = static_cast<int>(std::find_if(row.begin(), row.end(), [](int x) { return x != 0; }) - row.begin());
        const int f = v[pivot];
        if (f == 0) continue;
        for (int j = 0; j < n_; ++j) v[j] = mod3(v[j] - f * row[j]);
    }
    return v;
}

bool F3Span::contains(const CubeCoords& v) const {
    if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("F3Span: dimension mismatch");
    auto r = reduce(v);
    return std::all_of(r.begin(), r.end(), [](int x) { return x == 0; });
}

bool F3Span::insert(const CubeCoords& v) {
    if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("F3Span: dimension mismatch");
    CubeCoords r = reduce(v);
    auto it = std::find_if(r.begin(), r.end(), [](int x) { return x != 0; });
    if (it == r.end()) return false;
    const int pivot = static_cast<int>(it - r.begin());
    if (r[pivot] == 2)
        for (auto& x : r) x = mod3(2 * x);
    for (auto& row : rows_) {
        const int f = row[pivot];
        if (f != 0)
            for (int j = 0; j < n_; ++j) row[j] = mod3(row[j] - f * r[j]);
    }
    rows_.push_back(std::move(r));
    auto lead = [](const CubeCoords& row) {
        return std::find_if(row.begin(), row.end(), [](int x) { return x != 0; }) - row.begin();
    };
    std::sort(rows_.begin(), rows_.end(), [&](const CubeCoords& a, const CubeCoords& b) { return lead(a) < lead(b); });
    return true;
}

KubertForm kubert_form(const Curve& E, const RationalPoint& T) {
    if (T.infinity || !E.contains(T)) throw DomainError("kubert_form: T is not an affine point of the curve");
    const ModelChange shift{1, T.x, 0, T.y};
    const Curve E1 = E.transform(shift);
    if (E1.a3() == 0) throw DomainError("kubert_form: T has order 2");
    const ModelChange slope{1, 0, E1.a4() / E1.a3(), 0};
    const Curve E2 = E1.transform(slope);
    if (E2.a2() != 0 || E2.a4() != 0 || E2.a6() != 0) throw DomainError("kubert_form: T does not have order 3");
    auto [E3, scale] = E2.integral_model();
    return {E3, shift.then(slope).then(scale)};
}

namespace {

Integer random_below(std::mt19937_64& rng, const Integer& bound) {
    Integer r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 64) + Integer(std::to_string(rng()));
    return mod_pos(r, bound);
}

// y-values over x on y^2 + a1 xy + a3 y = x^3, to relative precision n.
// Returns nullopt when the precision is insufficient to classify.
std::optional<std::vector<PadicElement>> y_values(const Curve& K, const Rational& x, long p, int n) {
    const Integer P = p;
    const Rational b = K.a1() * x + K.a3();
    const Rational D = b * b + 4 * x * x * x;
    auto s = PadicElement::from_rational(D, P, n).sqrt();
    if (!s) return std::vector<PadicElement>{};
    const PadicElement two = PadicElement::from_rational(2, P, n);
    const PadicElement B = b == 0 ? PadicElement::zero(P, n + 4 * std::abs(valuation(D, P)) + 4)
                                  : PadicElement::from_rational(b, P, n);
    std::vector<PadicElement> ys{(*s - B) / two, (-*s - B) / two};
    for (const auto& y : ys)
        if (y.precision() < digits_needed(p)) return std::nullopt;
    return ys;
}

}  // namespace

LocalImage local_image(const Curve& kubert, long p, long predicted_size, const DescentOptions& options) {
    if (kubert.a2() != 0 || kubert.a4() != 0 || kubert.a6() != 0)
        throw std::invalid_argument("local_image needs a Kubert model");
    LocalImage img;
    img.p = p;
    img.predicted_size = predicted_size;
    img.span = F3Span(cube_class_rank(p));
    if (predicted_size < 1 || predicted_size > pow_int(3, cube_class_rank(p)))
        throw DomainError("predicted local image size " + std::to_string(predicted_size) + " at p = " +
                          std::to_string(p) + " is not a subgroup order");
    if (predicted_size == 1) return img;

    std::mt19937_64 rng(options.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(p));
    const Integer P = p, bound = pow_int(P, 6);
    while (img.span.size() < predicted_size) {
        if (img.samples >= options.sample_budget)
            throw DomainError("local image at p = " + std::to_string(p) + " reached size " +
                              std::to_string(img.span.size()) + " of predicted " + std::to_string(predicted_size) +
                              " within " + std::to_string(options.sample_budget) + " samples");
        ++img.samples;
        Rational x;
        if (rng() % 2 == 0) {
            x = random_below(rng, bound);
        } else {
            Integer u = random_below(rng, bound);
            if (u % P == 0) continue;
            x = Rational(u, pow_int(P, 2 * (1 + rng() % 3)));
            x.canonicalize();
        }
        const Rational b = kubert.a1() * x + kubert.a3();
        if (x == 0 || b * b + 4 * x * x * x == 0) continue;  // T, -T and 2-torsion abscissae
        std::optional<std::vector<PadicElement>> ys;
        for (int n = options.start_precision; n <= options.max_precision; n *= 2) {
            img.max_precision_used = std::max(img.max_precision_used, n);
            ys = y_values(kubert, x, p, n);
            if (ys) break;
        }
        if (!ys) continue;
        for (const auto& y : *ys) {
            img.span.insert(cube_class(y.valuation(), y.unit(), p));
            if (img.span.size() > predicted_size)
                throw DomainError("local image at p = " + std::to_string(p) + " exceeds predicted size " +
                                  std::to_string(predicted_size));
        }
    }
    return img;
}

Integer SelmerGroup::value(const CubeCoords& e) const {
    Integer v = 1;
    for (std::size_t i = 0; i < primes.size(); ++i) v *= pow_int(primes[i], static_cast<unsigned long>(e[i]));
    return v;
}

namespace {

std::vector<LocalImage> compute_images(const SelmerComputation& sc, const DescentOptions& options) {
    std::vector<long> primes = sc.selmer.primes;
    std::vector<LocalImage> images(primes.size());
    parallel_for(primes.size(), options.threads, [&](std::size_t i) {
        const long p = primes[i];
        const Pow3 c = local_ratio(sc.chain.phi_prime(), 1, Place::finite(p)).value;
        const int e = c.exponent() + (mu3_order(p) == 3 ? 1 : 0);
        if (e < 0)
            throw DomainError("predicted local image size 3^" + std::to_string(e) + " at p = " + std::to_string(p));
        images[i] = local_image(sc.kubert.curve, p, pow_int(3, static_cast<unsigned long>(e)).get_si(), options);
    });
    return images;
}

std::vector<CubeCoords> selmer_elements(const std::vector<long>& primes, const std::vector<LocalImage>& images) {
    std::vector<CubeCoords> out;
    const std::size_t n = primes.size();
    CubeCoords e(n, 0);
    SelmerGroup g{primes, {}, 0};
    for (;;) {
        const Integer alpha = g.value(e);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = images[i].span.contains(cube_class(Rational(alpha), primes[i]));
        if (ok) out.push_back(e);
        std::size_t k = 0;
        while (k < n && ++e[k] == 3) e[k++] = 0;
        if (k == n) break;
    }
    return out;
}

}  // namespace

SelmerComputation selmer_compute(const Curve& E, const std::optional<Rational>& kernel_x, const DescentOptions& options) {
    Rational x0;
    if (kernel_x) {
        x0 = *kernel_x;
        if (kernel_character(E, x0) != 1)
            throw DomainError("descent needs a kernel with trivial character; x = " + x0.get_str() + " has " +
                              kernel_character(E, x0).get_str());
    } else {
        bool found = false;
        for (const auto& r : rational_three_kernels(E))
            if (kernel_character(E, r) == 1) {
                x0 = r;
                found = true;
                break;
            }
        if (!found) throw DomainError("curve " + E.to_string() + " has no rational 3-torsion point; descent not applicable");
    }
    const RationalPoint T = E.points_with_x(x0).front();
    SelmerComputation sc{make_chain(E, x0), kubert_form(E, T), {}, {}, false, false};
    for (const auto& v : sc.chain.places)
        if (!v.is_infinite()) sc.selmer.primes.push_back(static_cast<long>(v.prime()));

    sc.images = compute_images(sc, options);
    sc.selmer.elements = selmer_elements(sc.selmer.primes, sc.images);
    int dim = 0;
    for (std::size_t s = sc.selmer.elements.size(); s > 1; s /= 3) ++dim;
    sc.selmer.dimension = dim;

    std::set<CubeCoords> members(sc.selmer.elements.begin(), sc.selmer.elements.end());
    sc.closed = pow_int(3, static_cast<unsigned long>(dim)) == static_cast<long>(members.size());
    for (const auto& a : members)
        for (const auto& b : members) {
            CubeCoords c(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) c[i] = mod3(a[i] + b[i]);
            if (!members.count(c)) sc.closed = false;
        }

    DescentOptions again = options;
    again.seed = options.seed ^ 0x5bd1e995ull;
    again.sample_budget = options.sample_budget * 2;
    sc.stable = selmer_elements(sc.selmer.primes, compute_images(sc, again)) == sc.selmer.elements;
    return sc;
}

namespace {

int log3_count(std::size_t points_plus_identity) {
    int d = 0;
    std::size_t n = points_plus_identity;
    while (n > 1) {
        if (n % 3) throw std::logic_error("torsion subgroup order is not a power of 3");
        n /= 3;
        ++d;
    }
    return d;
}

}  // namespace

DualityReport duality_report(const SelmerComputation& sc) {
    DualityReport r;
    const ThreeIsogeny& phi = sc.chain.phi;
    const ThreeIsogeny& phip = sc.chain.phi_prime();
    r.dim_selmer_phiprime = sc.selmer.dimension;
    r.c_phi = global_ratio(phi, sc.chain.places, 1).c;

    r.dim_kernel_phi = log3_count(1 + phi.domain().points_with_x(phi.kernel_x()).size());
    r.dim_kernel_phiprime = log3_count(1 + phip.domain().points_with_x(phip.kernel_x()).size());

    std::vector<RationalPoint> tors;
    for (const auto& x : rational_three_kernels(phi.domain()))
        for (const auto& P : phi.domain().points_with_x(x)) tors.push_back(P);
    r.dim_torsion_pi = log3_count(1 + tors.size());
    std::set<std::pair<std::string, std::string>> images;
    for (const auto& P : tors) {
        RationalPoint Q = phi(P);
        if (!Q.infinity) {
            if (!phip.domain().contains(Q) || !phip(Q).infinity)
                r.failures.push_back("phi(A(Q)[3]) does not land in B[phi']");
            images.emplace(Q.x.get_str(), Q.y.get_str());
        }
    }
    r.epsilon0 = r.dim_kernel_phiprime - log3_count(1 + images.size());

    // #Sel_phi = c(phi) #Sel_phi' #A[phi](Q) / #B[phi'](Q)
    const int e = r.c_phi.exponent() + r.dim_selmer_phiprime + r.dim_kernel_phi - r.dim_kernel_phiprime;
    if (e < 0) r.failures.push_back("derived #Sel_phi = 3^" + std::to_string(e) + " is not integral");
    r.dim_selmer_phi = e;
    if (r.epsilon0 > e) r.failures.push_back("epsilon0 exceeds derived dim Sel_phi");
    for (const auto& img : sc.images)
        if (img.span.size() != img.predicted_size)
            r.failures.push_back("local image at p = " + std::to_string(img.p) + " has size " +
                                 std::to_string(img.span.size()));
    if (!sc.closed) r.failures.push_back("Selmer set is not closed under products");
    if (!sc.stable) r.failures.push_back("Selmer group changed under resampling");
    return r;
}

ParityWindow parity_window(const DualityReport& report) {
    ParityWindow w;
    w.m = report.c_phi.exponent();
    w.lo = report.dim_selmer_phi - report.epsilon0;
    w.hi = w.lo + report.dim_selmer_phiprime;
    auto holds = [&](int target) {
        for (int n = std::max(w.lo, 0); n <= w.hi; ++n)
            if (((n - target) % 2 + 2) % 2 == 0) return true;
        return false;
    };
    w.consistent = holds(w.m + report.dim_torsion_pi);
    w.consistent_literal = holds(w.m);
    return w;
}

std::map<std::string, KnownSelmer> load_selmer_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read Selmer fixture " + path);
    std::map<std::string, KnownSelmer> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("curve,", 0) == 0) continue;
        }
        // The curve field contains commas inside brackets.
        auto close = line.find(']');
        if (line.empty() || line[0] != '[' || close == std::string::npos)
            throw UsageError("malformed Selmer fixture line: " + line);
        std::string curve = line.substr(0, close + 1);
        std::istringstream rest(line.substr(close + 1));
        char c1 = 0, c2 = 0;
        KnownSelmer k;
        if (!(rest >> c1 >> k.dim_phi >> c2 >> k.dim_phiprime) || c1 != ',' || c2 != ',')
            throw UsageError("malformed Selmer fixture line: " + line);
        out[Curve::parse(curve).to_string()] = k;
    }
    return out;
}

}  // namespace selmer
