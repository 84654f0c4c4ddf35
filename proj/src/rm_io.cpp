#include "selmer/rm_io.hpp"

#include "selmer/poly.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace selmer {

DescriptorParseError::DescriptorParseError(int line, const std::string& what)
    : UsageError("line " + std::to_string(line) + ": " + what), line_(line) {}

const RMPlace* RMDescriptor::find_place(const std::string& n) const {
    for (const auto& p : places)
        if (p.name == n) return &p;
    return nullptr;
}

namespace {

// ---------------------------------------------------------------- parsing

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

bool is_int_token(const std::string& s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i >= s.size()) return false;
    return std::all_of(s.begin() + static_cast<long>(i), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Integer to_int(const std::string& s, int line) {
    if (!is_int_token(s)) throw DescriptorParseError(line, "expected an integer, got '" + s + "'");
    return Integer(s[0] == '+' ? s.substr(1) : s);
}

long to_small(const std::string& s, int line) {
    Integer n = to_int(s, line);
    if (!n.fits_sint_p()) throw DescriptorParseError(line, "integer out of range: " + s);
    return n.get_si();
}

Rational to_rat(const std::string& s, int line) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(to_int(s, line));
    Integer num = to_int(s.substr(0, slash), line);
    Integer den = to_int(s.substr(slash + 1), line);
    if (den == 0) throw DescriptorParseError(line, "zero denominator in '" + s + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

Pow3 to_pow3(const std::string& s, int line) {
    Rational q = to_rat(s, line);
    try {
        return Pow3::from_rational(q);
    } catch (const DomainError&) {
        throw DescriptorParseError(line, "'" + s + "' is not a power of 3");
    }
}

std::string rat_str(const Rational& q) { return q.get_str(); }

}  // namespace

RMDescriptor parse_descriptor(std::string_view text) {
    RMDescriptor d;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    bool header = false;
    std::set<std::string> seen;

    auto once = [&](const std::string& key) {
        if (!seen.insert(key).second) throw DescriptorParseError(line, "duplicate record '" + key + "'");
        d.lines[key] = line;
    };

    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
        auto tok = split_ws(body);
        if (tok.empty()) continue;

        if (!header) {
            if (tok.size() != 2 || tok[0] != "rmd") throw DescriptorParseError(line, "expected header 'rmd 1'");
            if (tok[1] != "1") throw DescriptorParseError(line, "unsupported version " + tok[1]);
            header = true;
            continue;
        }

        const std::string key = tok[0];
        bool hypo = false;
        if (key != "name" && tok.size() > 1 && tok.back() == "hypothetical") {
            hypo = true;
            tok.pop_back();
        }
        auto args = std::vector<std::string>(tok.begin() + 1, tok.end());
        auto need = [&](std::size_t n) {
            if (args.size() != n)
                throw DescriptorParseError(line, "'" + key + "' takes " + std::to_string(n) + " value(s)");
        };
        auto need_some = [&]() {
            if (args.empty()) throw DescriptorParseError(line, "'" + key + "' needs values");
        };
        auto ints = [&]() {
            std::vector<Integer> v;
            for (const auto& a : args) v.push_back(to_int(a, line));
            return v;
        };
        auto mark = [&](const std::string& field) {
            if (hypo) d.hypothetical.insert(field);
        };

        if (key == "name") {
            once(key);
            auto start = body.find("name") + 4;
            auto s = body.substr(start);
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            d.name = s;
        } else if (key == "g" || key == "field_degree" || key == "real_places" || key == "k") {
            once(key);
            need(1);
            int v = static_cast<int>(to_small(args[0], line));
            (key == "g" ? d.g : key == "field_degree" ? d.field_degree : key == "real_places" ? d.real_places : d.k) = v;
            mark(key);
        } else if (key == "chi" || key == "chi_prime") {
            once(key);
            need(1);
            (key == "chi" ? d.chi : d.chi_prime) = to_int(args[0], line);
            mark(key);
        } else if (key == "polarization_degree" || key == "torsion") {
            once(key);
            need(1);
            (key == "torsion" ? d.torsion : d.polarization_degree) = to_int(args[0], line);
            mark(key);
        } else if (key == "rm_poly" || key == "curve_f" || key == "curve_h") {
            once(key);
            need_some();
            (key == "rm_poly" ? d.rm_poly : key == "curve_f" ? d.curve_f : d.curve_h) = ints();
            mark(key);
        } else if (key == "bad_primes") {
            once(key);
            d.bad_primes = ints();
            mark(key);
        } else if (key == "weierstrass") {
            once(key);
            need(5);
            std::array<Rational, 5> a;
            for (int i = 0; i < 5; ++i) a[static_cast<std::size_t>(i)] = to_rat(args[static_cast<std::size_t>(i)], line);
            d.weierstrass = a;
            mark(key);
        } else if (key == "fixed_point") {
            need(1);
            d.fixed_points.push_back(to_rat(args[0], line));
            if (hypo) d.hypothetical.insert("fixed_point");
        } else if (key == "place") {
            // place NAME finite|real classes N [above3 DEG]
            if (args.size() != 4 && args.size() != 6) throw DescriptorParseError(line, "malformed place record");
            RMPlace p;
            p.name = args[0];
            p.line = line;
            if (args[1] == "finite")
                p.kind = PlaceKind::Finite;
            else if (args[1] == "real")
                p.kind = PlaceKind::Real;
            else
                throw DescriptorParseError(line, "place kind must be 'finite' or 'real'");
            if (args[2] != "classes") throw DescriptorParseError(line, "expected 'classes'");
            p.class_count = static_cast<int>(to_small(args[3], line));
            if (p.class_count < 1) throw DescriptorParseError(line, "class count must be positive");
            if (args.size() == 6) {
                if (args[4] != "above3") throw DescriptorParseError(line, "expected 'above3'");
                if (p.kind != PlaceKind::Finite) throw DescriptorParseError(line, "real place cannot lie over 3");
                p.above3 = static_cast<int>(to_small(args[5], line));
                if (p.above3 < 1) throw DescriptorParseError(line, "local degree must be positive");
            }
            if (d.find_place(p.name)) throw DescriptorParseError(line, "duplicate place '" + p.name + "'");
            d.places.push_back(std::move(p));
        } else if (key == "class") {
            // class PLACE LABEL ratio C C' [density Q]
            // class PLACE LABEL tamagawa cA cB [gamma G G'] [density Q]
            if (args.size() < 5) throw DescriptorParseError(line, "malformed class record");
            RMPlace* place = nullptr;
            for (auto& p : d.places)
                if (p.name == args[0]) place = &p;
            if (!place) throw DescriptorParseError(line, "class for undeclared place '" + args[0] + "'");
            RMClass c;
            c.label = args[1];
            c.line = line;
            c.hypothetical = hypo;
            std::size_t i = 2;
            if (args[i] == "ratio") {
                c.c_phi = to_pow3(args[i + 1], line);
                c.c_phiprime = to_pow3(args[i + 2], line);
                i += 3;
            } else if (args[i] == "tamagawa") {
                Integer ca = to_int(args[i + 1], line), cb = to_int(args[i + 2], line);
                if (ca <= 0 || cb <= 0) throw DescriptorParseError(line, "Tamagawa numbers must be positive");
                c.tamagawa = std::array<Integer, 2>{ca, cb};
                i += 3;
                if (i < args.size() && args[i] == "gamma") {
                    if (i + 2 >= args.size())
                        throw DescriptorParseError(line, "gamma takes two values");
                    c.gamma = std::array<Pow3, 2>{to_pow3(args[i + 1], line), to_pow3(args[i + 2], line)};
                    i += 3;
                }
                Pow3 g1 = c.gamma ? (*c.gamma)[0] : Pow3{}, g2 = c.gamma ? (*c.gamma)[1] : Pow3{};
                Rational q(cb, ca);
                q.canonicalize();
                try {
                    c.c_phi = Pow3::from_rational(q) * g1;
                    c.c_phiprime = Pow3::from_rational(1 / q) * g2;
                } catch (const DomainError&) {
                    throw DescriptorParseError(line, "c(B)/c(A) is not a power of 3");
                }
            } else {
                throw DescriptorParseError(line, "class data must be 'ratio' or 'tamagawa'");
            }
            if (i < args.size()) {
                if (args[i] != "density" || i + 2 != args.size())
                    throw DescriptorParseError(line, "unexpected trailing fields");
                c.density = to_rat(args[i + 1], line);
            }
            for (const auto& o : place->classes)
                if (o.label == c.label) throw DescriptorParseError(line, "duplicate class '" + c.label + "'");
            place->classes.push_back(std::move(c));
        } else {
            throw DescriptorParseError(line, "unknown record '" + key + "'");
        }
    }
    if (!header) throw DescriptorParseError(line == 0 ? 1 : line, "missing header 'rmd 1'");
    for (const char* req : {"g", "chi", "chi_prime"})
        if (!seen.count(req)) throw DescriptorParseError(line, std::string("missing record '") + req + "'");
    return d;
}

RMDescriptor read_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read descriptor file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_descriptor(ss.str());
}

std::string write_descriptor(const RMDescriptor& d) {
    std::ostringstream out;
    auto tail = [&](const std::string& field) { return d.hypothetical.count(field) ? " hypothetical" : ""; };
    auto list = [](const std::vector<Integer>& v) {
        std::string s;
        for (const auto& x : v) s += " " + x.get_str();
        return s;
    };
    out << "rmd " << d.version << "\n";
    if (!d.name.empty()) out << "name " << d.name << "\n";
    out << "g " << d.g << tail("g") << "\n";
    out << "field_degree " << d.field_degree << tail("field_degree") << "\n";
    out << "real_places " << d.real_places << tail("real_places") << "\n";
    out << "k " << d.k << tail("k") << "\n";
    out << "chi " << d.chi << tail("chi") << "\n";
    out << "chi_prime " << d.chi_prime << tail("chi_prime") << "\n";
    if (d.rm_poly) out << "rm_poly" << list(*d.rm_poly) << tail("rm_poly") << "\n";
    if (d.polarization_degree)
        out << "polarization_degree " << *d.polarization_degree << tail("polarization_degree") << "\n";
    if (d.torsion) out << "torsion " << *d.torsion << tail("torsion") << "\n";
    if (!d.bad_primes.empty()) out << "bad_primes" << list(d.bad_primes) << tail("bad_primes") << "\n";
    if (d.weierstrass) {
        out << "weierstrass";
        for (const auto& a : *d.weierstrass) out << " " << rat_str(a);
        out << tail("weierstrass") << "\n";
    }
    if (d.curve_f) out << "curve_f" << list(*d.curve_f) << tail("curve_f") << "\n";
    if (d.curve_h) out << "curve_h" << list(*d.curve_h) << tail("curve_h") << "\n";
    for (const auto& x : d.fixed_points) out << "fixed_point " << rat_str(x) << tail("fixed_point") << "\n";
    for (const auto& p : d.places) {
        out << "place " << p.name << (p.kind == PlaceKind::Real ? " real" : " finite") << " classes "
            << p.class_count;
        if (p.above3) out << " above3 " << p.above3;
        out << "\n";
        for (const auto& c : p.classes) {
            out << "class " << p.name << " " << c.label;
            if (c.tamagawa) {
                out << " tamagawa " << (*c.tamagawa)[0] << " " << (*c.tamagawa)[1];
                if (c.gamma) out << " gamma " << (*c.gamma)[0].to_string() << " " << (*c.gamma)[1].to_string();
            } else {
                out << " ratio " << c.c_phi.to_string() << " " << c.c_phiprime.to_string();
            }
            if (c.density) out << " density " << rat_str(*c.density);
            if (c.hypothetical) out << " hypothetical";
            out << "\n";
        }
    }
    return out.str();
}

// ------------------------------------------------------------- validation

namespace {

std::optional<Place> rational_place(const std::string& name) {
    if (name == "inf") return Place::infinity();
    if (!is_int_token(name) || name[0] == '-' || name[0] == '+' || name.size() > 12) return std::nullopt;
    Integer p(name);
    if (!is_prime(p)) return std::nullopt;
    return Place::finite(p.get_si());
}

std::optional<LocalSquareClass> rational_class(const Place& v, const std::string& label) {
    for (int i = 0; i < class_count(v); ++i) {
        auto c = LocalSquareClass::from_index(v, i);
        if (c.label() == label) return c;
    }
    return std::nullopt;
}

QPoly poly_from_leading(const std::vector<Integer>& lead_first) {
    std::vector<Rational> c;
    for (auto it = lead_first.rbegin(); it != lead_first.rend(); ++it) c.emplace_back(*it);
    return QPoly(c);
}

Rational resultant(QPoly a, QPoly b) {
    if (a.is_zero() || b.is_zero()) return 0;
    Rational acc = 1;
    if (a.degree() < b.degree()) {
        if ((a.degree() * b.degree()) % 2) acc = -acc;
        std::swap(a, b);
    }
    while (b.degree() > 0) {
        auto r = QPoly::divmod(a, b).second;
        if (r.is_zero()) return 0;
        if ((a.degree() * b.degree()) % 2) acc = -acc;
        for (int i = 0; i < a.degree() - r.degree(); ++i) acc *= b.leading();
        a = b;
        b = r;
    }
    for (int i = 0; i < a.degree(); ++i) acc *= b.leading();
    return acc;
}

Rational discriminant(const QPoly& f) {
    const int n = f.degree();
    Rational r = resultant(f, f.derivative()) / f.leading();
    if ((n * (n - 1) / 2) % 2) r = -r;
    r.canonicalize();
    return r;
}

// Sumset of exponent sets; sets stay tiny.
std::set<int> sumset(const std::set<int>& a, const std::set<int>& b) {
    std::set<int> out;
    for (int x : a)
        for (int y : b) out.insert(x + y);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

struct Checker {
    ValidationReport report;
    void add(const std::string& identity, const std::vector<std::string>& problems) {
        report.items.push_back({identity, problems.empty(), join(problems)});
    }
};

}  // namespace

bool ValidationReport::pass() const {
    return std::all_of(items.begin(), items.end(), [](const ValidationItem& i) { return i.pass; });
}

std::vector<std::string> ValidationReport::failed() const {
    std::vector<std::string> out;
    for (const auto& i : items)
        if (!i.pass) out.push_back(i.identity);
    return out;
}

std::string ValidationReport::csv() const {
    std::string s = "identity,result,detail\n";
    for (const auto& i : items) {
        std::string detail = i.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        s += i.identity + "," + (i.pass ? "pass" : "fail") + "," + detail + "\n";
    }
    return s;
}

ValidationReport validate(const RMDescriptor& d) {
    Checker ck;
    const bool over_q = d.field_degree == 1;

    {
        std::vector<std::string> bad;
        if (d.g < 1) bad.push_back("g must be >= 1");
        if (d.field_degree < 1) bad.push_back("field_degree must be >= 1");
        if (d.k < 1) bad.push_back("k must be >= 1");
        ck.add("dimensions", bad);
    }
    {
        std::vector<std::string> bad;
        int reals = 0;
        for (const auto& p : d.places) reals += p.kind == PlaceKind::Real;
        if (d.real_places != d.field_degree)
            bad.push_back("real_places " + std::to_string(d.real_places) + " != field_degree " +
                          std::to_string(d.field_degree));
        if (reals != d.real_places)
            bad.push_back(std::to_string(reals) + " real place records for real_places " +
                          std::to_string(d.real_places));
        ck.add("totally_real", bad);
    }
    {
        std::vector<std::string> bad;
        int deg3 = 0;
        for (const auto& p : d.places) {
            deg3 += p.above3;
            if (over_q) {
                auto v = rational_place(p.name);
                if (!v) {
                    bad.push_back("'" + p.name + "' is not a place of Q");
                    continue;
                }
                if ((p.kind == PlaceKind::Real) != v->is_infinite()) bad.push_back(p.name + ": wrong kind");
                if (!v->is_infinite() && (v->prime() == 3) != (p.above3 == 1))
                    bad.push_back(p.name + ": above3 marker");
            }
        }
        if (deg3 != d.field_degree)
            bad.push_back("local degrees over 3 sum to " + std::to_string(deg3) + ", not " +
                          std::to_string(d.field_degree));
        ck.add("places_over_3", bad);
    }
    {
        std::vector<std::string> bad;
        for (const Integer* c : {&d.chi, &d.chi_prime})
            if (*c == 0 || fundamental_discriminant(*c) != *c)
                bad.push_back(c->get_str() + " is not a fundamental discriminant");
        ck.add("kernel_characters", bad);
    }
    {
        std::vector<std::string> bad;
        if (d.chi != 0 && d.chi_prime != 0) {
            Integer prod = d.chi * d.chi_prime * -3;
            if (squarefree_part(prod) != 1)
                bad.push_back("chi' = " + d.chi_prime.get_str() + " but chi*chi_3 has class " +
                              squarefree_part(Integer(d.chi * -3)).get_str());
        }
        ck.add("kernel_duality", bad);
    }
    {
        std::vector<std::string> bad;
        for (const auto& p : d.places) {
            if (static_cast<int>(p.classes.size()) != p.class_count)
                bad.push_back(p.name + ": " + std::to_string(p.classes.size()) + " of " +
                              std::to_string(p.class_count) + " classes");
            if (!over_q) continue;
            auto v = rational_place(p.name);
            if (!v) continue;
            if (p.class_count != class_count(*v))
                bad.push_back(p.name + ": Q_v has " + std::to_string(class_count(*v)) + " square classes");
            for (const auto& c : p.classes)
                if (!rational_class(*v, c.label)) bad.push_back(p.name + ": unknown class '" + c.label + "'");
        }
        ck.add("class_coverage", bad);
    }
    {
        std::vector<std::string> bad;
        for (const auto& p : d.places) {
            if (p.kind != PlaceKind::Real) continue;
            for (const auto& c : p.classes) {
                auto ok = [](Pow3 x) { return x.exponent() == 0 || x.exponent() == -1; };
                if (!ok(c.c_phi) || !ok(c.c_phiprime))
                    bad.push_back(p.name + ":" + c.label + " value outside {1,1/3}");
                else if ((c.c_phi * c.c_phiprime).exponent() != -1)
                    bad.push_back(p.name + ":" + c.label + " product " + (c.c_phi * c.c_phiprime).to_string());
            }
        }
        ck.add("archimedean", bad);
    }
    {
        std::vector<std::string> bad;
        for (const auto& p : d.places) {
            if (p.kind != PlaceKind::Finite || p.above3) continue;
            for (const auto& c : p.classes)
                if ((c.c_phi * c.c_phiprime).exponent() != 0)
                    bad.push_back(p.name + ":" + c.label + " c(phi)c(phi') = " + (c.c_phi * c.c_phiprime).to_string());
        }
        ck.add("pi_finite", bad);
    }
    {
        std::vector<std::string> bad;
        for (const auto& p : d.places) {
            if (!p.above3) continue;
            for (const auto& c : p.classes)
                if ((c.c_phi * c.c_phiprime).exponent() != p.above3)
                    bad.push_back(p.name + ":" + c.label + " c(phi)c(phi') = " + (c.c_phi * c.c_phiprime).to_string() +
                                  ", expected 3^" + std::to_string(p.above3));
        }
        ck.add("pi_at_3", bad);
    }
    {
        // c(pi_d) over all signatures is the sumset of per-place exponents.
        std::vector<std::string> bad;
        std::set<int> e{0};
        for (const auto& p : d.places) {
            std::set<int> local;
            for (const auto& c : p.classes) local.insert((c.c_phi * c.c_phiprime).exponent());
            if (!local.empty()) e = sumset(e, local);
        }
        for (int x : e)
            if (x * d.k != 0) bad.push_back("some signature has c(pi)^k = 3^" + std::to_string(x * d.k));
        ck.add("pi_global", bad);
    }
    {
        // Integral locus: every finite class with c(phi), c(phi') integral.
        std::vector<std::string> bad;
        bool locus_empty = false;
        std::set<int> e{0};
        for (const auto& p : d.places) {
            if (p.kind != PlaceKind::Finite) continue;
            std::set<int> local;
            for (const auto& c : p.classes)
                if (c.c_phi.exponent() >= 0 && c.c_phiprime.exponent() >= 0) local.insert(c.c_phi.exponent());
            if (local.empty()) {
                locus_empty = true;
                break;
            }
            if (p.above3) e = sumset(e, local);
        }
        if (!locus_empty && !e.empty()) {
            if (*e.begin() < 0) bad.push_back("c_3(phi_d) = 3^" + std::to_string(*e.begin()));
            if (*e.rbegin() > d.field_degree)
                bad.push_back("c_3(phi_d) = 3^" + std::to_string(*e.rbegin()) + " above 3^" +
                              std::to_string(d.field_degree));
        }
        ck.add("c3_window", bad);
    }
    {
        std::vector<std::string> bad;
        for (const auto& p : d.places) {
            int given = 0;
            Rational sum = 0;
            for (const auto& c : p.classes)
                if (c.density) {
                    ++given;
                    sum += *c.density;
                    if (*c.density <= 0) bad.push_back(p.name + ":" + c.label + " density not positive");
                    if (over_q) {
                        auto v = rational_place(p.name);
                        auto cls = v ? rational_class(*v, c.label) : std::nullopt;
                        if (cls && local_class_density(*cls) != *c.density)
                            bad.push_back(p.name + ":" + c.label + " density " + rat_str(*c.density) + " != " +
                                          rat_str(local_class_density(*cls)));
                    }
                }
            if (given && given != static_cast<int>(p.classes.size())) bad.push_back(p.name + ": partial densities");
            if (given && sum != 1) bad.push_back(p.name + ": densities sum to " + rat_str(sum));
        }
        ck.add("densities", bad);
    }
    if (d.polarization_degree) {
        std::vector<std::string> bad;
        if (*d.polarization_degree <= 0) bad.push_back("polarization degree must be positive");
        else if (*d.polarization_degree % 3 == 0)
            bad.push_back("polarization degree " + d.polarization_degree->get_str() + " divisible by 3");
        ck.add("polarization_prime_to_3", bad);
    }
    if (d.rm_poly) {
        std::vector<std::string> bad;
        QPoly f = poly_from_leading(*d.rm_poly);
        if (f.is_zero() || (*d.rm_poly)[0] == 0) {
            bad.push_back("leading coefficient is zero");
        } else {
            if (f.degree() != d.g)
                bad.push_back("degree " + std::to_string(f.degree()) + " != g " + std::to_string(d.g));
            if (f.degree() >= 1 && QPoly::gcd(f, f.derivative()).degree() > 0) bad.push_back("not squarefree");
            else if (real_root_count(f) != f.degree())
                bad.push_back(std::to_string(real_root_count(f)) + " real roots of " + std::to_string(f.degree()));
        }
        ck.add("rm_field", bad);
    }
    if (d.torsion) {
        std::vector<std::string> bad;
        if (*d.torsion <= 0) bad.push_back("torsion order must be positive");
        else if (d.chi == 1 && *d.torsion % 3 != 0)
            bad.push_back("chi = 1 needs rational 3-torsion, torsion " + d.torsion->get_str());
        ck.add("rational_kernel", bad);
    }

    std::vector<Integer> model_bad;  // primes the model says are bad
    if (d.curve_f) {
        std::vector<std::string> bad;
        QPoly f = poly_from_leading(*d.curve_f);
        QPoly h = d.curve_h ? poly_from_leading(*d.curve_h) : QPoly();
        QPoly F = Rational(4) * f + h * h;
        const int deg = std::max(f.degree(), 2 * h.degree());
        if ((*d.curve_f)[0] == 0 || F.degree() < 3) {
            bad.push_back("model degree too small");
        } else {
            const int genus = (deg + 1) / 2 - 1;
            if (genus != d.g) bad.push_back("genus " + std::to_string(genus) + " != g " + std::to_string(d.g));
            Rational disc = discriminant(F);
            if (disc == 0) {
                bad.push_back("singular model");
            } else {
                for (const auto& pp : factorize(abs(disc.get_num())).factors)
                    if (pp.prime != 2) model_bad.push_back(pp.prime);
                for (const auto& pp : factorize(disc.get_den()).factors)
                    if (pp.prime != 2) model_bad.push_back(pp.prime);
            }
        }
        ck.add("curve_model", bad);
        std::vector<std::string> fbad;
        for (const auto& x : d.fixed_points)
            if (F(x) != 0) fbad.push_back("x = " + rat_str(x) + " is not fixed by the involution");
        ck.add("fixed_points", fbad);
    } else if (!d.fixed_points.empty()) {
        ck.add("fixed_points", {"fixed points given without a curve model"});
    }
    if (d.weierstrass) {
        std::vector<std::string> bad;
        if (d.g != 1) bad.push_back("Weierstrass model needs g = 1");
        try {
            Curve E(*d.weierstrass);
            bool found = false;
            for (const auto& x : rational_three_kernels(E)) found |= kernel_character(E, x) == d.chi;
            if (!found) bad.push_back("no rational 3-kernel with character " + d.chi.get_str());
            for (const auto& pp : factorize(conductor(E)).factors) model_bad.push_back(pp.prime);
        } catch (const DomainError& e) {
            bad.push_back(e.what());
        }
        ck.add("curve_model", bad);
    }
    if (over_q && (!d.bad_primes.empty() || !model_bad.empty())) {
        std::vector<std::string> bad;
        std::set<Integer> need(d.bad_primes.begin(), d.bad_primes.end());
        need.insert(model_bad.begin(), model_bad.end());
        for (const auto& p : need)
            if (!d.find_place(p.get_str())) bad.push_back("bad prime " + p.get_str() + " has no place record");
        ck.add("bad_places", bad);
    }
    return ck.report;
}

// ---------------------------------------------------------------- analyze

RMAnalysis analyze(const RMDescriptor& d) {
    if (d.field_degree > 1)
        for (const auto& p : d.places)
            for (const auto& c : p.classes)
                if (!c.density) throw DomainError("densities required (field_degree > 1, place " + p.name + ")");
    auto report = validate(d);
    if (!report.pass()) {
        std::string s;
        for (const auto& f : report.failed()) s += " " + f;
        throw DomainError("descriptor fails validation:" + s);
    }

    struct Local {
        std::string label;
        Pow3 c;
        Rational density;
    };
    std::vector<std::vector<Local>> locals;
    for (const auto& p : d.places) {
        std::vector<Local> v;
        for (const auto& c : p.classes) {
            Rational dens;
            if (c.density)
                dens = *c.density;
            else
                dens = local_class_density(*rational_class(*rational_place(p.name), c.label));
            v.push_back({p.name + ":" + c.label, c.c_phi, dens});
        }
        locals.push_back(std::move(v));
    }

    RMAnalysis a;
    std::size_t total = 1;
    for (const auto& v : locals) total *= v.size();
    a.table.reserve(total);
    std::vector<std::size_t> digit(locals.size(), 0);
    for (std::size_t i = 0; i < total; ++i) {
        WeightedRatio w{"", Pow3{}, Rational(1)};
        for (std::size_t j = 0; j < locals.size(); ++j) {
            const auto& l = locals[j][digit[j]];
            w.signature += (j ? "|" : "") + l.label;
            w.c *= l.c;
            w.density *= l.density;
        }
        w.density.canonicalize();
        a.table.push_back(std::move(w));
        for (std::size_t j = 0; j < digit.size(); ++j) {
            if (++digit[j] < locals[j].size()) break;
            digit[j] = 0;
        }
    }
    a.mu = mu_table(a.table);
    a.rank_bound = rank_bound(a.table, d.g);
    a.bounds = proportion_bounds(a.table);
    return a;
}

// ------------------------------------------------------------- extraction

RMDescriptor extract_descriptor(const IsogenyChain& chain, const std::string& name) {
    RMDescriptor d;
    d.name = name.empty() ? chain.phi.domain().to_string() : name;
    d.g = 1;
    d.field_degree = 1;
    d.real_places = 1;
    d.k = 1;
    d.chi = chain.phi.kernel_character();
    d.chi_prime = chain.phi_prime().kernel_character();
    d.rm_poly = std::vector<Integer>{1, 0};
    d.polarization_degree = 1;
    d.weierstrass = chain.phi.domain().coeffs();
    for (const auto& v : chain.places) {
        RMPlace p;
        p.name = v.to_string();
        p.kind = v.is_infinite() ? PlaceKind::Real : PlaceKind::Finite;
        p.above3 = (!v.is_infinite() && v.prime() == 3) ? 1 : 0;
        p.class_count = class_count(v);
        std::vector<std::optional<Integer>> rep(static_cast<std::size_t>(p.class_count));
        int missing = p.class_count;
        for_each_squarefree(1, 1'000'000, [&](std::uint64_t n) {
            for (int sign : {1, -1}) {
                Integer dd = Integer(static_cast<unsigned long>(n)) * sign;
                auto& slot = rep[static_cast<std::size_t>(local_squareclass(dd, v).index())];
                if (!slot) {
                    slot = dd;
                    --missing;
                }
            }
            return missing > 0;
        });
        for (int i = 0; i < p.class_count; ++i) {
            const Integer& dd = *rep[static_cast<std::size_t>(i)];
            RMClass c;
            c.label = LocalSquareClass::from_index(v, i).label();
            c.c_phi = local_ratio(chain.phi, dd, v).value;
            c.c_phiprime = local_ratio(chain.phi_prime(), dd, v).value;
            c.density = local_class_density(LocalSquareClass::from_index(v, i));
            p.classes.push_back(std::move(c));
        }
        d.places.push_back(std::move(p));
    }
    return d;
}

// -------------------------------------------------------------- mutation

std::vector<Mutation> mutate(const RMDescriptor& d, int count, std::uint64_t seed) {
    using Edit = std::function<std::string(RMDescriptor&, std::mt19937_64&)>;
    std::vector<Edit> kinds;

    auto classes_where = [&](auto pred) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < d.places.size(); ++i)
            if (pred(d.places[i]))
                for (std::size_t j = 0; j < d.places[i].classes.size(); ++j) out.emplace_back(i, j);
        return out;
    };
    auto pick = [](const auto& v, std::mt19937_64& rng) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };
    auto as_ratio = [](RMClass& c) {
        c.tamagawa.reset();
        c.gamma.reset();
    };

    kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
        Integer q = 5;
        while (m.chi_prime % q == 0) q += 12;
        m.chi_prime *= q;
        return "chi_prime multiplied by " + q.get_str();
    });
    kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
        m.k = 0;
        return std::string("k set to 0");
    });
    kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
        m.real_places += 1;
        return std::string("real_places incremented");
    });
    kinds.push_back([](RMDescriptor& m, std::mt19937_64& rng) {
        std::size_t i = std::uniform_int_distribution<std::size_t>(0, m.places.size() - 1)(rng);
        m.places[i].classes.pop_back();
        return "last class of place " + m.places[i].name + " removed";
    });

    auto real = classes_where([](const RMPlace& p) { return p.kind == PlaceKind::Real; });
    if (!real.empty())
        kinds.push_back([=](RMDescriptor& m, std::mt19937_64& rng) {
            auto [i, j] = pick(real, rng);
            auto& c = m.places[i].classes[j];
            as_ratio(c);
            c.c_phi = Pow3::from_exponent(c.c_phi.exponent() == 0 ? -1 : 0);
            return "archimedean c(phi) flipped at " + m.places[i].name + ":" + c.label;
        });
    auto finite = classes_where([](const RMPlace& p) { return p.kind == PlaceKind::Finite && !p.above3; });
    if (!finite.empty())
        kinds.push_back([=](RMDescriptor& m, std::mt19937_64& rng) {
            auto [i, j] = pick(finite, rng);
            auto& c = m.places[i].classes[j];
            as_ratio(c);
            c.c_phi *= Pow3::from_exponent(1);
            return "c(phi) tripled at " + m.places[i].name + ":" + c.label;
        });
    auto at3 = classes_where([](const RMPlace& p) { return p.above3 > 0; });
    if (!at3.empty())
        kinds.push_back([=](RMDescriptor& m, std::mt19937_64& rng) {
            auto [i, j] = pick(at3, rng);
            auto& c = m.places[i].classes[j];
            as_ratio(c);
            c.c_phiprime *= Pow3::from_exponent(1);
            return "c(phi') tripled at " + m.places[i].name + ":" + c.label;
        });
    if (d.polarization_degree)
        kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
            *m.polarization_degree *= 3;
            return std::string("polarization degree tripled");
        });
    if (d.torsion && d.chi == 1 && *d.torsion % 3 == 0)
        kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
            *m.torsion += 1;
            return std::string("torsion order incremented");
        });
    if (d.rm_poly && d.rm_poly->size() > 1)
        kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
            m.rm_poly->erase(m.rm_poly->begin());
            return std::string("rm_poly leading coefficient dropped");
        });
    if (d.curve_f && !d.fixed_points.empty())
        kinds.push_back([](RMDescriptor& m, std::mt19937_64&) {
            m.curve_f->back() += 1;
            return std::string("constant term of f incremented");
        });
    auto dens = classes_where([](const RMPlace&) { return true; });
    dens.erase(std::remove_if(dens.begin(), dens.end(),
                              [&](auto ij) { return !d.places[ij.first].classes[ij.second].density; }),
               dens.end());
    if (!dens.empty())
        kinds.push_back([=](RMDescriptor& m, std::mt19937_64& rng) {
            auto [i, j] = pick(dens, rng);
            auto& c = m.places[i].classes[j];
            *c.density += Rational(1, 100);
            return "density raised at " + m.places[i].name + ":" + c.label;
        });

    std::mt19937_64 rng(seed);
    std::vector<Mutation> out;
    std::vector<std::size_t> order(kinds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int n = 0; n < count; ++n) {
        Mutation m{"", d};
        const auto& kind = kinds[order[static_cast<std::size_t>(n) % order.size()]];
        m.description = kind(m.descriptor, rng);
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace selmer
