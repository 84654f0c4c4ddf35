#include "cli.hpp"

#include "selmer/descent.hpp"
#include "selmer/rm_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace selmer::cli {
namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Config {
    std::string curve;
    std::string kernel_x;
    std::string twist = "1";
    std::uint64_t height = 0;
    int threads = 1;
    std::uint64_t seed = 1;
    int precision = 0;
    std::string out;
    bool json_lines = false;
    std::string file;
    std::string fixture;
    bool profile = false;
    int count = 10;
};

std::string fixed(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

void emit(const Table& t, std::ostream& os, bool json) {
    if (json) {
        for (const auto& r : t.rows) {
            nlohmann::ordered_json j;
            for (std::size_t i = 0; i < t.header.size(); ++i) j[t.header[i]] = r[i];
            os << j.dump() << "\n";
        }
        return;
    }
    auto line = [&](const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

Curve need_curve(const Config& c) {
    if (c.curve.empty()) throw UsageError("--curve is required");
    return Curve::parse(c.curve);
}

Rational parse_rational(const std::string& s, const char* flag) {
    Rational q;
    if (s.empty() || q.set_str(s, 10) != 0 || q.get_den() == 0)
        throw UsageError(std::string(flag) + ": not a rational number: '" + s + "'");
    q.canonicalize();
    return q;
}

IsogenyChain need_chain(const Config& c) {
    Curve E = need_curve(c);
    std::optional<Rational> kx;
    if (!c.kernel_x.empty()) kx = parse_rational(c.kernel_x, "--kernel-x");
    return make_chain(E, kx);
}

Integer need_twist(const Config& c) {
    Integer d;
    if (c.twist.empty() || d.set_str(c.twist, 10) != 0) throw UsageError("--twist: not an integer: '" + c.twist + "'");
    if (d == 0) throw UsageError("--twist: d must be nonzero");
    return d;
}

std::string ratio_row_place(const Place& p) { return p.to_string(); }

Table localdata(const Config& c) {
    Curve E = need_curve(c);
    auto [model, change] = E.integral_model();
    Table t{{"p", "kodaira", "c_p", "reduction", "f_p"}, {}};
    Integer disc = model.invariants().disc.get_num();
    for (const auto& pp : factorize(abs(disc)).factors) {
        auto r = tate_algorithm(E, pp.prime);
        if (r.conductor_exponent == 0) continue;
        t.rows.push_back({pp.prime.get_str(), r.kodaira, std::to_string(r.tamagawa), to_string(r.reduction),
                          std::to_string(r.conductor_exponent)});
    }
    return t;
}

Table ratios(const Config& c) {
    auto chain = need_chain(c);
    auto rep = chain_check(chain, need_twist(c));
    Table t{{"place", "c_phi", "c_phiprime", "c_pi"}, {}};
    for (const auto& r : rep.rows)
        t.rows.push_back({ratio_row_place(r.place), r.c_phi.to_string(), r.c_phiprime.to_string(), r.c_pi.to_string()});
    t.rows.push_back({"global", rep.c_phi.to_string(), rep.c_phiprime.to_string(), rep.c_pi.to_string()});
    return t;
}

RatioProfile profile_of(const IsogenyChain& chain, const Config& c) {
    ProfileOptions o;
    o.threads = c.threads;
    return build_profile(chain.phi, chain.places, o);
}

Table profile_table(const std::vector<WeightedRatio>& table) {
    Table t{{"signature", "c", "t", "density"}, {}};
    for (const auto& w : table)
        t.rows.push_back({w.signature, w.c.to_string(), std::to_string(std::abs(w.c.exponent())), w.density.get_str()});
    return t;
}

Table bounds_table(const Rational& rank, const ProportionBounds& b) {
    return {{"rank_bound", "rank0_lower", "selmer1_lower"},
            {{rank.get_str(), b.rank0_lower.get_str(), b.selmer1_lower.get_str()}}};
}

std::uint64_t need_height(const Config& c) {
    if (c.height == 0) throw UsageError("--height is required and must be positive");
    return c.height;
}

Table densities(const Config& c) {
    auto chain = need_chain(c);
    auto prof = profile_of(chain, c);
    auto tally = enumerate_by_height(prof, need_height(c), c.threads);
    auto counts = tally.m_counts(prof);
    Table t{{"m", "mu_exact", "mu_empirical", "count"}, {}};
    for (const auto& [m, mu] : prof.mu()) {
        auto it = counts.find(m);
        std::uint64_t n = it == counts.end() ? 0 : it->second;
        t.rows.push_back({std::to_string(m), mu.get_str(), fixed(tally.mu_hat(prof, m)), std::to_string(n)});
    }
    return t;
}

Table enumerate(const Config& c) {
    auto chain = need_chain(c);
    auto prof = profile_of(chain, c);
    const std::uint64_t X = need_height(c);
    Table t{{"d", "signature", "c", "t"}, {}};
    for_each_squarefree(1, X + 1, [&](std::uint64_t n) {
        for (int sign : {1, -1}) {
            const auto& e = prof.entries[prof.lattice.index_of(n, sign)];
            Integer d = Integer(static_cast<unsigned long>(n)) * sign;
            t.rows.push_back({d.get_str(), e.signature.label(), e.c.to_string(), std::to_string(e.t)});
        }
        return true;
    });
    return t;
}

Table descent(const Config& c, std::ostream& err) {
    Curve E = need_curve(c);
    std::optional<Rational> kx;
    if (!c.kernel_x.empty()) kx = parse_rational(c.kernel_x, "--kernel-x");
    DescentOptions o;
    o.seed = c.seed;
    o.threads = c.threads;
    if (c.precision > 0) {
        o.max_precision = c.precision;
        o.start_precision = std::min(o.start_precision, c.precision);
    }
    auto sc = selmer_compute(E, kx, o);
    auto rep = duality_report(sc);
    auto win = parity_window(rep);
    for (const auto& f : rep.failures) err << "duality: " << f << "\n";
    if (!c.fixture.empty()) {
        auto known = load_selmer_fixture(c.fixture);
        auto it = known.find(E.to_string());
        if (it == known.end())
            err << "fixture: no record for " << E.to_string() << "\n";
        else if (it->second.dim_phiprime != rep.dim_selmer_phiprime || it->second.dim_phi != rep.dim_selmer_phi)
            err << "fixture mismatch for " << E.to_string() << ": known (" << it->second.dim_phi << ","
                << it->second.dim_phiprime << "), computed (" << rep.dim_selmer_phi << "," << rep.dim_selmer_phiprime
                << ")\n";
    }
    return {{"dim_selmer_phiprime", "dim_selmer_phi_derived", "c_phi", "epsilon0", "window_lo", "window_hi",
             "parity_verdict"},
            {{std::to_string(rep.dim_selmer_phiprime), std::to_string(rep.dim_selmer_phi), rep.c_phi.to_string(),
              std::to_string(rep.epsilon0), std::to_string(win.lo), std::to_string(win.hi), win.verdict()}}};
}

struct Outcome {
    Table table;
    int status = 0;
};

Outcome rm_validate(const Config& c, std::ostream& err) {
    auto d = read_descriptor(c.file);
    auto r = validate(d);
    Outcome o;
    o.table.header = {"identity", "result", "detail"};
    for (const auto& i : r.items) o.table.rows.push_back({i.identity, i.pass ? "pass" : "fail", i.detail});
    err << (d.name.empty() ? c.file : d.name) << ": " << r.items.size() - r.failed().size() << "/" << r.items.size()
        << " identities hold";
    if (!r.pass()) {
        err << "; failed:";
        for (const auto& f : r.failed()) err << " " << f;
        o.status = 1;
    }
    err << "\n";
    return o;
}

Table rm_analyze(const Config& c, std::ostream& err) {
    auto d = read_descriptor(c.file);
    auto a = analyze(d);
    err << (d.name.empty() ? c.file : d.name) << ": g = " << d.g << ", " << a.table.size()
        << " signatures, rank bound " << a.rank_bound.get_str() << " ~ " << fixed(a.rank_bound.get_d(), 4) << "\n";
    if (c.profile) return profile_table(a.table);
    return bounds_table(a.rank_bound, a.bounds);
}

Table rm_mutate(const Config& c) {
    auto d = read_descriptor(c.file);
    Table t{{"index", "mutation", "result", "failed"}, {}};
    int i = 0;
    for (const auto& m : mutate(d, c.count, c.seed)) {
        auto r = validate(m.descriptor);
        std::string f;
        for (const auto& x : r.failed()) f += (f.empty() ? "" : ";") + x;
        std::string desc = m.description;
        std::replace(desc.begin(), desc.end(), ',', ';');
        t.rows.push_back({std::to_string(i++), desc, r.pass() ? "pass" : "fail", f});
    }
    return t;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"3-isogeny Selmer ratios, twist densities, descent and RM descriptors", "selmer"};
    app.require_subcommand(1);
    Config c;

    auto curve_opts = [&](CLI::App* s, bool kernel) {
        s->add_option("--curve", c.curve, "Curve as [a1,a2,a3,a4,a6]");
        if (kernel) s->add_option("--kernel-x", c.kernel_x, "x-coordinate of the kernel (default: first rational)");
    };
    auto common = [&](CLI::App* s) {
        s->add_option("--out", c.out, "Write the table here instead of stdout");
        s->add_flag("--json-lines", c.json_lines, "One JSON object per row instead of CSV");
        s->add_option("--seed", c.seed, "Seed for every random choice");
        s->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1, 256));
    };

    auto* localdata_cmd = app.add_subcommand("localdata", "Tate's algorithm at each bad prime");
    curve_opts(localdata_cmd, false);
    common(localdata_cmd);

    auto* ratios_cmd = app.add_subcommand("ratios", "Local Selmer ratios of phi_d, phi'_d and pi_d");
    curve_opts(ratios_cmd, true);
    ratios_cmd->add_option("--twist", c.twist, "Twist d (default 1)");
    common(ratios_cmd);

    auto* profile_cmd = app.add_subcommand("profile", "Ratio profile over twist signatures");
    curve_opts(profile_cmd, true);
    common(profile_cmd);

    auto* densities_cmd = app.add_subcommand("densities", "Exact and empirical densities of T_m");
    curve_opts(densities_cmd, true);
    densities_cmd->add_option("--height", c.height, "Enumerate squarefree |d| <= X");
    common(densities_cmd);

    auto* bounds_cmd = app.add_subcommand("bounds", "Rank bound and proportion bounds");
    curve_opts(bounds_cmd, true);
    common(bounds_cmd);

    auto* enumerate_cmd = app.add_subcommand("enumerate", "List squarefree twists with their ratio");
    curve_opts(enumerate_cmd, true);
    enumerate_cmd->add_option("--height", c.height, "List squarefree |d| <= X");
    common(enumerate_cmd);

    auto* descent_cmd = app.add_subcommand("descent", "Selmer group of the mu_3 isogeny and the parity window");
    curve_opts(descent_cmd, true);
    descent_cmd->add_option("--precision", c.precision, "Maximum p-adic precision")->check(CLI::Range(4, 100000));
    descent_cmd->add_option("--fixture", c.fixture, "CSV of known Selmer dimensions to compare against");
    common(descent_cmd);

    auto* rm_cmd = app.add_subcommand("rm", "RM descriptors");
    rm_cmd->require_subcommand(1);
    auto* rm_validate_cmd = rm_cmd->add_subcommand("validate", "Check a descriptor's identities");
    auto* rm_analyze_cmd = rm_cmd->add_subcommand("analyze", "Bounds from a descriptor");
    auto* rm_extract_cmd = rm_cmd->add_subcommand("extract", "Descriptor of an elliptic 3-isogeny chain");
    auto* rm_mutate_cmd = rm_cmd->add_subcommand("mutate", "Seeded perturbations and their validation");
    for (auto* s : {rm_validate_cmd, rm_analyze_cmd, rm_mutate_cmd}) {
        s->add_option("file", c.file, "Descriptor file")->required();
        common(s);
    }
    rm_analyze_cmd->add_flag("--profile", c.profile, "Emit the signature table instead of the bounds");
    rm_mutate_cmd->add_option("--count", c.count, "Number of perturbations")->check(CLI::Range(1, 10000));
    curve_opts(rm_extract_cmd, true);
    common(rm_extract_cmd);

    std::vector<std::string> argv_store{"selmer"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (c.json_lines && rm_extract_cmd->parsed()) throw UsageError("--json-lines does not apply to rm extract");
        Table t;
        int status = 0;
        std::string text;  // rm extract writes a descriptor, not a table
        bool is_text = false;
        if (localdata_cmd->parsed()) t = localdata(c);
        else if (ratios_cmd->parsed()) t = ratios(c);
        else if (profile_cmd->parsed()) t = profile_table(weighted_table(profile_of(need_chain(c), c)));
        else if (densities_cmd->parsed()) t = densities(c);
        else if (bounds_cmd->parsed()) {
            auto prof = profile_of(need_chain(c), c);
            t = bounds_table(rank_bound(prof), proportion_bounds(prof));
        } else if (enumerate_cmd->parsed()) t = enumerate(c);
        else if (descent_cmd->parsed()) t = descent(c, err);
        else if (rm_validate_cmd->parsed()) {
            auto o = rm_validate(c, err);
            t = std::move(o.table);
            status = o.status;
        } else if (rm_analyze_cmd->parsed()) t = rm_analyze(c, err);
        else if (rm_mutate_cmd->parsed()) t = rm_mutate(c);
        else if (rm_extract_cmd->parsed()) {
            text = write_descriptor(extract_descriptor(need_chain(c)));
            is_text = true;
        }

        std::ostringstream buf;
        if (is_text) buf << text;
        else emit(t, buf, c.json_lines);
        if (c.out.empty()) {
            out << buf.str();
        } else {
            std::ofstream f(c.out, std::ios::binary);
            if (!f) throw UsageError("cannot write output file: " + c.out);
            f << buf.str();
        }
        return status;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace selmer::cli
