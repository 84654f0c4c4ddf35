// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "cli.hpp"
#include "selmer/descent.hpp"
#include "selmer/rm_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>

using namespace selmer;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;  // failures first, then a summary

    void fail(const std::string& s) {
        pass = false;
        if (notes.size() < 12) notes.push_back(s);
    }
};

void report(int n, const Verdict& v, const std::string& summary) {
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << summary << "\n";
    for (const auto& s : v.notes) std::cout << "    " << s << "\n";
    std::cout.flush();
}

std::vector<Curve> load_corpus() {
    std::ifstream in(std::string(SELMER_FIXTURES) + "/corpus.txt");
    std::vector<Curve> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] == '[') out.push_back(Curve::parse(line));
    return out;
}

struct CurveData {
    Curve curve;
    IsogenyChain chain;
    RatioProfile profile;
};

// Criterion 1: chain identities over at least 64 signatures per kernel.
Verdict chain_identities(const std::vector<CurveData>& corpus, std::size_t& checked, std::size_t& min_classes) {
    Verdict v;
    checked = 0;
    min_classes = SIZE_MAX;
    for (const auto& cd : corpus) {
        for (const auto& kx : rational_three_kernels(cd.curve)) {
            auto chain = make_chain(cd.curve, kx);
            SignatureLattice lattice(chain.places);
            const std::size_t want = std::min<std::size_t>(64, lattice.size());
            std::set<std::size_t> seen;
            for_each_squarefree(1, 1'000'000, [&](std::uint64_t n) {
                for (int sign : {1, -1}) {
                    if (!seen.insert(lattice.index_of(n, sign)).second) continue;
                    Integer d = Integer(static_cast<unsigned long>(n)) * sign;
                    auto rep = chain_check(chain, d);
                    ++checked;
                    if (!rep.pass())
                        v.fail(cd.curve.to_string() + " d=" + d.get_str() + ": " + rep.failures.front());
                }
                return seen.size() < want;
            });
            min_classes = std::min(min_classes, seen.size());
            if (seen.size() < 50) v.fail(cd.curve.to_string() + ": only " + std::to_string(seen.size()) + " classes");
        }
    }
    return v;
}

// Criterion 2: c_p(phi_d) = 1 for p outside S dividing d.
Verdict off_s(const std::vector<CurveData>& corpus) {
    Verdict v;
    std::mt19937_64 rng(20240601);
    const auto& primes = small_primes(2000);
    int done = 0;
    while (done < 100) {
        const auto& cd = corpus[rng() % corpus.size()];
        const long p = primes[2 + rng() % (primes.size() - 2)];
        bool in_s = false;
        for (const auto& pl : cd.chain.places) in_s |= !pl.is_infinite() && pl.prime() == p;
        if (in_s) continue;
        Integer m = 1 + static_cast<long>(rng() % 500);
        Integer d = squarefree_part(Integer(m * p));
        if (d % p != 0) continue;
        if (rng() % 2) d = -d;
        for (const auto* phi : {&cd.chain.phi, &cd.chain.phi_prime()}) {
            auto r = local_ratio(*phi, d, Place::finite(p));
            if (r.value.exponent() != 0)
                v.fail(cd.curve.to_string() + " p=" + std::to_string(p) + " d=" + d.get_str() + ": " +
                       r.value.to_string());
        }
        ++done;
    }
    return v;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> r;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) r.push_back(cell);
        rows.push_back(r);
    }
    return rows;
}

Rational rat(const std::string& s) {
    Rational q(s);
    q.canonicalize();
    return q;
}

std::string run_cli_capture(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    selmer::cli::run(args, out, err);
    return out.str();
}

// Runs the installed executable through the shell and returns its stdout.
std::string run_binary(const std::string& args, int& status) {
    std::string cmd = std::string(SELMER_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        status = -1;
        return "";
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int rc = pclose(pipe);
    status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return out;
}

}  // namespace

int main() {
    const auto start = Clock::now();
    bool all = true;
    auto curves = load_corpus();

    std::vector<CurveData> corpus;
    for (const auto& E : curves) {
        auto chain = make_chain(E);
        auto prof = build_profile(chain.phi, chain.places);
        corpus.push_back({E, chain, std::move(prof)});
    }
    std::cout << "corpus: " << corpus.size() << " curves\n";

    {
        std::size_t checked = 0, min_classes = 0;
        auto v = chain_identities(corpus, checked, min_classes);
        report(1, v,
               std::to_string(checked) + " (curve, kernel, d) chains checked; >= " + std::to_string(min_classes) +
                   " twist classes per kernel");
        all &= v.pass;
    }
    {
        auto v = off_s(corpus);
        report(2, v, "100 random (p, d) with p outside S and p | d, both phi_d and phi'_d");
        all &= v.pass;
    }

    // Criteria 3 and 5 share one enumeration per curve.
    Verdict v3, v5;
    double worst_gap = 0, worst_rel = 0, slowest = 0;
    int spot_total = 0;
    for (const auto& cd : corpus) {
        const auto t0 = Clock::now();
        const std::uint64_t X = 1'000'000;
        auto tally = enumerate_by_height(cd.profile, X);
        const double secs = seconds_since(t0);
        slowest = std::max(slowest, secs);
        if (secs > 60) v3.fail(cd.curve.to_string() + ": " + std::to_string(secs) + " s");
        for (const auto& [m, mu] : cd.profile.mu()) {
            const double gap = std::abs(tally.mu_hat(cd.profile, m) - mu.get_d());
            worst_gap = std::max(worst_gap, gap);
            if (gap > 0.005)
                v3.fail(cd.curve.to_string() + " m=" + std::to_string(m) + ": gap " + std::to_string(gap));
        }
        const double exact = rank_bound(cd.profile).get_d();
        const double empirical = tally.average_t_term(cd.profile);
        const double rel = std::abs(empirical - exact) / exact;
        worst_rel = std::max(worst_rel, rel);
        if (rel > 0.01) v5.fail(cd.curve.to_string() + ": relative gap " + std::to_string(rel));
        auto spot = spot_check(cd.chain.phi, cd.profile, X, 40, 7);
        spot_total += spot.samples;
        if (spot.mismatches) v5.fail(cd.curve.to_string() + ": " + std::to_string(spot.mismatches) + " spot mismatches");
    }
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "X = 10^6, max |mu_hat - mu| = %.5f, slowest curve %.2f s", worst_gap, slowest);
        report(3, v3, buf);
        all &= v3.pass;
    }

    {
        Verdict v;
        for (const auto& cd : corpus) {
            const std::string text = cd.curve.to_string();
            auto prof_rows = parse_csv(run_cli_capture({"profile", "--curve", text}));
            auto bounds_rows = parse_csv(run_cli_capture({"bounds", "--curve", text}));
            Rational t0 = 0, t1 = 0;
            for (std::size_t i = 1; i < prof_rows.size(); ++i) {
                const auto& r = prof_rows[i];
                if (r.size() != 4) continue;
                if (r[2] == "0") t0 += rat(r[3]);
                if (r[2] == "1") t1 += rat(r[3]);
            }
            t0.canonicalize();
            t1.canonicalize();
            if (!(t0 > 0)) v.fail(text + ": mu(T_0) = 0");
            if (!(t1 > 0)) v.fail(text + ": mu(T_1) + mu(T_-1) = 0");
            if (bounds_rows.size() != 2 || bounds_rows[1].size() != 3) {
                v.fail(text + ": malformed bounds output");
                continue;
            }
            Rational half = t0 / 2, five_sixths = Rational(5, 6) * t1;
            half.canonicalize();
            five_sixths.canonicalize();
            if (rat(bounds_rows[1][1]) != half) v.fail(text + ": rank0_lower " + bounds_rows[1][1] + " != " + half.get_str());
            if (rat(bounds_rows[1][2]) != five_sixths)
                v.fail(text + ": selmer1_lower " + bounds_rows[1][2] + " != " + five_sixths.get_str());
        }
        report(4, v, "positivity and emitted bounds vs sums over the emitted signature table, exact");
        all &= v.pass;
    }
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "max relative gap %.5f at X = 10^6; %d full-pipeline spot checks", worst_rel,
                      spot_total);
        report(5, v5, buf);
        all &= v5.pass;
    }

    {
        Verdict v;
        auto known = load_selmer_fixture(std::string(SELMER_FIXTURES) + "/selmer_known.csv");
        int applicable = 0;
        std::vector<std::string> skipped;
        for (const auto& cd : corpus) {
            const std::string text = cd.curve.to_string();
            std::optional<SelmerComputation> sc;
            try {
                sc = selmer_compute(cd.curve);
            } catch (const DomainError& e) {
                if (std::string(e.what()).find("not applicable") == std::string::npos) v.fail(text + ": " + e.what());
                else skipped.push_back(text);
                continue;
            }
            ++applicable;
            for (const auto& img : sc->images) {
                // c_p(phi') * #mu_3(Q_p), as an exact power of 3.
                const int e = local_ratio(sc->chain.phi_prime(), 1, Place::finite(img.p)).value.exponent() +
                              (mu3_order(img.p) == 3 ? 1 : 0);
                long expected = e < 0 ? 0 : 1;
                for (int i = 0; i < e; ++i) expected *= 3;
                if (img.predicted_size != expected)
                    v.fail(text + " p=" + std::to_string(img.p) + ": prediction " + std::to_string(img.predicted_size) +
                           " != " + std::to_string(expected));
                if (img.span.size() != img.predicted_size)
                    v.fail(text + " p=" + std::to_string(img.p) + ": image size " + std::to_string(img.span.size()));
            }
            auto rep = duality_report(*sc);
            if (!rep.pass()) v.fail(text + ": " + rep.failures.front());
            if (rep.dim_selmer_phi < 0) v.fail(text + ": #Sel_phi not a power of 3");
            if (!sc->closed || !sc->stable) v.fail(text + ": Selmer set not closed or not stable");
            auto win = parity_window(rep);
            if (win.verdict() != "consistent") v.fail(text + ": parity " + win.verdict());
            auto it = known.find(text);
            if (it == known.end()) v.fail(text + ": missing from fixture");
            else if (it->second.dim_phiprime != rep.dim_selmer_phiprime || it->second.dim_phi != rep.dim_selmer_phi)
                v.fail(text + ": fixture (" + std::to_string(it->second.dim_phi) + "," +
                       std::to_string(it->second.dim_phiprime) + ") vs computed (" +
                       std::to_string(rep.dim_selmer_phi) + "," + std::to_string(rep.dim_selmer_phiprime) + ")");
        }
        std::string s = std::to_string(applicable) + " curves at d = 1, local images, duality, parity, fixture";
        for (const auto& k : skipped) s += "; " + k + " not applicable (no rational kernel point)";
        report(6, v, s);
        all &= v.pass;
    }

    {
        Verdict v;
        for (const auto& cd : corpus) {
            auto d = parse_descriptor(write_descriptor(extract_descriptor(cd.chain)));
            auto r = validate(d);
            if (!r.pass()) {
                v.fail(cd.curve.to_string() + ": extracted descriptor fails " + r.failed().front());
                continue;
            }
            auto a = analyze(d);
            auto native = weighted_table(cd.profile);
            bool same = a.table.size() == native.size();
            for (std::size_t i = 0; same && i < native.size(); ++i)
                same = a.table[i].signature == native[i].signature && a.table[i].c == native[i].c &&
                       a.table[i].density == native[i].density;
            auto nb = proportion_bounds(cd.profile);
            same = same && a.rank_bound == rank_bound(cd.profile) && a.bounds.rank0_lower == nb.rank0_lower &&
                   a.bounds.selmer1_lower == nb.selmer1_lower;
            if (!same) v.fail(cd.curve.to_string() + ": descriptor bounds differ from native");
        }
        int mutations = 0;
        for (const char* f : {"genus2_rm3.rmd", "j0_127.rmd", "j0_109.rmd"}) {
            auto d = read_descriptor(std::string(SELMER_FIXTURES) + "/" + f);
            auto r = validate(d);
            if (!r.pass()) v.fail(std::string(f) + ": fails " + r.failed().front());
            for (const auto& m : mutate(d, 10, 2024)) {
                ++mutations;
                if (validate(parse_descriptor(write_descriptor(m.descriptor))).pass())
                    v.fail(std::string(f) + ": mutation passed: " + m.description);
            }
        }
        report(7, v,
               std::to_string(corpus.size()) + " g = 1 round trips; 3 fixtures validate; " + std::to_string(mutations) +
                   " seeded mutations rejected");
        all &= v.pass;
    }

    {
        Verdict v;
        const std::string fx = std::string(SELMER_FIXTURES);
        const std::string tmp = "/tmp/selmer_accept_extract.rmd";
        const std::vector<std::string> commands = {
            "localdata --curve '[1,0,1,0,0]'",
            "ratios --curve '[1,0,1,0,0]' --twist -26",
            "ratios --curve '[0,0,0,0,16]' --kernel-x -4 --twist 5 --json-lines",
            "profile --curve '[4,0,7,0,0]' --threads 2",
            "densities --curve '[1,0,1,0,0]' --height 200000 --threads 2",
            "bounds --curve '[-3,0,4,0,0]'",
            "enumerate --curve '[0,0,0,0,2]' --height 2000",
            "descent --curve '[-4,0,1,0,0]' --seed 9 --threads 2 --fixture " + fx + "/selmer_known.csv",
            "descent --curve '[4,0,7,0,0]' --seed 3 --precision 80",
            "rm validate " + fx + "/j0_127.rmd",
            "rm analyze " + fx + "/j0_109.rmd",
            "rm analyze " + fx + "/genus2_rm3.rmd --profile --json-lines",
            "rm mutate " + fx + "/genus2_rm3.rmd --seed 11",
            "rm extract --curve '[2,0,1,0,0]'",
        };
        for (const auto& c : commands) {
            int s1 = 0, s2 = 0;
            auto a = run_binary(c, s1);
            auto b = run_binary(c, s2);
            if (s1 != 0 || s2 != 0) v.fail(c + ": exit " + std::to_string(s1) + "/" + std::to_string(s2));
            else if (a.empty()) v.fail(c + ": no output");
            else if (a != b) v.fail(c + ": outputs differ");
        }
        report(8, v, std::to_string(commands.size()) + " subcommand invocations run twice, byte-identical");
        all &= v.pass;
    }

    std::printf("total %.1f s\n", seconds_since(start));
    return all ? 0 : 1;
}
