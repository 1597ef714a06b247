// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Usage: acceptance <path-to-avatar-cli> [--only k]

#include "avatar/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace avatar;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 2) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << x;
    return os.str();
}

std::string family(TopologyKind k, NodeId n) {
    std::string s(to_string(k));
    s += "(" + std::to_string(n);
    if (k == TopologyKind::SkipChord) s += "," + std::to_string(log2_exact(n));
    return s + ")";
}

HostSet all_hosts(NodeId n) {
    std::vector<NodeId> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return {v, n};
}

std::vector<std::uint64_t> seed_range(std::uint64_t count) {
    std::vector<std::uint64_t> s(count);
    std::iota(s.begin(), s.end(), 1);
    return s;
}

constexpr TopologyKind kFamilies[] = {TopologyKind::Linear, TopologyKind::Cbt, TopologyKind::Chord, TopologyKind::SkipChord};

// ---------------------------------------------------------------------------
// Independent oracles for criterion 2.

int floyd_warshall_diameter(const GuestGraph& g) {
    const int n = g.n;
    const int inf = std::numeric_limits<int>::max() / 4;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (int i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& [a, b] : g.edges) d[a][b] = d[b][a] = 1;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    int best = 0;
    for (const auto& row : d)
        for (int x : row) best = std::max(best, x);
    return best;
}

// Every non-empty host set, with owners found by scanning and host degrees
// from an adjacency matrix; shares no code with the embedding module.
int subset_delta(const GuestGraph& g) {
    const int n = g.n;
    int best = 0;
    std::vector<int> owner(n);
    std::vector<std::uint32_t> adj(n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        int cur = -1;
        for (int x = 0; x < n; ++x)
            if (mask >> x & 1u) {
                cur = x;
                break;
            }
        for (int x = 0; x < n; ++x) {
            if (mask >> x & 1u) cur = x;
            owner[x] = cur;
        }
        std::fill(adj.begin(), adj.end(), 0u);
        int prev = -1;
        for (int x = 0; x < n; ++x)
            if (mask >> x & 1u) {
                if (prev >= 0) {
                    adj[prev] |= 1u << x;
                    adj[x] |= 1u << prev;
                }
                prev = x;
            }
        for (const auto& [a, b] : g.edges) {
            const int p = owner[a];
            const int q = owner[b];
            if (p != q) {
                adj[p] |= 1u << q;
                adj[q] |= 1u << p;
            }
        }
        for (int h = 0; h < n; ++h)
            if (mask >> h & 1u) best = std::max(best, std::popcount(adj[h]));
    }
    return best;
}

// ---------------------------------------------------------------------------

struct C1Data {
    std::vector<std::pair<std::string, RunRow>> rows;  // label, row
};

C1Data c1_runs() {
    C1Data data;
    struct Scen {
        std::string name;
        double level;
        std::string label;
    };
    const std::vector<Scen> scenarios{{"singleton-line", 0.0, "singleton-line"}, {"random", 0.5, "random-0.5"}, {"random", 1.0, "random-1.0"}};
    for (const auto kind : kFamilies) {
        for (const auto& sc : scenarios) {
            SweepConfig cfg;
            cfg.kind = kind;
            cfg.n_list = {8, 16};
            cfg.seeds = seed_range(25);
            cfg.scenario = sc.name;
            cfg.corruption = sc.level;
            for (auto& r : sweep(cfg).rows) data.rows.emplace_back(sc.label, std::move(r));
        }
    }
    return data;
}

Verdict criterion1(const C1Data& d, double seconds) {
    std::map<std::string, std::pair<int, int>> by_family;  // converged, total
    std::map<std::string, int> failures;
    int ok = 0;
    for (const auto& [label, r] : d.rows) {
        auto& [c, t] = by_family[family(r.kind, r.n)];
        ++t;
        if (r.converged) {
            ++c;
            ++ok;
        } else {
            ++failures[family(r.kind, r.n) + "/" + label];
        }
    }
    std::string detail = std::to_string(ok) + "/" + std::to_string(d.rows.size()) + " runs converged within 50*D*log2 N";
    detail += " (" + fmt(seconds, 0) + "s);";
    for (const auto& [f, ct] : by_family) detail += " " + f + " " + std::to_string(ct.first) + "/" + std::to_string(ct.second);
    if (!failures.empty()) {
        detail += "; misses:";
        for (const auto& [k, v] : failures) detail += " " + k + "=" + std::to_string(v);
    }
    return {ok == static_cast<int>(d.rows.size()) && seconds < 600.0, detail};
}

Verdict criterion2() {
    std::vector<std::string> bad;
    const auto g = [](TopologyKind k, NodeId n, std::optional<NodeId> s = std::nullopt) { return build_topology({k, n, s}); };
    const auto expect_diam = [&](const GuestGraph& gg, int want, const std::string& name) {
        const int a = diameter(gg);
        const int b = floyd_warshall_diameter(gg);
        if (a != want || b != want) bad.push_back(name + " diameter " + std::to_string(a) + "/" + std::to_string(b));
    };
    expect_diam(g(TopologyKind::Linear, 8), 7, "Linear(8)");
    expect_diam(g(TopologyKind::Chord, 8), 2, "Chord(8)");
    expect_diam(g(TopologyKind::Cbt, 8), 5, "Cbt(8)");

    std::string detail = "D(Linear8)=7 D(Chord8)=2 D(Cbt8)=5;";
    for (NodeId n : {4, 8, 16}) {
        const auto lin = g(TopologyKind::Linear, n);
        const int a = max_degree_embedding_bruteforce(lin);
        const int b = subset_delta(lin);
        if (a != 2 || b != 2) bad.push_back("Delta(Linear" + std::to_string(n) + ")=" + std::to_string(a) + "/" + std::to_string(b));
    }
    const auto chord = g(TopologyKind::Chord, 16);
    const int ca = max_degree_embedding_bruteforce(chord);
    const int cb = subset_delta(chord);
    if (ca < 8 || ca != cb) bad.push_back("Delta(Chord16)=" + std::to_string(ca) + "/" + std::to_string(cb));
    const auto sc = g(TopologyKind::SkipChord, 16, 2);
    const int sa = max_degree_embedding_bruteforce(sc);
    const int sb = subset_delta(sc);
    if (sa > 6 || sa != sb) bad.push_back("Delta(SkipChord16,2)=" + std::to_string(sa) + "/" + std::to_string(sb));
    detail += " Delta(Linear 4/8/16)=2 Delta(Chord16)=" + std::to_string(ca) + " Delta(SkipChord16,2)=" + std::to_string(sa) +
              " (module / independent enumerator agree)";
    for (const auto& b : bad) detail += "; MISMATCH " + b;
    return {bad.empty(), detail};
}

struct ScaleData {
    std::map<TopologyKind, SweepResult> sweeps;
};

ScaleData c3_runs() {
    ScaleData d;
    for (const auto kind : {TopologyKind::Linear, TopologyKind::Cbt, TopologyKind::SkipChord}) {
        SweepConfig cfg;
        cfg.kind = kind;
        cfg.n_list = {8, 16, 32, 64};
        cfg.seeds = seed_range(20);
        d.sweeps[kind] = sweep(cfg);
    }
    return d;
}

// Median over all runs with a non-converged run counted as taking forever.
std::optional<double> censored_median(const std::vector<RunRow>& rows, NodeId n) {
    std::vector<double> v;
    for (const auto& r : rows)
        if (r.n == n) v.push_back(r.converged ? static_cast<double>(*r.rounds) : std::numeric_limits<double>::infinity());
    if (v.empty()) return std::nullopt;
    const double m = median(v);
    if (!std::isfinite(m)) return std::nullopt;
    return m;
}

Verdict criterion3(const ScaleData& d) {
    bool pass = true;
    std::string detail;
    for (const auto kind : {TopologyKind::Cbt, TopologyKind::SkipChord}) {
        const auto& sw = d.sweeps.at(kind);
        std::vector<double> cs;
        detail += std::string(to_string(kind)) + " c_time:";
        for (const auto& s : sw.sizes) {
            const auto m = censored_median(sw.rows, s.n);
            if (!m) {
                detail += " N=" + std::to_string(s.n) + ":n/a";
                pass = false;
                continue;
            }
            const double c = *m / (s.diameter * ceil_log2(s.n));
            cs.push_back(c);
            detail += " N=" + std::to_string(s.n) + ":" + fmt(c);
        }
        if (!cs.empty()) {
            const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
            const double ratio = *hi / *lo;
            detail += " ratio=" + fmt(ratio) + ";";
            if (ratio > 4.0) pass = false;
        }
        detail += " ";
    }
    const auto& lin = d.sweeps.at(TopologyKind::Linear);
    detail += "Linear median rounds:";
    double prev = -1;
    for (const auto& s : lin.sizes) {
        const auto m = censored_median(lin.rows, s.n);
        if (!m) {
            detail += " N=" + std::to_string(s.n) + ":n/a";
            pass = false;
            continue;
        }
        detail += " N=" + std::to_string(s.n) + ":" + fmt(*m, 1);
        if (*m <= prev || *m < s.n / 2.0) pass = false;
        prev = *m;
    }
    detail += " (non-converged runs count as infinite)";
    return {pass, detail};
}

Verdict criterion4(const C1Data& c1, const ScaleData& sc) {
    std::map<std::pair<TopologyKind, NodeId>, std::int32_t> dhat;
    const auto delta_of = [&](TopologyKind k, NodeId n) {
        auto it = dhat.find({k, n});
        if (it == dhat.end()) it = dhat.emplace(std::pair{k, n}, delta_hat(build_topology(sweep_spec(k, n, std::nullopt)))).first;
        return it->second;
    };
    double c = 0.0;
    std::size_t runs = 0;
    std::vector<const RunRow*> all;
    for (const auto& [_, r] : c1.rows) all.push_back(&r);
    for (const auto& [_, sw] : sc.sweeps)
        for (const auto& r : sw.rows) all.push_back(&r);
    std::map<TopologyKind, double> per_family;
    for (const auto* r : all) {
        if (!r->converged) continue;
        ++runs;
        const double ratio = r->peak_degree / (static_cast<double>(delta_of(r->kind, r->n)) * ceil_log2(r->n));
        c = std::max(c, ratio);
        per_family[r->kind] = std::max(per_family[r->kind], ratio);
    }
    bool pass = runs > 0;
    std::string detail = "c = " + fmt(c, 3) + " over " + std::to_string(runs) + " converged runs (per family:";
    for (const auto& [k, v] : per_family) detail += " " + std::string(to_string(k)) + "=" + fmt(v, 3);
    detail += "); Linear max expansion vs 4*log2 N:";
    for (const auto& s : sc.sweeps.at(TopologyKind::Linear).sizes) {
        double worst = 0.0;
        for (const auto& r : sc.sweeps.at(TopologyKind::Linear).rows)
            if (r.n == s.n && r.converged) worst = std::max(worst, r.degree_expansion);
        for (const auto& [_, r] : c1.rows)
            if (r.kind == TopologyKind::Linear && r.n == s.n && r.converged) worst = std::max(worst, r.degree_expansion);
        const double bound = 4.0 * ceil_log2(s.n);
        detail += " N=" + std::to_string(s.n) + ":" + fmt(worst) + "<=" + fmt(bound, 0);
        if (worst > bound) pass = false;
    }
    return {pass, detail};
}

double forged_disconnection(std::int32_t rs_bits, int seeds) {
    SweepConfig cfg;
    cfg.kind = TopologyKind::Linear;
    cfg.n_list = {8};
    cfg.seeds = seed_range(static_cast<std::uint64_t>(seeds));
    cfg.scenario = "forged-merge-rs";
    cfg.engine.rs_bits = rs_bits;
    const auto res = sweep(cfg);
    const auto bad = std::count_if(res.rows.begin(), res.rows.end(), [](const RunRow& r) { return r.disconnected; });
    return static_cast<double>(bad) / static_cast<double>(res.rows.size());
}

Verdict criterion5(const C1Data& c1) {
    const auto honest = std::count_if(c1.rows.begin(), c1.rows.end(), [](const auto& p) { return p.second.disconnected; });
    const double f4 = forged_disconnection(4, 200);
    const double f8 = forged_disconnection(8, 200);
    std::string detail = std::to_string(honest) + " disconnections in " + std::to_string(c1.rows.size()) +
                         " honest runs; forged-merge-rs N=8: k=4 freq=" + fmt(f4, 3) + " (<=0.5), k=8 freq=" + fmt(f8, 3) +
                         " (<=0.05)";
    return {honest == 0 && f4 <= 0.5 && f8 <= 0.05, detail};
}

// ---------------------------------------------------------------------------

std::vector<PfcTag> pfc_round(const std::vector<PfcTag>& cur, bool want) {
    auto nxt = cur;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const std::optional<PfcTag> parent = i == 0 ? std::nullopt : std::optional{cur[i - 1]};
        const auto children = i + 1 < cur.size() ? std::vector<PfcTag>{cur[i + 1]} : std::vector<PfcTag>{};
        switch (pfc_step(cur[i], parent, children, want)) {
            case PfcMove::Initiate:
            case PfcMove::Propagate: nxt[i] = PfcTag::Propagate; break;
            case PfcMove::Feedback: nxt[i] = PfcTag::Feedback; break;
            case PfcMove::Clean: nxt[i] = PfcTag::Clean; break;
            case PfcMove::Stay: break;
        }
    }
    return nxt;
}

// Number of hosts off their ranges among clusters with no merging host.
int check_cluster_ranges(const World& w, std::set<std::vector<NodeId>>& seen) {
    std::map<NodeId, std::vector<const HostState*>> by_cluster;
    std::set<NodeId> busy;
    for (const auto& x : w.states) {
        by_cluster[x.cluster()].push_back(&x);
        for (const auto& g : x.guests)
            if (g.role.tag == RoleTag::Merging) busy.insert(g.cluster), busy.insert(g.partner);
    }
    int bad = 0;
    for (const auto& [cid, members] : by_cluster) {
        if (busy.contains(cid)) continue;
        std::vector<NodeId> ids;
        for (const auto* m : members) ids.push_back(m->id);
        const auto rm = ranges(w.graph.n, HostSet(ids, w.graph.n));
        for (const auto* m : members) {
            const auto& want = rm.range_of(m->id);
            if (m->guests.front().vid != want.lo || m->guests.back().vid != want.hi - 1 ||
                static_cast<NodeId>(m->guests.size()) != want.size())
                ++bad;
        }
        if (ids.size() > 1) seen.insert(ids);
    }
    return bad;
}

Verdict criterion6() {
    std::vector<std::string> bad;

    // PFC wave on a 4-chain: the root initiates in round 1. Snapshot reads give
    // 4 rounds down, 1 leaf turn, 3 up, and cleaning trails one level behind
    // the feedback so the root cleans in round 2*3 + 4.
    std::vector<PfcTag> chain(4, PfcTag::Clean);
    int rounds = 0;
    bool started = false;
    do {
        chain = pfc_round(chain, !started);
        started = true;
        ++rounds;
    } while (std::any_of(chain.begin(), chain.end(), [](PfcTag t) { return t != PfcTag::Clean; }) && rounds < 100);
    const int derived = 2 * 3 + 4;
    if (rounds != derived) bad.push_back("pfc wave took " + std::to_string(rounds));
    if (watchdog_limits(3).wave != derived) bad.push_back("wave limit mismatch");

    const auto plan = connect_followers({{9}, {2}, {7}, {5}});
    const bool pairs_ok = plan.pairs.size() == 2 && plan.pairs[0] == std::pair{FollowerRef{2}, FollowerRef{5}} &&
                          plan.pairs[1] == std::pair{FollowerRef{7}, FollowerRef{9}} && !plan.leftover;
    if (!pairs_ok) bad.push_back("connect_followers");

    HostState h;
    h.id = 1;
    h.last_reset_round = 6;
    if (reset_allowed(h, 7)) bad.push_back("guard allowed a consecutive reset");
    h.last_reset_round = 3;
    if (!reset_allowed(h, 7)) bad.push_back("guard blocked a legal reset");
    int consecutive = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto w = gen_random({TopologyKind::Chord, 8, std::nullopt}, all_hosts(8), seed, 1.0);
        std::set<NodeId> prev;
        for (int r = 0; r < 100; ++r) {
            std::set<NodeId> now;
            for (const auto& [id, _] : step(w).faults) now.insert(id);
            for (auto id : now) consecutive += prev.contains(id);
            prev = std::move(now);
        }
    }
    if (consecutive) bad.push_back(std::to_string(consecutive) + " consecutive resets in the engine");

    // Merges: in honest runs, every cluster whose hosts are all out of any
    // merge holds exactly ranges(N, its hosts). Each distinct multi-host
    // cluster seen this way is the result of a completed merge.
    std::set<std::vector<NodeId>> merged_sets;
    int merge_mismatch = 0;
    for (const auto kind : kFamilies) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto spec = sweep_spec(kind, 16, std::nullopt);
            auto w = init_world(spec, all_hosts(16), "singleton-line", seed);
            for (int r = 0; r < 1500 && !is_legal(w); ++r) {
                if (step(w).resets > 0) break;
                merge_mismatch += check_cluster_ranges(w, merged_sets);
            }
        }
    }
    const auto merges_checked = merged_sets.size();
    if (merge_mismatch) bad.push_back(std::to_string(merge_mismatch) + " merged hosts off their ranges");
    if (merges_checked == 0) bad.push_back("no merges observed");

    std::string detail = "pfc 4-chain wave " + std::to_string(rounds) + " rounds (derived " + std::to_string(derived) +
                         "); connect_followers {9,2,7,5} -> (2,5),(7,9); reset guard; " + std::to_string(merges_checked) +
                         " merges matched ranges(N, union)";
    for (const auto& b : bad) detail += "; BAD " + b;
    return {bad.empty(), detail};
}

Verdict criterion7(const std::string& cli) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / ("avatar_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    struct Case {
        std::string args;
    };
    const std::vector<Case> cases{
        {"--kind chord --n 16 --scenario random --corruption 0.7 --seed 42"},
        {"--kind skipchord --n 16 --skip 4 --hosts random:9:3 --scenario singleton-line --seed 7"},
        {"--kind cbt --n 8 --scenario forged-merge-rs --rs-bits 4 --seed 5"},
    };
    bool pass = true;
    std::size_t bytes = 0;
    int idx = 0;
    for (const auto& c : cases) {
        std::string text[2];
        for (int k = 0; k < 2; ++k) {
            const auto path = dir / ("t" + std::to_string(idx) + "_" + std::to_string(k) + ".jsonl");
            const auto cmd = "\"" + cli + "\" run " + c.args + " --out \"" + path.string() + "\" 2>/dev/null";
            if (std::system(cmd.c_str()) != 0) {
                pass = false;
                continue;
            }
            std::ifstream in(path, std::ios::binary);
            text[k].assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
        if (text[0].empty() || text[0] != text[1]) pass = false;
        bytes += text[0].size();
        ++idx;
    }
    fs::remove_all(dir);
    return {pass, std::to_string(cases.size()) + " configurations run twice through the CLI; traces " +
                      (pass ? "byte-identical" : "DIFFER or failed") + " (" + std::to_string(bytes) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <avatar-cli> [--only k]\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    int only = 0;
    if (argc >= 4 && std::string(argv[2]) == "--only") only = std::atoi(argv[3]);
    const auto want = [&](int k) { return only == 0 || only == k; };

    bool all = true;
    const auto report = [&](int k, const Verdict& v) {
        std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", k, v.detail.c_str());
        std::fflush(stdout);
        all = all && v.pass;
    };

    std::optional<C1Data> c1;
    if (want(1) || want(4) || want(5)) {
        const auto t0 = std::chrono::steady_clock::now();
        c1 = c1_runs();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (want(1)) report(1, criterion1(*c1, secs));
    }
    if (want(2)) report(2, criterion2());
    std::optional<ScaleData> sc;
    if (want(3) || want(4)) sc = c3_runs();
    if (want(3)) report(3, criterion3(*sc));
    if (want(4)) report(4, criterion4(*c1, *sc));
    if (want(5)) report(5, criterion5(*c1));
    if (want(6)) report(6, criterion6());
    if (want(7)) report(7, criterion7(cli));
    return all ? 0 : 1;
}
