// Command-line front end: topology, embed, metrics, run, sweep, table1.
#include "avatar/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

using nlohmann::ordered_json;
using namespace avatar;

namespace {

struct TopoArgs {
    std::string kind = "linear";
    NodeId n = 8;
    std::optional<NodeId> skip;

    void attach(CLI::App* app) {
        app->add_option("--kind", kind, "linear|cbt|chord|skipchord")->required();
        app->add_option("--n", n, "number of guest nodes")->required();
        app->add_option("--skip", skip, "SkipChord skip factor");
    }

    [[nodiscard]] TopologySpec spec() const {
        TopologySpec s{parse_topology_kind(kind), n, skip};
        s.validate();
        return s;
    }
};

ordered_json edges_json(const std::vector<Edge>& edges) {
    auto out = ordered_json::array();
    for (const auto& [a, b] : edges) out.push_back({a, b});
    return out;
}

ordered_json spec_json(const TopologySpec& s) {
    ordered_json j;
    j["kind"] = std::string(to_string(s.kind));
    j["n"] = s.n;
    j["s"] = s.skip ? ordered_json(*s.skip) : ordered_json(nullptr);
    return j;
}

ordered_json metrics_json(const TopologySpec& spec, const TopologyMetrics& m) {
    auto j = spec_json(spec);
    j["diameter"] = m.diameter;
    j["tree_depth"] = m.tree_depth;
    j["delta_exact"] = m.delta_exact ? ordered_json(*m.delta_exact) : ordered_json(nullptr);
    j["delta_lower"] = m.delta_lower;
    j["delta_upper"] = m.delta_upper;
    return j;
}

std::vector<NodeId> parse_list(const std::string& text) {
    std::vector<NodeId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const long v = std::stol(item, &used);
        if (used != item.size()) throw std::invalid_argument("not an integer: " + item);
        out.push_back(static_cast<NodeId>(v));
    }
    return out;
}

/// "all", "0,3,5" or "random:m:seed".
HostSet parse_hosts(const std::string& text, NodeId n) {
    if (text.empty() || text == "all") {
        std::vector<NodeId> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        return {all, n};
    }
    if (text.rfind("random:", 0) == 0) {
        const auto rest = text.substr(7);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("expected random:m:seed");
        return random_hosts(n, static_cast<NodeId>(std::stol(rest.substr(0, colon))),
                            std::stoull(rest.substr(colon + 1)));
    }
    return {parse_list(text), n};
}

ordered_json trace_json(const TraceRecord& r) {
    ordered_json j;
    j["round"] = r.round;
    j["cluster_count"] = r.cluster_count;
    j["max_host_degree"] = r.max_host_degree;
    j["weakly_connected"] = r.weakly_connected;
    j["legal"] = r.legal;
    j["resets_this_round"] = r.resets_this_round;
    j["merges_completed"] = r.merges_completed;
    j["digest_bytes"] = r.digest_bytes;
    return j;
}

ordered_json size_json(const SizeSummary& s) {
    const auto opt = [](const auto& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json j;
    j["n"] = s.n;
    j["runs"] = s.runs;
    j["converged"] = s.converged;
    j["disconnected"] = s.disconnected;
    j["diameter"] = s.diameter;
    j["delta_hat"] = s.delta_hat;
    j["median_rounds"] = opt(s.median_rounds);
    j["max_rounds"] = opt(s.max_rounds);
    j["median_expansion"] = opt(s.median_expansion);
    j["max_expansion"] = opt(s.max_expansion);
    j["max_peak_degree"] = s.max_peak_degree;
    j["c_time"] = opt(s.c_time);
    j["c_deg"] = opt(s.c_deg);
    j["c_peak"] = s.c_peak;
    return j;
}

ordered_json table1_json(NodeId n) {
    auto rows = ordered_json::array();
    for (const auto& r : report_table1(n)) {
        auto j = metrics_json({r.kind, n, r.skip}, r.metrics);
        j["diameter_form"] = r.diameter_form;
        j["delta_form"] = r.delta_form;
        rows.push_back(std::move(j));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Avatar overlay simulator"};
    app.require_subcommand(1);

    TopoArgs topo_args;
    std::string emit = "edges";
    auto* topo = app.add_subcommand("topology", "print a guest graph as JSON");
    topo_args.attach(topo);
    topo->add_option("--emit", emit, "edges|tree|metrics")->check(CLI::IsMember({"edges", "tree", "metrics"}));
    topo->callback([&] {
        const auto spec = topo_args.spec();
        const auto g = build_topology(spec);
        const auto t = spanning_tree(g);
        auto j = spec_json(spec);
        if (emit == "edges") j["edges"] = edges_json(g.edges);
        if (emit == "tree") j["parent"] = t.parent;
        if (emit == "metrics") j["delta_bounds"] = {max_degree_embedding_bounds(g).lower, max_degree_embedding_bounds(g).upper};
        j["diameter"] = diameter(g);
        j["tree_depth"] = t.max_depth();
        std::cout << j.dump() << '\n';
    });

    TopoArgs embed_args;
    std::string embed_hosts;
    auto* embed = app.add_subcommand("embed", "print Avatar(N, V) for a host list");
    embed_args.attach(embed);
    embed->add_option("--hosts", embed_hosts, "comma-separated host ids, random:m:seed or all")->required();
    embed->callback([&] {
        const auto spec = embed_args.spec();
        const auto g = build_topology(spec);
        const auto hosts = parse_hosts(embed_hosts, spec.n);
        const auto hg = build_avatar(g, hosts);
        auto j = spec_json(spec);
        auto rs = ordered_json::array();
        for (const auto& r : ranges(spec.n, hosts).ranges) rs.push_back({{"host", r.host}, {"lo", r.lo}, {"hi", r.hi}});
        j["ranges"] = std::move(rs);
        j["edges"] = edges_json(hg.edge_pairs());
        j["max_host_degree"] = hg.max_degree();
        std::cout << j.dump() << '\n';
    });

    TopoArgs metric_args;
    bool exact_delta = false;
    bool table1_mode = false;
    auto* metrics = app.add_subcommand("metrics", "diameter and maximum degree of embedding");
    metrics->add_option("--kind", metric_args.kind, "linear|cbt|chord|skipchord");
    metrics->add_option("--n", metric_args.n, "number of guest nodes")->required();
    metrics->add_option("--skip", metric_args.skip, "SkipChord skip factor");
    metrics->add_flag("--exact-delta", exact_delta, "brute-force the maximum degree of embedding (N <= 16)");
    metrics->add_flag("--table1", table1_mode, "all four families at this N");
    metrics->callback([&] {
        if (table1_mode) {
            std::cout << table1_json(metric_args.n).dump() << '\n';
            return;
        }
        const auto spec = metric_args.spec();
        std::cout << metrics_json(spec, topology_metrics(build_topology(spec), exact_delta)).dump() << '\n';
    });

    TopoArgs run_args;
    std::string hosts_text = "all";
    std::string scenario = "singleton-line";
    double corruption = 0.5;
    std::uint64_t seed = 1;
    std::optional<std::int64_t> max_rounds;
    std::int32_t rs_bits = 0;
    std::string out_path;
    auto* run_cmd = app.add_subcommand("run", "simulate one configuration and write a JSONL trace");
    run_args.attach(run_cmd);
    run_cmd->add_option("--hosts", hosts_text, "comma-separated ids, random:m:seed or all");
    run_cmd->add_option("--scenario", scenario, "initial configuration");
    run_cmd->add_option("--corruption", corruption, "forging probability for the random scenario")
        ->check(CLI::Range(0.0, 1.0));
    run_cmd->add_option("--seed", seed, "master seed");
    run_cmd->add_option("--max-rounds", max_rounds, "round budget (default 50*D*log2 N)");
    run_cmd->add_option("--rs-bits", rs_bits, "length of the shared random sequence (default 2*log2 N)");
    run_cmd->add_option("--out", out_path, "trace file (JSON Lines); stdout when omitted");
    run_cmd->callback([&] {
        const auto spec = run_args.spec();
        const auto hosts = parse_hosts(hosts_text, spec.n);
        ScenarioOptions options;
        options.corruption = corruption;
        options.engine.rs_bits = rs_bits;
        World world = init_world(spec, hosts, scenario, seed, options);
        const auto budget = max_rounds ? *max_rounds : default_round_budget(world);
        ordered_json header = spec_json(spec);
        header["hosts"] = std::vector<NodeId>(hosts.ids().begin(), hosts.ids().end());
        header["scenario"] = scenario;
        header["corruption"] = corruption;
        header["seed"] = seed;
        header["max_rounds"] = budget;
        header["rs_bits"] = world.rs_bits;
        header["short_polls"] = world.constants.short_polls;
        header["long_polls"] = world.constants.long_polls;
        header["closure_window"] = 10 * world.diameter;
        const auto result = run(std::move(world), {budget, -1});

        std::ofstream file;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file) throw std::runtime_error("cannot open " + out_path);
        }
        std::ostream& os = out_path.empty() ? std::cout : file;
        os << ordered_json{{"config", header}}.dump() << '\n';
        for (const auto& r : result.trace) os << trace_json(r).dump() << '\n';

        ordered_json summary;
        summary["converged"] = result.converged;
        summary["convergence_rounds"] =
            result.metrics.convergence_rounds ? ordered_json(*result.metrics.convergence_rounds) : ordered_json(nullptr);
        summary["degree_expansion"] = result.metrics.degree_expansion;
        summary["peak_degree"] = result.metrics.peak_degree;
        summary["disconnected"] = result.disconnected;
        std::cerr << summary.dump() << '\n';
    });

    TopoArgs sweep_args;
    std::string n_list_text = "8,16";
    std::string seeds_text = "1-20";
    std::string sweep_hosts;
    std::string csv_path;
    std::string sweep_scenario = "singleton-line";
    double sweep_corruption = 0.5;
    std::optional<std::int64_t> sweep_max_rounds;
    std::int32_t sweep_rs_bits = 0;
    unsigned threads = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "seed sweep over several N");
    sweep_cmd->add_option("--kind", sweep_args.kind, "linear|cbt|chord|skipchord")->required();
    sweep_cmd->add_option("--skip", sweep_args.skip, "SkipChord skip factor (default log2 N)");
    sweep_cmd->add_option("--n-list", n_list_text, "comma-separated N values");
    sweep_cmd->add_option("--seeds", seeds_text, "a-b range or comma-separated list");
    sweep_cmd->add_option("--hosts", sweep_hosts, "host count per run (random subset); all of [N] when omitted");
    sweep_cmd->add_option("--scenario", sweep_scenario, "initial configuration");
    sweep_cmd->add_option("--corruption", sweep_corruption, "forging probability for the random scenario")
        ->check(CLI::Range(0.0, 1.0));
    sweep_cmd->add_option("--max-rounds", sweep_max_rounds, "round budget per run");
    sweep_cmd->add_option("--rs-bits", sweep_rs_bits, "length of the shared random sequence");
    sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    sweep_cmd->add_option("--csv", csv_path, "per-run CSV output");
    sweep_cmd->callback([&] {
        SweepConfig cfg;
        cfg.kind = parse_topology_kind(sweep_args.kind);
        cfg.skip = sweep_args.skip;
        cfg.n_list = parse_list(n_list_text);
        if (const auto dash = seeds_text.find('-'); dash != std::string::npos) {
            const auto lo = std::stoull(seeds_text.substr(0, dash));
            const auto hi = std::stoull(seeds_text.substr(dash + 1));
            for (auto s = lo; s <= hi; ++s) cfg.seeds.push_back(s);
        } else {
            for (const auto s : parse_list(seeds_text)) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
        if (!sweep_hosts.empty() && sweep_hosts != "all") cfg.host_count = static_cast<NodeId>(std::stol(sweep_hosts));
        cfg.scenario = sweep_scenario;
        cfg.corruption = sweep_corruption;
        cfg.max_rounds = sweep_max_rounds;
        cfg.engine.rs_bits = sweep_rs_bits;
        cfg.threads = threads;
        const auto result = sweep(cfg);
        if (!csv_path.empty()) {
            std::ofstream csv(csv_path);
            if (!csv) throw std::runtime_error("cannot open " + csv_path);
            csv << kCsvHeader << '\n';
            for (const auto& r : result.rows) csv << csv_row(r) << '\n';
        }
        auto sizes = ordered_json::array();
        for (const auto& s : result.sizes) sizes.push_back(size_json(s));
        std::cout << ordered_json{{"kind", sweep_args.kind}, {"scenario", sweep_scenario}, {"sizes", sizes}}.dump(2)
                  << '\n';
    });

    NodeId table_n = 16;
    auto* table1 = app.add_subcommand("table1", "diameter and maximum degree of embedding for all four families");
    table1->add_option("--n", table_n, "number of guest nodes")->required();
    table1->callback([&] { std::cout << table1_json(table_n).dump(2) << '\n'; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
