#include "avatar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace avatar {

TopologySpec sweep_spec(TopologyKind kind, NodeId n, std::optional<NodeId> skip) {
    TopologySpec spec{kind, n, std::nullopt};
    if (kind == TopologyKind::SkipChord) spec.skip = skip ? *skip : log2_exact(n);
    spec.validate();
    return spec;
}

HostSet random_hosts(NodeId n, NodeId count, std::uint64_t seed) {
    if (count < 1 || count > n) throw std::invalid_argument("host count must lie in [1, N]");
    std::vector<NodeId> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(splitmix64(seed ^ 0x8cb92ba72f3d8dd7ULL));
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(static_cast<std::size_t>(count));
    return {ids, n};
}

std::int32_t delta_hat(const GuestGraph& g) {
    if (g.n <= kBruteForceMaxN) return max_degree_embedding_bruteforce(g);
    return max_degree_embedding_bounds(g).upper;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty list");
    std::sort(values.begin(), values.end());
    const auto mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

RunRow run_row(const SweepConfig& config, NodeId n, std::uint64_t seed) {
    const auto spec = sweep_spec(config.kind, n, config.skip);
    std::vector<NodeId> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const HostSet hosts = config.host_count ? random_hosts(n, *config.host_count, seed) : HostSet(all, n);
    ScenarioOptions options;
    options.corruption = config.corruption;
    options.engine = config.engine;
    World world = init_world(spec, hosts, config.scenario, seed, options);
    const auto budget = config.max_rounds ? *config.max_rounds : default_round_budget(world);
    const auto result = run(std::move(world), {budget, -1});

    RunRow row;
    row.kind = config.kind;
    row.n = n;
    row.skip = spec.skip;
    row.seed = seed;
    row.scenario = config.scenario;
    row.converged = result.converged;
    row.rounds = result.metrics.convergence_rounds;
    row.peak_degree = result.metrics.peak_degree;
    row.degree_expansion = result.metrics.degree_expansion;
    row.disconnected = result.disconnected;
    for (const auto& t : result.trace) row.resets += t.resets_this_round;
    return row;
}

SizeSummary summarize(NodeId n, const TopologySpec& spec, const std::vector<RunRow>& rows) {
    const auto g = build_topology(spec);
    SizeSummary s;
    s.n = n;
    s.diameter = diameter(g);
    s.delta_hat = delta_hat(g);
    std::vector<double> rounds;
    std::vector<double> expansion;
    for (const auto& r : rows) {
        if (r.n != n) continue;
        ++s.runs;
        if (r.disconnected) ++s.disconnected;
        if (!r.converged) continue;
        ++s.converged;
        rounds.push_back(static_cast<double>(*r.rounds));
        expansion.push_back(r.degree_expansion);
        s.max_peak_degree = std::max(s.max_peak_degree, r.peak_degree);
        s.max_rounds = std::max(s.max_rounds.value_or(0), *r.rounds);
    }
    const double lg = std::max(1, ceil_log2(n));
    if (!rounds.empty()) {
        s.median_rounds = median(rounds);
        s.median_expansion = median(expansion);
        s.max_expansion = *std::max_element(expansion.begin(), expansion.end());
        s.c_time = *s.median_rounds / (s.diameter * lg);
        s.c_deg = *s.median_expansion / (s.delta_hat * lg);
    }
    s.c_peak = s.max_peak_degree / (s.delta_hat * lg);
    return s;
}

SweepResult sweep(const SweepConfig& config) {
    if (config.n_list.empty() || config.seeds.empty()) throw std::invalid_argument("sweep needs N values and seeds");
    std::vector<std::pair<NodeId, std::uint64_t>> jobs;
    for (const auto n : config.n_list) {
        sweep_spec(config.kind, n, config.skip);  // reject bad sizes before any run starts
        for (const auto seed : config.seeds) jobs.emplace_back(n, seed);
    }

    SweepResult out;
    out.rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (auto i = next++; i < jobs.size(); i = next++) {
            try {
                out.rows[i] = run_row(config, jobs[i].first, jobs[i].second);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto count = std::min<std::size_t>(config.threads ? config.threads : hw, jobs.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);

    for (const auto n : config.n_list) out.sizes.push_back(summarize(n, sweep_spec(config.kind, n, config.skip), out.rows));
    return out;
}

std::string csv_row(const RunRow& row) {
    std::ostringstream os;
    os << to_string(row.kind) << ',' << row.n << ',';
    if (row.skip) os << *row.skip;
    os << ',' << row.seed << ',' << row.scenario << ',' << (row.converged ? "true" : "false") << ',';
    if (row.rounds) os << *row.rounds;
    os << ',' << row.peak_degree << ',' << row.degree_expansion;
    return os.str();
}

std::vector<Table1Row> report_table1(NodeId n) {
    std::vector<Table1Row> out;
    const bool exact = n <= kBruteForceMaxN;
    const auto add = [&](TopologyKind kind, std::optional<NodeId> skip, std::string dform, std::string aform) {
        const TopologySpec spec{kind, n, skip};
        out.push_back({kind, skip, topology_metrics(build_topology(spec), exact), std::move(dform), std::move(aform)});
    };
    add(TopologyKind::Linear, std::nullopt, "O(N)", "O(1)");
    add(TopologyKind::Cbt, std::nullopt, "O(log N)", "O(log N)");
    add(TopologyKind::Chord, std::nullopt, "O(log N)", "O(N)");
    add(TopologyKind::SkipChord, 2, "O(s log^2 N)", "O(N / (s log N))");
    return out;
}

}  // namespace avatar
