#include "avatar/metrics.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

namespace avatar {

std::int32_t external_edge_count(const GuestGraph& g, NodeId lo, NodeId hi) {
    if (lo < 0 || lo >= hi || hi > g.n) throw std::invalid_argument("external_edge_count: invalid interval");
    std::int32_t count = 0;
    for (const auto& [a, b] : g.edges) {
        const bool in_a = a >= lo && a < hi;
        const bool in_b = b >= lo && b < hi;
        if (in_a != in_b) ++count;
    }
    return count;
}

std::int32_t max_degree_embedding_bruteforce(const GuestGraph& g) {
    if (g.n > kBruteForceMaxN)
        throw std::invalid_argument("brute-force maximum degree of embedding is limited to N <= 16");
    const auto n = static_cast<std::uint32_t>(g.n);
    std::int32_t best = 0;
    std::vector<std::uint32_t> owner(n);
    std::vector<std::uint32_t> nbr(n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        // owner[x] = largest member <= x, or the smallest member when none is.
        const auto first = static_cast<std::uint32_t>(std::countr_zero(mask));
        std::uint32_t current = first;
        for (std::uint32_t x = 0; x < n; ++x) {
            if (mask & (1u << x)) current = x;
            owner[x] = current;
        }
        std::fill(nbr.begin(), nbr.end(), 0u);
        std::uint32_t prev = first;
        for (std::uint32_t x = first + 1; x < n; ++x) {
            if (mask & (1u << x)) {
                nbr[prev] |= 1u << x;
                nbr[x] |= 1u << prev;
                prev = x;
            }
        }
        for (const auto& [a, b] : g.edges) {
            const auto ha = owner[static_cast<std::uint32_t>(a)];
            const auto hb = owner[static_cast<std::uint32_t>(b)];
            if (ha != hb) {
                nbr[ha] |= 1u << hb;
                nbr[hb] |= 1u << ha;
            }
        }
        for (std::uint32_t h = 0; h < n; ++h) best = std::max(best, std::popcount(nbr[h]));
    }
    return best;
}

std::int32_t isolated_range_degree(const GuestGraph& g, NodeId lo, NodeId hi) {
    if (lo < 0 || lo >= hi || hi > g.n) throw std::invalid_argument("isolated_range_degree: invalid interval");
    std::set<NodeId> neighbours;
    if (lo > 0) neighbours.insert(lo - 1);
    if (hi < g.n) neighbours.insert(hi);
    for (const auto& [a, b] : g.edges) {
        const bool in_a = a >= lo && a < hi;
        const bool in_b = b >= lo && b < hi;
        if (in_a && !in_b) neighbours.insert(b);
        if (in_b && !in_a) neighbours.insert(a);
    }
    // Ids below lo are singletons except that host 0 owns [0, 1) either way.
    return static_cast<std::int32_t>(neighbours.size());
}

DeltaBounds max_degree_embedding_bounds(const GuestGraph& g) {
    DeltaBounds out;
    std::int32_t max_external = 0;
    for (NodeId lo = 0; lo < g.n; ++lo) {
        for (NodeId hi = lo + 1; hi <= g.n; ++hi) {
            out.lower = std::max(out.lower, isolated_range_degree(g, lo, hi));
            max_external = std::max(max_external, external_edge_count(g, lo, hi));
        }
    }
    out.upper = std::min<std::int32_t>(g.n - 1, max_external + 2);
    return out;
}

TopologyMetrics topology_metrics(const GuestGraph& g, bool exact_delta) {
    TopologyMetrics m;
    m.diameter = diameter(g);
    m.tree_depth = spanning_tree(g).max_depth();
    const auto bounds = max_degree_embedding_bounds(g);
    m.delta_lower = bounds.lower;
    m.delta_upper = bounds.upper;
    if (exact_delta && g.n <= kBruteForceMaxN) m.delta_exact = max_degree_embedding_bruteforce(g);
    return m;
}

double degree_expansion(std::span<const std::int32_t> max_degrees, std::size_t converged_at) {
    if (max_degrees.empty()) throw std::invalid_argument("degree_expansion: empty trace");
    if (converged_at >= max_degrees.size()) throw std::invalid_argument("degree_expansion: converged_at outside trace");
    const auto peak = *std::max_element(max_degrees.begin(), max_degrees.begin() + static_cast<std::ptrdiff_t>(converged_at) + 1);
    const auto base = std::max(max_degrees.front(), max_degrees[converged_at]);
    if (base == 0) return peak == 0 ? 1.0 : static_cast<double>(peak);
    return static_cast<double>(peak) / static_cast<double>(base);
}

double degree_expansion(std::span<const TraceRecord> trace, std::int64_t converged_at) {
    std::vector<std::int32_t> degrees;
    degrees.reserve(trace.size());
    for (const auto& r : trace) degrees.push_back(r.max_host_degree);
    if (converged_at < 0) throw std::invalid_argument("degree_expansion: negative round");
    return degree_expansion(degrees, static_cast<std::size_t>(converged_at));
}

std::optional<std::size_t> convergence_round(std::span<const bool> legal) {
    if (legal.empty() || !legal.back()) return std::nullopt;
    std::size_t r = legal.size() - 1;
    while (r > 0 && legal[r - 1]) --r;
    return r;
}

std::optional<std::int64_t> convergence_round(std::span<const TraceRecord> trace) {
    if (trace.empty() || !trace.back().legal) return std::nullopt;
    std::size_t i = trace.size() - 1;
    while (i > 0 && trace[i - 1].legal) --i;
    return trace[i].round;
}

RunMetrics run_metrics(std::span<const TraceRecord> trace, bool converged) {
    RunMetrics m;
    if (trace.empty()) return m;
    std::size_t end = trace.size() - 1;
    if (converged) {
        m.convergence_rounds = convergence_round(trace);
        if (m.convergence_rounds) end = static_cast<std::size_t>(*m.convergence_rounds - trace.front().round);
    }
    m.initial_degree = trace.front().max_host_degree;
    m.final_degree = trace[end].max_host_degree;
    for (std::size_t i = 0; i <= end; ++i) m.peak_degree = std::max(m.peak_degree, trace[i].max_host_degree);
    m.degree_expansion = degree_expansion(trace, static_cast<std::int64_t>(end));
    return m;
}

}  // namespace avatar
