#include "avatar/embedding.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace avatar;

namespace {
HostSet hs(std::vector<NodeId> v, NodeId n) { return {std::move(v), n}; }

std::vector<NodeId> chord_worst(NodeId n) {
    std::vector<NodeId> v{0};
    for (NodeId x = n / 2; x < n; ++x) v.push_back(x);
    return v;
}
}  // namespace

TEST_SUITE("embedding") {
    TEST_CASE("ranges") {
        const auto r = ranges(8, hs({0, 3, 5}, 8));
        REQUIRE(r.ranges.size() == 3);
        CHECK(r.range_of(0) == Range{0, 0, 3});
        CHECK(r.range_of(3) == Range{3, 3, 5});
        CHECK(r.range_of(5) == Range{5, 5, 8});
        CHECK(ranges(8, hs({5}, 8)).range_of(5) == Range{5, 0, 8});

        const auto w = ranges(16, hs(chord_worst(16), 16));
        CHECK(w.range_of(0) == Range{0, 0, 8});
        for (NodeId h = 8; h < 16; ++h) CHECK(w.range_of(h) == Range{h, h, h + 1});
    }

    TEST_CASE("host_of") {
        const auto r = ranges(8, hs({0, 3, 5}, 8));
        CHECK(host_of(r, 4) == 3);
        CHECK(host_of(r, 0) == 0);
        CHECK(host_of(ranges(8, hs({5}, 8)), 2) == 5);
    }

    TEST_CASE("build_avatar") {
        const auto line = build_topology({TopologyKind::Linear, 8, std::nullopt});
        CHECK(build_avatar(line, hs({0, 3, 5}, 8)).edge_pairs() == std::vector<Edge>{{0, 3}, {3, 5}});
        CHECK(build_avatar(line, hs({4}, 8)).edges.empty());

        const auto chord = build_topology({TopologyKind::Chord, 16, std::nullopt});
        const auto worst = build_avatar(chord, hs(chord_worst(16), 16));
        CHECK(worst.degree(0) == 8);
    }

    TEST_CASE("build_avatar against a direct oracle") {
        // Host pairs of every guest edge crossing ranges plus consecutive hosts.
        const auto g = build_topology({TopologyKind::SkipChord, 16, 2});
        for (const auto& v : {std::vector<NodeId>{1, 2, 9}, std::vector<NodeId>{0, 5, 6, 7, 15}, chord_worst(16)}) {
            const HostSet h(v, 16);
            const auto rm = ranges(16, h);
            std::set<Edge> oracle;
            for (std::size_t i = 0; i + 1 < v.size(); ++i) oracle.insert({v[i], v[i + 1]});
            for (const auto& [a, b] : g.edges) {
                const auto x = host_of(rm, a);
                const auto y = host_of(rm, b);
                if (x != y) oracle.insert({std::min(x, y), std::max(x, y)});
            }
            const auto got = build_avatar(g, h).edge_pairs();
            CHECK(std::set<Edge>(got.begin(), got.end()) == oracle);
        }
    }

    TEST_CASE("is_legal_embedding") {
        const auto line = build_topology({TopologyKind::Linear, 8, std::nullopt});
        const HostSet v({0, 3, 5}, 8);
        auto edges = build_avatar(line, v).edge_pairs();
        CHECK(is_legal_embedding(edges, line, v));
        edges.push_back({0, 5});
        CHECK_FALSE(is_legal_embedding(normalize_edges(edges), line, v));

        const auto chord = build_topology({TopologyKind::Chord, 16, std::nullopt});
        const HostSet w(chord_worst(16), 16);
        auto ce = build_avatar(chord, w).edge_pairs();
        std::erase(ce, Edge{0, 15});
        CHECK_FALSE(is_legal_embedding(ce, chord, w));
    }
}
