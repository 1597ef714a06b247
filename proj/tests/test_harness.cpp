#include "avatar/harness.hpp"

#include <doctest.h>

#include <algorithm>

using namespace avatar;

TEST_SUITE("harness") {
    TEST_CASE("median") {
        CHECK(median({3.0, 1.0, 2.0}) == 2.0);
        CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
        CHECK_THROWS_AS(median({}), std::invalid_argument);
    }

    TEST_CASE("csv") {
        CHECK(std::string(kCsvHeader) == "kind,n,s,seed,scenario,converged,rounds,peak_degree,degree_expansion");
        RunRow r;
        r.kind = TopologyKind::SkipChord;
        r.n = 16;
        r.skip = 4;
        r.seed = 3;
        r.scenario = "random";
        r.converged = true;
        r.rounds = 120;
        r.peak_degree = 7;
        r.degree_expansion = 1.75;
        const auto line = csv_row(r);
        CHECK(std::count(line.begin(), line.end(), ',') == 8);
        CHECK(line.find(",16,4,3,random,true,120,7,1.75") != std::string::npos);
        r.converged = false;
        r.rounds.reset();
        CHECK(csv_row(r).find(",false,,7,") != std::string::npos);
    }

    TEST_CASE("sweep skip defaults and host subsets") {
        CHECK(sweep_spec(TopologyKind::SkipChord, 16, std::nullopt).skip == 4);
        CHECK_FALSE(sweep_spec(TopologyKind::Cbt, 16, std::nullopt).skip);
        const auto hs = random_hosts(16, 5, 9);
        CHECK(hs.size() == 5u);
        CHECK(random_hosts(16, 5, 9) == hs);
        CHECK_THROWS(random_hosts(16, 0, 1));
    }

    TEST_CASE("sweep is reproducible and order independent") {
        SweepConfig cfg;
        cfg.kind = TopologyKind::Cbt;
        cfg.n_list = {8};
        cfg.seeds = {1, 2, 3, 4};
        cfg.threads = 3;
        const auto a = sweep(cfg);
        cfg.threads = 1;
        const auto b = sweep(cfg);
        REQUIRE(a.rows.size() == 4u);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(csv_row(a.rows[i]) == csv_row(b.rows[i]));
            CHECK(a.rows[i].seed == cfg.seeds[i]);
        }
        REQUIRE(a.sizes.size() == 1u);
        const auto& s = a.sizes[0];
        CHECK(s.runs == 4);
        CHECK(s.diameter == 5);
        CHECK(s.delta_hat == max_degree_embedding_bruteforce(build_topology({TopologyKind::Cbt, 8, std::nullopt})));
        if (s.median_rounds) CHECK(*s.c_time == doctest::Approx(*s.median_rounds / (5.0 * 3.0)));
    }

    TEST_CASE("table1") {
        const auto t8 = report_table1(8);
        REQUIRE(t8.size() == 4u);
        CHECK(t8[0].kind == TopologyKind::Linear);
        CHECK(t8[0].metrics.diameter == 7);
        CHECK(t8[0].metrics.delta_exact == std::optional<std::int32_t>{2});

        const auto t16 = report_table1(16);
        CHECK(t16[2].kind == TopologyKind::Chord);
        CHECK(*t16[2].metrics.delta_exact >= 8);
        CHECK(t16[3].kind == TopologyKind::SkipChord);
        CHECK(t16[3].skip == 2);
        CHECK(t16[3].metrics.diameter <= 2 * 16);
        CHECK(*t16[3].metrics.delta_exact <= 6);
    }
}
