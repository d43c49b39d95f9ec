#include "doctest.h"
#include "linkfp/errors.hpp"
#include "linkfp/linksim.hpp"
#include "ps_oracle.hpp"

#include <cmath>

using namespace linkfp;

namespace {

LinkConfig quiet_link(double capacity = 8.0) {
    LinkConfig link;
    link.capacity_bytes_per_us = capacity;
    link.launch_overhead_us = 0.0;
    link.noise_sigma_rel = 0.0;
    return link;
}

}  // namespace

TEST_CASE("allocate_rates follows weighted processor sharing") {
    SUBCASE("sole flow gets the full link") {
        const std::vector<Flow> flows{{1, FlowOwner::Probe, 100.0, 1.0}};
        const auto rates = allocate_rates(flows, 8.0);
        CHECK(rates[0] == doctest::Approx(8.0));
    }
    SUBCASE("two equal weights split evenly") {
        const std::vector<Flow> flows{{1, FlowOwner::Probe, 10.0, 1.0},
                                      {2, FlowOwner::Victim, 10.0, 1.0}};
        const auto rates = allocate_rates(flows, 8.0);
        CHECK(rates[0] == doctest::Approx(4.0));
        CHECK(rates[1] == doctest::Approx(4.0));
    }
    SUBCASE("weights 1:3 split 2:6") {
        const std::vector<Flow> flows{{1, FlowOwner::Probe, 10.0, 1.0},
                                      {2, FlowOwner::Victim, 10.0, 3.0}};
        const auto rates = allocate_rates(flows, 8.0);
        CHECK(rates[0] == doctest::Approx(2.0));
        CHECK(rates[1] == doctest::Approx(6.0));
    }
    SUBCASE("empty set yields empty map") {
        CHECK(allocate_rates({}, 8.0).empty());
    }
    SUBCASE("non-positive weight is an invalid flow") {
        const std::vector<Flow> flows{{1, FlowOwner::Probe, 10.0, 0.0}};
        CHECK_THROWS_AS(allocate_rates(flows, 8.0), ValidationError);
    }
}

TEST_CASE("advance processes completions in time order") {
    SUBCASE("empty flow set just moves the clock") {
        Timeline timeline(quiet_link());
        timeline.advance_to(10.0);
        CHECK(timeline.now() == 10.0);
        CHECK(timeline.active_flows().empty());
    }
    SUBCASE("single 80-byte flow completes at 10us") {
        Timeline timeline(quiet_link());
        timeline.enable_event_log();
        timeline.schedule(0.0, FlowOwner::Victim, 80.0);
        timeline.advance_to(50.0);
        REQUIRE(timeline.event_log().size() == 2);
        CHECK(timeline.event_log()[1].kind == LinkEvent::Kind::Completion);
        CHECK(timeline.event_log()[1].time_us == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("probe shares with an active victim flow") {
        // 1000 victim bytes active, 80-byte probe arrives: equal-share PS
        // gives the probe 4 bytes/us until it leaves at t=20.
        Timeline timeline(quiet_link());
        timeline.schedule(0.0, FlowOwner::Victim, 1000.0);
        const double elapsed = timeline.transfer(FlowOwner::Probe, 80.0);
        CHECK(elapsed == doctest::Approx(20.0).epsilon(1e-12));

        const auto oracle = psoracle::completion_times(
            {{0.0, 1000.0, 1.0}, {0.0, 80.0, 1.0}}, 8.0);
        CHECK(elapsed == doctest::Approx(oracle[1]).epsilon(1e-12));
    }
    SUBCASE("moving backwards is an internal error") {
        Timeline timeline(quiet_link());
        timeline.advance_to(5.0);
        CHECK_THROWS_AS(timeline.advance_to(1.0), InternalError);
    }
}

TEST_CASE("transfer returns elapsed simulated time") {
    SUBCASE("160 bytes on an idle 8-byte/us link takes 20us") {
        Timeline timeline(quiet_link());
        CHECK(timeline.transfer(FlowOwner::Probe, 160.0) == doctest::Approx(20.0));
    }
    SUBCASE("a saturating competitor doubles it") {
        Timeline timeline(quiet_link());
        timeline.schedule(0.0, FlowOwner::Victim, 1e9);
        CHECK(timeline.transfer(FlowOwner::Probe, 160.0) == doctest::Approx(40.0));
    }
    SUBCASE("back-to-back transfers see no history effect") {
        Timeline timeline(quiet_link());
        CHECK(timeline.transfer(FlowOwner::Probe, 80.0) == doctest::Approx(10.0));
        CHECK(timeline.transfer(FlowOwner::Probe, 80.0) == doctest::Approx(10.0));
    }
    SUBCASE("non-positive bytes rejected") {
        Timeline timeline(quiet_link());
        CHECK_THROWS_AS(timeline.transfer(FlowOwner::Probe, 0.0), ValidationError);
    }
}

TEST_CASE("noisy_duration") {
    SUBCASE("sigma zero is exact") {
        Rng rng(1);
        CHECK(noisy_duration(rng, 12.5, 0.0) == 12.5);
    }
    SUBCASE("deterministic under a fixed seed") {
        Rng a(77), b(77);
        for (int i = 0; i < 100; ++i)
            CHECK(noisy_duration(a, 10.0, 0.1) == noisy_duration(b, 10.0, 0.1));
    }
    SUBCASE("unbiased at MC precision") {
        Rng rng(5);
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) sum += noisy_duration(rng, 10.0, 0.1);
        CHECK(std::abs(sum / n - 10.0) < 0.02);
    }
    SUBCASE("clamped at 1% of the true duration") {
        Rng rng(5);
        double lowest = 1e300;
        for (int i = 0; i < 10000; ++i)
            lowest = std::min(lowest, noisy_duration(rng, 10.0, 0.5));
        CHECK(lowest >= 0.1);
    }
}

TEST_CASE("conservation: allocated rates sum to capacity") {
    Rng rng(11);
    for (int round = 0; round < 200; ++round) {
        const int k = 1 + static_cast<int>(rng.below(5));
        std::vector<Flow> flows;
        for (int i = 0; i < k; ++i)
            flows.push_back({static_cast<FlowId>(i), FlowOwner::Victim,
                             rng.uniform(1.0, 100.0), rng.uniform(0.1, 5.0)});
        const double capacity = rng.uniform(1.0, 50.0);
        const auto rates = allocate_rates(flows, capacity);
        double sum = 0.0;
        for (double r : rates) {
            CHECK(r > 0.0);
            sum += r;
        }
        CHECK(sum == doctest::Approx(capacity).epsilon(1e-12));
    }
}

TEST_CASE("monotone contention: extra flow never speeds anyone up") {
    Rng rng(13);
    for (int round = 0; round < 100; ++round) {
        std::vector<psoracle::OracleFlow> base;
        const int k = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < k; ++i)
            base.push_back({rng.uniform(0.0, 30.0), rng.uniform(1.0, 200.0), 1.0});

        auto loaded = base;
        loaded.push_back({rng.uniform(0.0, 30.0), rng.uniform(1.0, 200.0), 1.0});

        const auto t_base = psoracle::completion_times(base, 8.0);
        const auto t_loaded = psoracle::completion_times(loaded, 8.0);
        for (int i = 0; i < k; ++i) CHECK(t_loaded[i] >= t_base[i] - 1e-9);
    }
}

TEST_CASE("determinism: identical schedule gives identical event logs") {
    const auto run = [] {
        Timeline timeline(quiet_link());
        timeline.enable_event_log();
        timeline.schedule(0.0, FlowOwner::Victim, 123.0);
        timeline.schedule(4.0, FlowOwner::Victim, 77.0);
        timeline.schedule(4.0, FlowOwner::Probe, 30.0, 2.0);
        timeline.advance_to(1000.0);
        return timeline.event_log();
    };
    const auto a = run(), b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time_us == b[i].time_us);  // bit-identical
        CHECK(a[i].flow == b[i].flow);
        CHECK(a[i].kind == b[i].kind);
        CHECK(a[i].bytes_remaining == b[i].bytes_remaining);
    }
}

TEST_CASE("event log times are non-decreasing") {
    Timeline timeline(quiet_link());
    timeline.enable_event_log();
    Rng rng(17);
    for (int i = 0; i < 50; ++i)
        timeline.schedule(rng.uniform(0.0, 500.0), FlowOwner::Victim, rng.uniform(1.0, 50.0));
    timeline.advance_to(10000.0);
    const auto& log = timeline.event_log();
    REQUIRE(log.size() == 100);
    for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i].time_us >= log[i - 1].time_us);
}

TEST_CASE("event-driven completions match the closed-form PS oracle") {
    Rng rng(19);
    for (int round = 0; round < 200; ++round) {
        const int k = 1 + static_cast<int>(rng.below(4));
        std::vector<psoracle::OracleFlow> scenario;
        for (int i = 0; i < k; ++i)
            scenario.push_back({rng.uniform(0.0, 40.0), rng.uniform(0.5, 400.0),
                                rng.uniform(0.2, 4.0)});
        std::sort(scenario.begin(), scenario.end(),
                  [](const auto& a, const auto& b) { return a.arrival < b.arrival; });

        Timeline timeline(quiet_link());
        timeline.enable_event_log();
        for (const auto& f : scenario)
            timeline.schedule(f.arrival, FlowOwner::Victim, f.bytes, f.weight);
        timeline.advance_to(1e9);

        // Arrival order maps flow ids onto scenario order.
        std::vector<double> done(scenario.size(), -1.0);
        std::vector<FlowId> id_of;
        for (const auto& e : timeline.event_log())
            if (e.kind == LinkEvent::Kind::Arrival) id_of.push_back(e.flow);
        for (const auto& e : timeline.event_log()) {
            if (e.kind != LinkEvent::Kind::Completion) continue;
            for (std::size_t s = 0; s < id_of.size(); ++s)
                if (id_of[s] == e.flow) done[s] = e.time_us;
        }

        const auto expected = psoracle::completion_times(scenario, 8.0);
        for (std::size_t i = 0; i < scenario.size(); ++i) {
            REQUIRE(done[i] >= 0.0);
            CHECK(std::abs(done[i] - expected[i]) <=
                  1e-9 * std::max(1.0, std::abs(expected[i])));
        }
    }
}
