#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rampsim/env.hpp"
#include "rampsim/text_record.hpp"
#include "support.hpp"

using namespace rampsim;
using namespace rampsim::testing;

namespace {

SimConfig small_sim(int beta_h = 100) {
    SimConfig cfg;
    cfg.cluster = cluster_config({4, 4, 2});
    cfg.inter_arrival = 1000.0;
    cfg.num_iterations = 50;
    cfg.max_wallclock = 10000.0;
    cfg.beta = BetaSpec::constant(beta_h);
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_CASE("arrivals come every inter-arrival until the horizon") {
    Simulator sim(small_sim(), JobCatalog::uniform({chain({1.0}, 0.0)}));
    CHECK(sim.now() == to_nanos(1000.0));
    REQUIRE(sim.pending());
    CHECK(sim.pending()->arrival == to_nanos(1000.0));
    int decisions = 0;
    while (!sim.done()) {
        sim.apply_action(1);
        ++decisions;
        sim.next_decision();
    }
    CHECK(decisions == 9);  // 1000 .. 9000 s; 10000 s is the horizon itself
    CHECK(sim.now() == to_nanos(10000.0));
    CHECK(sim.metrics().jobs_arrived == 9);
    CHECK(sim.metrics().elapsed == 10000.0);
}

TEST_CASE("a job finishing between arrivals is released before the next decision") {
    // 10 s compute, 50 iterations: 500 s job accepted at t=1000.
    Simulator sim(small_sim(), JobCatalog::uniform({chain({10.0}, 0.0)}));
    const auto out = sim.apply_action(1);
    REQUIRE(out.admission.accepted);
    CHECK(out.admission.completion == to_nanos(1500.0));
    CHECK(sim.cluster().free_workers() == 31);
    sim.next_decision();
    CHECK(sim.cluster().free_workers() == 32);
}

TEST_CASE("rewards and reasons") {
    Simulator sim(small_sim(50), JobCatalog::uniform({chain({10.0}, 0.0)}));
    CHECK(sim.apply_action(0).reward == -1.0);
    sim.next_decision();
    const auto late = sim.apply_action(1);
    CHECK(late.reward == -1.0);
    CHECK(late.admission.reason == BlockReason::deadline);
    sim.next_decision();
    const auto odd = sim.apply_action(3);
    CHECK(odd.reward == -1.0);
    CHECK(odd.admission.reason == BlockReason::invalid_action);
    CHECK_THROWS_AS(sim.apply_action(1), std::logic_error);
    sim.next_decision();
    CHECK_THROWS_AS(sim.apply_action(17), std::invalid_argument);
    const auto& m = sim.metrics();
    CHECK(m.blocked_by_reason[reason_index(BlockReason::user_rejection)] == 1);
    CHECK(m.blocked_by_reason[reason_index(BlockReason::deadline)] == 1);
    CHECK(m.blocked_by_reason[reason_index(BlockReason::invalid_action)] == 1);
    CHECK(m.episode_return == -3.0);
}

TEST_CASE("throughput accounting") {
    const auto job = chain({0.5, 0.5}, 1e6, 1e6);
    SUBCASE("u=1 grows both accumulators equally") {
        Simulator sim(small_sim(), JobCatalog::uniform({job}));
        sim.apply_action(1);
        CHECK(sim.metrics().offered_bytes == job_info_size(*job) * 50);
        CHECK(sim.metrics().cluster_bytes == sim.metrics().offered_bytes);
    }
    SUBCASE("u>1 grows the cluster accumulator more") {
        Simulator sim(small_sim(), JobCatalog::uniform({job}));
        REQUIRE(sim.apply_action(2).admission.accepted);
        CHECK(sim.metrics().cluster_bytes > sim.metrics().offered_bytes);
    }
    SUBCASE("blocked jobs change neither") {
        Simulator sim(small_sim(), JobCatalog::uniform({job}));
        sim.apply_action(0);
        CHECK(sim.metrics().offered_bytes == 0.0);
        CHECK(sim.metrics().cluster_bytes == 0.0);
    }
}

TEST_CASE("zero-arrival horizon") {
    auto cfg = small_sim();
    cfg.max_wallclock = 500.0;
    const auto m = run_episode(cfg, JobCatalog::uniform({chain({1.0}, 0.0)}), [](const Observation&) { return 1; });
    CHECK(m.jobs_arrived == 0);
    CHECK(m.blocking_rate() == 0.0);
}

TEST_CASE("metric identities over a desk episode") {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.max_wallclock = 40000.0;
    Rng rng(3);
    const auto m = run_episode(base.sim, base.catalog, [&](const Observation& obs) {
        return static_cast<int>(uniform_index(rng, obs.action_mask.size() + 1));
    });
    CHECK(m.jobs_arrived == 39);
    CHECK(m.jobs_accepted + m.jobs_blocked == m.jobs_arrived);
    std::int64_t by_reason = 0;
    for (auto n : m.blocked_by_reason) by_reason += n;
    CHECK(by_reason == m.jobs_blocked);
    CHECK(m.episode_return == static_cast<double>(m.jobs_accepted - m.jobs_blocked));
    CHECK(m.blocking_rate() + static_cast<double>(m.jobs_accepted) / m.jobs_arrived == doctest::Approx(1.0));
    std::int64_t per_type = 0;
    for (const auto& t : m.per_type) per_type += t.arrived;
    CHECK(per_type == m.jobs_arrived);
}

TEST_CASE("metrics round-trip through records") {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.max_wallclock = 20000.0;
    const auto m = run_episode(base.sim, base.catalog, [](const Observation& obs) {
        return obs.mask_allows(2) ? 2 : 0;
    });
    const auto back = EpisodeMetrics::from_records(Record::parse(m.to_record().to_line()), m.type_records());
    CHECK(back == m);
}

TEST_CASE("config loading and overrides") {
    const auto base = load_episode_config(source_path("configs/desk.cfg"));
    CHECK(base.catalog.profiles.size() == 5);
    CHECK(base.sim.max_wallclock == 200000.0);
    CHECK(base.sim.cluster.shape == RampShape{4, 4, 2});
    auto cfg = base.sim;
    apply_overrides(cfg, Record::parse("sim seed=7 inter_arrival=500 num_iterations=3 max_wallclock=9000 beta=D"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.inter_arrival == 500.0);
    CHECK(cfg.num_iterations == 3);
    CHECK(cfg.max_wallclock == 9000.0);
    CHECK(cfg.beta.name == "D");
    CHECK_THROWS((void)apply_overrides(cfg, Record::parse("sim bogus=1")));
}

TEST_CASE("beta presets") {
    for (const char* name : {"A", "B", "C", "D"}) {
        const auto b = BetaSpec::preset(name);
        CHECK_NOTHROW(b.validate());
        const auto back = beta_from_records(b.to_records());
        CHECK(back.values == b.values);
        CHECK(back.name == b.name);
    }
    CHECK(BetaSpec::preset("B").mean() < BetaSpec::preset("A").mean());
    CHECK(BetaSpec::preset("D").mean() > BetaSpec::preset("A").mean());
    CHECK(BetaSpec::preset("A").values.size() == 20);
    CHECK_THROWS_AS((void)BetaSpec::preset("Z"), std::invalid_argument);
    Rng rng(1);
    const auto one = BetaSpec::constant(37);
    for (int i = 0; i < 10; ++i) CHECK(one.sample(rng) == 37);
}

TEST_CASE("episodes are a pure function of config and policy") {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.max_wallclock = 30000.0;
    base.sim.seed = 11;
    auto policy = [](const Observation& obs) {
        for (int u = static_cast<int>(obs.action_mask.size()); u >= 1; --u)
            if (obs.mask_allows(u)) return u;
        return 0;
    };
    CHECK(run_episode(base.sim, base.catalog, policy) == run_episode(base.sim, base.catalog, policy));
}
