#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rampsim/env.hpp"
#include "rampsim/policies.hpp"
#include "rampsim/text_record.hpp"
#include "support.hpp"

using namespace rampsim;
using namespace rampsim::testing;

namespace {

EpisodeConfig desk(double horizon = 20000.0) {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.max_wallclock = horizon;
    return base;
}

}  // namespace

TEST_CASE("first observation shapes and ranges") {
    Env env(desk());
    const auto obs = env.reset(1);
    const auto* job = env.simulator().pending();
    REQUIRE(job);
    const auto n_ops = static_cast<Eigen::Index>(job->job->num_ops());
    const auto n_deps = static_cast<Eigen::Index>(job->job->num_deps());
    CHECK(obs.op_features.rows() == n_ops);
    CHECK(obs.op_features.cols() == kOpFeatures);
    CHECK(obs.dep_features.rows() == n_deps);
    CHECK(obs.edge_list.rows() == n_deps);
    CHECK(obs.global_job.size() == kGlobalJobFeatures);
    CHECK(obs.global_cluster.size() == kGlobalClusterFeatures);
    CHECK(obs.global_cluster.isZero());
    CHECK(obs.action_mask.size() == 16);
    CHECK(obs.decision_index == 0);

    CHECK(obs.op_features.minCoeff() >= 0.0);
    CHECK(obs.op_features.maxCoeff() <= 1.0);
    CHECK(obs.op_features.col(1).sum() == 1.0);
    CHECK(obs.op_features.col(3).sum() == 1.0);
    CHECK(obs.op_features.col(4).maxCoeff() == 1.0);
    CHECK(obs.dep_features.col(1).sum() == 1.0);
    CHECK(obs.global_job[gj_beta_raw] == job->beta());
    CHECK(obs.global_job.maxCoeff() <= 1.0);
    CHECK(obs.global_job.minCoeff() >= 0.0);
    CHECK(env.action_count() == 17);
}

TEST_CASE("empty-cluster mask allows 1 and the even degrees") {
    Env env(desk());
    const auto obs = env.reset(4);
    for (int u = 1; u <= 16; ++u) CHECK(obs.mask_allows(u) == (u == 1 || u % 2 == 0));
    CHECK_FALSE(obs.mask_allows(0));
    CHECK_FALSE(obs.mask_allows(17));
}

TEST_CASE("ties for the largest op flag the lowest index") {
    std::vector<Operation> ops{{0, 2, 5, 0}, {1, 3, 5, 0}, {2, 3, 1, 0}};
    auto job = std::make_shared<const JobGraph>("tie", ops, std::vector<Dependency>{});
    EpisodeConfig cfg;
    cfg.sim.cluster = cluster_config({4, 4, 2});
    cfg.sim.max_wallclock = 5000;
    cfg.catalog = JobCatalog::uniform({job});
    Env env(cfg);
    const auto obs = env.reset(1);
    CHECK(obs.op_features(1, 1) == 1.0);
    CHECK(obs.op_features(2, 1) == 0.0);
    CHECK(obs.op_features(0, 3) == 1.0);
    CHECK(obs.op_features(1, 3) == 0.0);
    CHECK(obs.op_features.col(4).isZero());  // flat graph, depth 0 everywhere
}

TEST_CASE("reset is reproducible") {
    Env a(desk()), b(desk());
    CHECK(a.reset(9) == b.reset(9));
    a.step(16);
    CHECK(a.reset(9) == b.reset(9));
}

TEST_CASE("step errors") {
    Env env(desk());
    CHECK_THROWS_AS(env.step(1), EnvError);
    env.reset(2);
    CHECK_THROWS_AS(env.step(-1), EnvError);
    CHECK_THROWS_AS(env.step(17), EnvError);
    while (!env.done()) env.step(0);
    CHECK_THROWS_AS(env.step(0), EnvError);
    const auto short_horizon = Record::parse("sim max_wallclock=999");
    CHECK_THROWS_AS(env.reset(1, &short_horizon), EnvError);
}

TEST_CASE("transitions carry reward, info and the next mask") {
    Env env(desk());
    auto obs = env.reset(5);
    const auto t = env.step(3);
    CHECK(t.reward == -1.0);
    CHECK(t.info.reason == BlockReason::invalid_action);
    CHECK(t.info.action == 3);
    REQUIRE(t.observation);
    CHECK(t.info.next_mask == t.observation->action_mask);
    CHECK(t.observation->decision_index == 1);
    const auto t2 = env.step(16);
    if (t2.info.accepted) {
        CHECK(t2.reward == 1.0);
        CHECK(t2.info.jct > 0.0);
        CHECK(t2.info.jct <= t2.info.jct_seq);
    }
}

TEST_CASE("stepping Env matches run_episode") {
    const auto base = desk(60000.0);
    for (const auto& name : policy_names()) {
        CAPTURE(name);
        Env env(base);
        auto act = make_policy({name, 0}, 21);
        auto obs = env.reset(21);
        double ret = 0.0;
        for (;;) {
            const auto t = env.step(act(obs));
            ret += t.reward;
            if (t.done) break;
            obs = *t.observation;
        }
        auto cfg = base.sim;
        cfg.seed = 21;
        const auto direct = run_episode(cfg, base.catalog, make_policy({name, 0}, 21));
        CHECK(env.metrics() == direct);
        CHECK(ret == direct.episode_return);
    }
}

TEST_CASE("run_episode reports the failing decision") {
    const auto base = desk();
    auto cfg = base.sim;
    cfg.seed = 3;
    try {
        (void)run_episode(cfg, base.catalog, [](const Observation&) { return 99; });
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        CHECK(what.find("seed 3") != std::string::npos);
        CHECK(what.find("decision 0") != std::string::npos);
    }
}
