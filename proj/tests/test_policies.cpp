#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rampsim/policies.hpp"
#include "support.hpp"

using namespace rampsim;
using namespace rampsim::testing;

namespace {

// First observation of an episode on an empty 32-worker cluster with a fixed β.
Observation empty_cluster_observation(int beta_hundredths) {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.beta = BetaSpec::constant(beta_hundredths);
    base.sim.max_wallclock = 5000.0;
    Env env(base);
    return env.reset(1);
}

Observation with_mask(std::vector<std::uint8_t> mask, double beta = 1.0) {
    Observation obs;
    obs.global_job = Eigen::VectorXd::Zero(kGlobalJobFeatures);
    obs.global_job[gj_beta_raw] = beta;
    obs.action_mask = std::move(mask);
    return obs;
}

}  // namespace

TEST_CASE("para_max") {
    CHECK(para_max(empty_cluster_observation(100)) == 16);
    std::vector<std::uint8_t> two(16, 0);
    two[0] = two[1] = 1;
    CHECK(para_max(with_mask(two)) == 2);
    CHECK(para_max(with_mask(std::vector<std::uint8_t>(16, 0))) == 0);
}

TEST_CASE("para_min rounds ceil(1/beta) up to an allowed degree") {
    const std::vector<std::pair<int, int>> cases{{100, 1}, {50, 2}, {25, 4}, {20, 6}, {7, 16}, {33, 4}, {5, 16}};
    for (auto [beta, want] : cases) {
        CAPTURE(beta);
        CHECK(para_min(empty_cluster_observation(beta)) == want);
    }
    std::vector<std::uint8_t> low(16, 0);
    low[0] = low[1] = 1;
    CHECK(para_min(with_mask(low, 0.1)) == 2);  // target 10 unavailable: largest allowed
    CHECK(para_min(with_mask(std::vector<std::uint8_t>(16, 0), 0.5)) == 0);
}

TEST_CASE("random policy") {
    Rng rng(17);
    std::vector<std::uint8_t> one(16, 0);
    one[5] = 1;
    for (int i = 0; i < 100; ++i) CHECK(random_action(with_mask(one), rng) == 6);
    CHECK(random_action(with_mask(std::vector<std::uint8_t>(16, 0)), rng) == 0);

    const auto obs = empty_cluster_observation(100);
    std::map<int, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++counts[random_action(obs, rng)];
    CHECK(counts.size() == 9);
    double chi2 = 0.0;
    const double expected = draws / 9.0;
    for (auto [u, n] : counts) {
        CHECK((u == 1 || u % 2 == 0));
        chi2 += (n - expected) * (n - expected) / expected;
    }
    CHECK(chi2 < 26.12);  // 8 degrees of freedom, p = 0.001
}

TEST_CASE("policy factory") {
    const auto obs = empty_cluster_observation(50);
    auto a = make_policy({"random", 3}, 10);
    auto b = make_policy({"random", 3}, 10);
    auto c = make_policy({"random", 3}, 11);
    std::vector<int> sa, sb, sc;
    for (int i = 0; i < 50; ++i) {
        sa.push_back(a(obs));
        sb.push_back(b(obs));
        sc.push_back(c(obs));
    }
    CHECK(sa == sb);
    CHECK(sa != sc);
    CHECK(make_policy({"para_min", 0}, 1)(obs) == 2);
    CHECK_THROWS_AS((void)make_policy({"greedy", 0}, 1), std::invalid_argument);
}
