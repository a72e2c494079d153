#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rampsim/bench.hpp"
#include "rampsim/text_record.hpp"
#include "support.hpp"

using namespace rampsim;
using namespace rampsim::testing;

TEST_CASE("summaries") {
    const auto s = summarise({3.0, 1.0, 2.0});
    CHECK(s.mean == 2.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 3.0);
    CHECK(summarise({}).mean == 0.0);
}

TEST_CASE("bench cross product, scores and report") {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.max_wallclock = 40000.0;
    BenchOptions opts;
    opts.policies = {{"para_max", 0}, {"para_min", 0}, {"random", 0}};
    opts.presets = {"A", "D"};
    opts.seeds = {1, 2};
    opts.threads = 3;
    const auto report = run_bench(base, opts);
    REQUIRE(report.cells.size() == 6);
    for (const auto& c : report.cells) {
        CAPTURE(c.policy);
        CAPTURE(c.preset);
        REQUIRE(c.ok());
        CHECK(c.runs.size() == 2);
        CHECK(c.runs[0].seed == 1);
        CHECK(c.score_blocking > 0.0);
        CHECK(c.score_blocking <= 1.0);
        CHECK(c.score_throughput > 0.0);
        CHECK(c.score_throughput <= 1.0);
        const auto b = c.blocking();
        CHECK(b.min <= b.mean);
        CHECK(b.mean <= b.max);
    }
    for (const auto& preset : opts.presets) {
        int best_b = 0, best_t = 0;
        for (const auto& c : report.cells)
            if (c.preset == preset) {
                best_b += c.score_blocking == 1.0;
                best_t += c.score_throughput == 1.0;
            }
        CHECK(best_b >= 1);
        CHECK(best_t >= 1);
    }

    // Parallel and serial runs agree.
    opts.threads = 1;
    const auto serial = run_bench(base, opts);
    for (std::size_t i = 0; i < report.cells.size(); ++i) CHECK(serial.cells[i].runs == report.cells[i].runs);

    std::ostringstream out;
    write_report(out, report, base.catalog);
    std::istringstream in(out.str());
    int cells = 0, episodes = 0, bias = 0;
    for (const auto& r : read_records(in)) {
        cells += r.kind() == "cell";
        episodes += r.kind() == "episode";
        bias += r.kind() == "bias";
    }
    CHECK(cells == 6);
    CHECK(episodes == 12);
    CHECK(bias == 6 * 5);

    std::ostringstream table;
    write_table(table, report);
    std::istringstream tin(table.str());
    std::string line;
    int rows = 0;
    while (std::getline(tin, line)) ++rows;
    CHECK(rows == 1 + 12);
}

TEST_CASE("bench rejects empty or unknown inputs") {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    BenchOptions opts;
    CHECK_THROWS_AS((void)run_bench(base, opts), std::invalid_argument);
    opts.policies = {{"nope", 0}};
    opts.presets = {"A"};
    opts.seeds = {1};
    CHECK_THROWS_AS((void)run_bench(base, opts), std::invalid_argument);
}

TEST_CASE("beta fixed at 1 under light load: para_min never misses a deadline") {
    auto base = load_episode_config(source_path("configs/desk.cfg"));
    base.sim.beta = BetaSpec::constant(100);
    base.sim.inter_arrival = 2e6;
    base.sim.max_wallclock = 2e7;
    base.sim.seed = 4;
    const auto m = run_episode(base.sim, base.catalog, para_min);
    CHECK(m.jobs_arrived == 9);
    CHECK(m.blocked_by_reason[reason_index(BlockReason::deadline)] == 0);
    CHECK(m.jobs_accepted == 9);
}
