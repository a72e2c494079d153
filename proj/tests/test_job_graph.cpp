#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rampsim/text_record.hpp"
#include "support.hpp"

using namespace rampsim;
using namespace rampsim::testing;

TEST_CASE("records round-trip byte for byte") {
    Record r("op");
    r.add("id", 7).add("compute", 0.1).add("memory", 1e-300).add_string("name", "a b=c%");
    const auto line = r.to_line();
    const auto back = Record::parse(line);
    CHECK(back.to_line() == line);
    CHECK(back.get_string("name") == "a b=c%");
    CHECK(back.get_double("compute") == 0.1);
    CHECK_THROWS_AS(back.get_int("missing"), ParseError);
    CHECK_THROWS_AS(Record::parse("op id"), ParseError);
}

TEST_CASE("double formatting is shortest round-trip") {
    for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 36061.15, 1e22, 5e-324, -2.5}) CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("single-op profile") {
    std::istringstream in("model name=one\nop id=0 compute=5 memory=10\n");
    const auto job = read_profile(in);
    CHECK(job.num_ops() == 1);
    CHECK(job.num_deps() == 0);
    CHECK(job.sequential_jct() == 5.0);
    CHECK(job_info_size(job) == 10.0);
}

TEST_CASE("malformed graphs name the offending element") {
    auto fails_with = [](const std::string& text, const std::string& fragment) {
        std::istringstream in(text);
        try {
            (void)read_profile(in);
        } catch (const JobGraphError& e) {
            return std::string(e.what()).find(fragment) != std::string::npos;
        }
        return false;
    };
    CHECK(fails_with("model name=x\nop id=0 compute=1 memory=0\ndep id=0 parent=0 child=9 size=1\n", "dangling child"));
    CHECK(fails_with("model name=x\nop id=0 compute=1 memory=0\nop id=0 compute=1 memory=0\n", "duplicate op"));
    CHECK(fails_with("model name=x\nop id=0 compute=1 memory=0\ndep id=0 parent=0 child=0 size=1\n", "self loop"));
    CHECK(fails_with("model name=x\nop id=0 compute=-1 memory=0\n", "negative"));
    CHECK(fails_with("model name=x\nop id=0 compute=1 memory=0\nop id=1 compute=1 memory=0\n"
                     "dep id=0 parent=0 child=1 size=1\ndep id=1 parent=1 child=0 size=1\n",
                     "cycle"));
}

TEST_CASE("job stats on small lists") {
    std::vector<Operation> ops{{0, 2, 1, 0}, {1, 4, 2, 0}};
    JobGraph two("two", ops, {});
    const auto st = job_stats(two);
    CHECK(st.mean_compute == 3.0);
    CHECK(st.median_compute == 3.0);
    CHECK(median({1, 2, 3, 4, 100}) == 3.0);
    std::vector<Operation> five;
    for (int i = 0; i < 5; ++i) five.push_back({i, 1, std::vector<double>{1, 2, 3, 4, 100}[static_cast<std::size_t>(i)], 0});
    const auto st5 = job_stats(JobGraph("five", five, {}));
    CHECK(st5.median_memory == 3.0);
    CHECK(st5.mean_memory == 22.0);
    CHECK(median({}) == 0.0);
}

TEST_CASE("depth follows the longest path from a source") {
    std::vector<Operation> ops{{0, 1, 0, 0}, {1, 1, 0, 0}, {2, 1, 0, 0}, {3, 1, 0, 0}};
    std::vector<Dependency> deps{{0, 0, 1, 1}, {1, 1, 2, 1}, {2, 0, 2, 1}, {3, 0, 3, 1}};
    JobGraph g("diamond", ops, deps);
    CHECK(g.ops()[2].depth == 2);
    CHECK(g.ops()[3].depth == 1);
    CHECK(g.max_depth() == 2);
    CHECK(g.topo_order() == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("reference profiles carry the published aggregates") {
    struct Expect {
        std::string name;
        std::size_t ops, deps;
        int depth;
        double seq;
    };
    const std::vector<Expect> expect{{"resnet18", 142, 159, 60, 36668.35},
                                     {"vgg16", 82, 83, 80, 7434.448},
                                     {"gnmt", 96, 117, 30, 4470.8},
                                     {"squeezenet10", 136, 153, 102, 38000.15},
                                     {"alexnet", 46, 47, 44, 36061.15}};
    for (const auto& e : expect) {
        CAPTURE(e.name);
        const auto job = load_reference(e.name);
        const auto st = job_stats(*job);
        CHECK(st.num_ops == e.ops);
        CHECK(st.num_deps == e.deps);
        CHECK(st.max_depth == e.depth);
        CHECK(job->sequential_jct() == doctest::Approx(e.seq).epsilon(1e-12));
    }
    CHECK(job_stats(*load_reference("vgg16")).max_compute == 113.330);
    CHECK(job_info_size(*load_reference("resnet18")) == doctest::Approx(35.99195e9).epsilon(1e-9));
    CHECK(job_info_size(*load_reference("gnmt")) == doctest::Approx(3.396248e9).epsilon(1e-9));
}

TEST_CASE("profile files round-trip byte for byte") {
    for (const auto& name : profile_names()) {
        CAPTURE(name);
        const auto job = load_reference(name);
        std::ostringstream first;
        write_profile(first, *job);
        std::istringstream in(first.str());
        std::ostringstream second;
        write_profile(second, read_profile(in));
        CHECK(first.str() == second.str());
    }
}

TEST_CASE("synthetic profiles hit their targets and are deterministic") {
    ProfileTargets t;
    t.model_name = "alexnet-like";
    t.num_ops = 46;
    t.num_deps = 47;
    t.depth = 44;
    t.total_compute = 500.0;
    t.max_compute = 40.0;
    t.total_memory = 1e9;
    t.max_memory = 1e8;
    t.total_dep_size = 2e8;
    t.max_dep_size = 2e7;
    const auto a = generate_synthetic_profile(t, 11);
    const auto b = generate_synthetic_profile(t, 11);
    std::ostringstream sa, sb;
    write_profile(sa, a);
    write_profile(sb, b);
    CHECK(sa.str() == sb.str());
    const auto st = job_stats(a);
    CHECK(st.num_ops == 46);
    CHECK(st.num_deps == 47);
    CHECK(st.max_depth == 44);
    CHECK(st.total_compute == doctest::Approx(500.0).epsilon(1e-12));
    CHECK(st.max_compute == doctest::Approx(40.0).epsilon(1e-12));

    ProfileTargets single;
    single.num_ops = 1;
    const auto one = generate_synthetic_profile(single, 3);
    CHECK(one.num_ops() == 1);
    CHECK(one.num_deps() == 0);

    ProfileTargets bad = t;
    bad.depth = 46;  // a path of 47 ops in a 46-op graph
    CHECK_THROWS_AS((void)generate_synthetic_profile(bad, 1), std::invalid_argument);
}

TEST_CASE("catalog validation") {
    JobCatalog empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    auto cat = JobCatalog::uniform({chain({1.0}, 0.0), chain({2.0}, 0.0)});
    CHECK_NOTHROW(cat.validate());
    cat.weights = {0.5, -0.5};
    CHECK_THROWS_AS(cat.validate(), std::invalid_argument);
}
