// rampsim command line: serve the environment, run benchmarks, record traces.

#include <CLI11.hpp>

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rampsim/bench.hpp"
#include "rampsim/protocol.hpp"

using namespace rampsim;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string profile_file_name(const std::string& model) {
    std::string out;
    for (char c : model)
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out + ".profile";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

int cmd_gen_profiles(const std::string& dir, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    const auto targets = reference_profile_targets();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto job = generate_synthetic_profile(targets[i], seed + i);
        const auto path = (std::filesystem::path(dir) / profile_file_name(job.model_name())).string();
        save_profile(path, job);
        const auto st = job_stats(job);
        std::cout << path << ": " << st.num_ops << " ops, " << st.num_deps << " deps, depth " << st.max_depth
                  << ", JCT^seq " << format_double(job.sequential_jct()) << " s\n";
    }
    return 0;
}

int cmd_serve(const std::string& config, const std::string& listen, const std::string& transcript) {
    const auto base = load_episode_config(config);
    if (listen == "stdio") {
        if (transcript.empty()) {
            serve_stream(std::cin, std::cout, base);
            return 0;
        }
        auto log = open_out(transcript);
        Session session(base);
        for (std::string line; !session.closed() && std::getline(std::cin, line);) {
            if (line.empty()) continue;
            const auto reply = session.handle(line);
            std::cout << reply << '\n' << std::flush;
            log << "> " << line << '\n' << "< " << reply << '\n';
        }
        return 0;
    }
    const std::string prefix = "tcp:";
    if (listen.rfind(prefix, 0) != 0) throw CLI::ValidationError("--listen", "expected stdio or tcp:HOST:PORT");
    const auto rest = listen.substr(prefix.size());
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected tcp:HOST:PORT");
    std::atomic<bool> stop{false};
    serve_tcp(rest.substr(0, colon), std::stoi(rest.substr(colon + 1)), base, stop,
              [](int port) { std::cerr << "listening on port " << port << '\n'; });
    return 0;
}

int cmd_bench(const std::string& config, const std::string& policies, const std::string& presets,
              const std::string& seeds, const std::string& out, const std::string& table, unsigned threads) {
    const auto base = load_episode_config(config);
    BenchOptions opts;
    for (const auto& p : split_list(policies)) opts.policies.push_back({p, 0});
    opts.presets = split_list(presets);
    for (const auto& s : split_list(seeds)) opts.seeds.push_back(static_cast<std::uint64_t>(parse_int(s)));
    opts.threads = threads;
    const auto report = run_bench(base, opts);
    if (out.empty()) {
        write_report(std::cout, report, base.catalog);
    } else {
        auto f = open_out(out);
        write_report(f, report, base.catalog);
    }
    if (!table.empty()) {
        auto f = open_out(table);
        write_table(f, report);
    }
    std::cerr << "policy\tpreset\tblocking(mean [min,max])\tscore\n";
    for (const auto& c : report.cells) {
        if (!c.ok()) {
            std::cerr << c.policy << '\t' << c.preset << "\terror: " << c.error << '\n';
            continue;
        }
        const auto b = c.blocking();
        std::cerr << c.policy << '\t' << c.preset << '\t' << format_double(b.mean) << " [" << format_double(b.min)
                  << ',' << format_double(b.max) << "]\t" << format_double(c.score_blocking) << '\n';
    }
    bool failed = false;
    for (const auto& c : report.cells) failed = failed || !c.ok();
    return failed ? 1 : 0;
}

int cmd_trace(const std::string& config, const std::string& policy, std::uint64_t seed, const std::string& preset,
              const std::string& out) {
    auto base = load_episode_config(config);
    if (!preset.empty()) base.sim.beta = BetaSpec::preset(preset);
    base.sim.seed = seed;
    auto file = open_out(out);
    Env env(base);
    const auto act = make_policy({policy, 0}, seed);
    auto obs = env.reset(seed);
    for (;;) {
        const auto* job = env.simulator().pending();
        const auto now = env.simulator().now();
        const int u = act(obs);
        std::string mask;
        for (auto b : obs.action_mask) mask += b ? '1' : '0';
        Record r("decision");
        r.add("t", obs.decision_index)
            .add("time", to_seconds(now))
            .add_string("model", job->job->model_name())
            .add("beta", job->beta())
            .add("mask", mask)
            .add("action", u);
        const auto tr = env.step(u);
        r.add("reward", tr.reward)
            .add("reason", std::string(to_string(tr.info.reason)))
            .add("jct", tr.info.jct)
            .add("jct_seq", tr.info.jct_seq);
        file << r.to_line() << '\n';
        if (tr.done) break;
        obs = *tr.observation;
    }
    file << encode_metrics(env.metrics()).to_line() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAMP cluster job-partitioning simulator"};
    app.require_subcommand(1);

    std::string config = "configs/desk.cfg";

    auto* gen = app.add_subcommand("gen-profiles", "Write the five reference-shaped synthetic job profiles");
    std::string gen_dir = "data/profiles";
    std::uint64_t gen_seed = 2023;
    gen->add_option("--out", gen_dir, "Output directory");
    gen->add_option("--seed", gen_seed, "Base seed");

    auto* serve = app.add_subcommand("serve", "Serve the environment protocol");
    std::string listen = "stdio", transcript;
    serve->add_option("--config", config, "Episode config file")->check(CLI::ExistingFile);
    serve->add_option("--listen", listen, "stdio or tcp:HOST:PORT");
    serve->add_option("--transcript", transcript, "With stdio, also log requests and responses to this file");

    auto* bench = app.add_subcommand("bench", "Run baseline policies over presets and seeds");
    std::string policies = "para_max,para_min,random", presets = "A,B,C,D", seeds = "1,2,3", out, table;
    unsigned threads = 0;
    bench->add_option("--config", config, "Episode config file")->check(CLI::ExistingFile);
    bench->add_option("--policy", policies, "Comma-separated policies");
    bench->add_option("--presets", presets, "Comma-separated beta presets");
    bench->add_option("--seeds", seeds, "Comma-separated seeds");
    bench->add_option("--out", out, "Report file (default stdout)");
    bench->add_option("--table", table, "Flat TSV table file");
    bench->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* trace = app.add_subcommand("trace", "Record one episode decision by decision");
    std::string trace_policy = "para_max", trace_out = "trace.txt", trace_preset;
    std::uint64_t trace_seed = 1;
    trace->add_option("--config", config, "Episode config file")->check(CLI::ExistingFile);
    trace->add_option("--policy", trace_policy, "Policy name");
    trace->add_option("--seed", trace_seed, "Episode seed");
    trace->add_option("--preset", trace_preset, "Override the beta preset");
    trace->add_option("--out", trace_out, "Output file");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_gen_profiles(gen_dir, gen_seed);
        if (*serve) return cmd_serve(config, listen, transcript);
        if (*bench) return cmd_bench(config, policies, presets, seeds, out, table, threads);
        if (*trace) return cmd_trace(config, trace_policy, trace_seed, trace_preset, trace_out);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "rampsim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
