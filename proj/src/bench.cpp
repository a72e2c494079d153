#include "rampsim/bench.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "rampsim/text_record.hpp"

namespace rampsim {

Summary summarise(const std::vector<double>& values) {
    if (values.empty()) return {};
    Summary s{0.0, values.front(), values.front()};
    for (double v : values) {
        s.mean += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean /= static_cast<double>(values.size());
    return s;
}

namespace {

template <class F>
Summary over_runs(const std::vector<EpisodeMetrics>& runs, F f) {
    std::vector<double> v;
    for (const auto& m : runs) v.push_back(f(m));
    return summarise(v);
}

}  // namespace

Summary BenchCell::blocking() const {
    return over_runs(runs, [](const EpisodeMetrics& m) { return m.blocking_rate(); });
}
Summary BenchCell::offered_throughput() const {
    return over_runs(runs, [](const EpisodeMetrics& m) { return m.offered_throughput(); });
}
Summary BenchCell::cluster_throughput() const {
    return over_runs(runs, [](const EpisodeMetrics& m) { return m.cluster_throughput(); });
}

const BenchCell* BenchReport::find(const std::string& policy, const std::string& preset) const {
    for (const auto& c : cells)
        if (c.policy == policy && c.preset == preset) return &c;
    return nullptr;
}

BenchReport run_bench(const EpisodeConfig& base, const BenchOptions& opts) {
    if (opts.policies.empty() || opts.presets.empty() || opts.seeds.empty())
        throw std::invalid_argument("bench needs at least one policy, preset and seed");
    for (const auto& p : opts.policies) (void)make_policy(p, 0);

    BenchReport report;
    report.seeds = opts.seeds;
    for (const auto& p : opts.policies)
        for (const auto& preset : opts.presets) {
            BenchCell c;
            c.policy = p.name;
            c.preset = preset;
            c.runs.resize(opts.seeds.size());
            report.cells.push_back(std::move(c));
        }
    std::vector<BetaSpec> betas;
    for (const auto& preset : opts.presets) betas.push_back(BetaSpec::preset(preset));

    const std::size_t n_seeds = opts.seeds.size();
    const std::size_t total = report.cells.size() * n_seeds;
    std::vector<std::string> errors(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const std::size_t cell_index = job / n_seeds;
            const std::size_t seed_index = job % n_seeds;
            auto& cell = report.cells[cell_index];
            const auto& spec = opts.policies[cell_index / opts.presets.size()];
            SimConfig cfg = base.sim;
            cfg.beta = betas[cell_index % opts.presets.size()];
            cfg.seed = opts.seeds[seed_index];
            try {
                cell.runs[seed_index] = run_episode(cfg, base.catalog, make_policy(spec, cfg.seed));
            } catch (const std::exception& e) {
                errors[job] = e.what();
            }
        }
    };
    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t job = 0; job < total; ++job) {
        auto& cell = report.cells[job / n_seeds];
        if (!errors[job].empty() && cell.error.empty()) cell.error = errors[job];
    }
    for (auto& cell : report.cells)
        if (!cell.ok()) cell.runs.clear();

    for (const auto& preset : opts.presets) {
        double best_blocking = 2.0, best_throughput = 0.0;
        for (const auto& c : report.cells)
            if (c.preset == preset && c.ok()) {
                best_blocking = std::min(best_blocking, c.blocking().mean);
                best_throughput = std::max(best_throughput, c.offered_throughput().mean);
            }
        for (auto& c : report.cells) {
            if (c.preset != preset || !c.ok()) continue;
            const double b = c.blocking().mean;
            c.score_blocking = b > 0.0 ? best_blocking / b : 1.0;
            c.score_throughput = best_throughput > 0.0 ? c.offered_throughput().mean / best_throughput : 1.0;
        }
    }
    return report;
}

void write_report(std::ostream& out, const BenchReport& report, const JobCatalog& catalog) {
    for (const auto& c : report.cells) {
        Record r("cell");
        r.add_string("policy", c.policy).add_string("preset", c.preset);
        if (!c.ok()) {
            out << r.add_string("error", c.error).to_line() << '\n';
            continue;
        }
        const auto b = c.blocking(), o = c.offered_throughput(), t = c.cluster_throughput();
        r.add("seeds", c.runs.size())
            .add("blocking_mean", b.mean)
            .add("blocking_min", b.min)
            .add("blocking_max", b.max)
            .add("offered_throughput_mean", o.mean)
            .add("offered_throughput_min", o.min)
            .add("offered_throughput_max", o.max)
            .add("cluster_throughput_mean", t.mean)
            .add("cluster_throughput_min", t.min)
            .add("cluster_throughput_max", t.max)
            .add("score_blocking", c.score_blocking)
            .add("score_throughput", c.score_throughput);
        out << r.to_line() << '\n';
    }
    for (const auto& c : report.cells)
        for (const auto& m : c.runs) {
            Record r = m.to_record();
            Record tagged("episode");
            tagged.add_string("policy", c.policy).add_string("preset", c.preset);
            for (const auto& [k, v] : r.fields()) tagged.add(k, v);
            out << tagged.to_line() << '\n';
        }
    // Per-job-type blocking against the job's characteristics.
    for (std::size_t j = 0; j < catalog.profiles.size(); ++j) {
        const auto& job = *catalog.profiles[j];
        for (const auto& c : report.cells) {
            if (!c.ok()) continue;
            std::vector<double> rates;
            for (const auto& m : c.runs) rates.push_back(m.per_type.at(j).blocking_rate());
            const auto s = summarise(rates);
            out << Record("bias")
                       .add_string("model", job.model_name())
                       .add_string("policy", c.policy)
                       .add_string("preset", c.preset)
                       .add("num_ops", job.num_ops())
                       .add("num_deps", job.num_deps())
                       .add("info_size", job_info_size(job))
                       .add("jct_seq", job.sequential_jct())
                       .add("blocking_mean", s.mean)
                       .add("blocking_min", s.min)
                       .add("blocking_max", s.max)
                       .to_line()
                << '\n';
        }
    }
}

void write_table(std::ostream& out, const BenchReport& report) {
    out << "policy\tpreset\tseed\tarrived\taccepted\tblocked\tblocking_rate\toffered_throughput\tcluster_throughput"
           "\tmean_jct\tmean_speedup\treturn\n";
    for (const auto& c : report.cells)
        for (const auto& m : c.runs)
            out << c.policy << '\t' << c.preset << '\t' << m.seed << '\t' << m.jobs_arrived << '\t' << m.jobs_accepted
                << '\t' << m.jobs_blocked << '\t' << format_double(m.blocking_rate()) << '\t'
                << format_double(m.offered_throughput()) << '\t' << format_double(m.cluster_throughput()) << '\t'
                << format_double(m.mean_jct()) << '\t' << format_double(m.mean_speedup()) << '\t'
                << format_double(m.episode_return) << '\n';
}

}  // namespace rampsim
