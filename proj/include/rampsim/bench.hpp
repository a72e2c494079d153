#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rampsim/policies.hpp"

namespace rampsim {

struct Summary {
    double mean = 0.0, min = 0.0, max = 0.0;
};
Summary summarise(const std::vector<double>& values);

/// All seeds of one policy under one β preset.
struct BenchCell {
    std::string policy;
    std::string preset;
    std::vector<EpisodeMetrics> runs;  // in seed order
    std::string error;                 // set when an episode failed; runs is then empty

    bool ok() const { return error.empty(); }
    Summary blocking() const;
    Summary offered_throughput() const;
    Summary cluster_throughput() const;
    double score_blocking = 0.0;    // best mean blocking / mean blocking
    double score_throughput = 0.0;  // mean offered throughput / best
};

struct BenchReport {
    std::vector<std::uint64_t> seeds;
    std::vector<BenchCell> cells;  // policy-major, then preset

    const BenchCell* find(const std::string& policy, const std::string& preset) const;
};

struct BenchOptions {
    std::vector<PolicySpec> policies;
    std::vector<std::string> presets;  // β preset names
    std::vector<std::uint64_t> seeds;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs the policy x preset x seed cross product. Episodes run in parallel;
/// a failing episode marks its cell with the error and the rest proceed.
BenchReport run_bench(const EpisodeConfig& base, const BenchOptions& opts);

/// Structured-text report: per-cell summaries with scores, per-episode
/// metrics, and per-job-type blocking next to job characteristics.
void write_report(std::ostream& out, const BenchReport& report, const JobCatalog& catalog);
/// One tab-separated row per policy x preset x seed.
void write_table(std::ostream& out, const BenchReport& report);

}  // namespace rampsim
