#include "rampsim/job_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <set>

#include "rampsim/text_record.hpp"

namespace rampsim {

Nanos to_nanos(double seconds) { return Nanos{std::llround(seconds * 1e9)}; }
double to_seconds(Nanos t) { return static_cast<double>(t.count()) * 1e-9; }

JobGraph::JobGraph(std::string model_name, std::vector<Operation> ops, std::vector<Dependency> deps)
    : model_name_(std::move(model_name)), ops_(std::move(ops)), deps_(std::move(deps)) {
    const std::size_t n = ops_.size();
    id_index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& op = ops_[i];
        if (!(op.compute_time >= 0.0) || !std::isfinite(op.compute_time))
            throw JobGraphError("op " + std::to_string(op.op_id) + ": negative or invalid compute_time");
        if (!(op.memory >= 0.0) || !std::isfinite(op.memory))
            throw JobGraphError("op " + std::to_string(op.op_id) + ": negative or invalid memory");
        id_index_.emplace_back(op.op_id, i);
    }
    std::sort(id_index_.begin(), id_index_.end());
    for (std::size_t i = 1; i < id_index_.size(); ++i)
        if (id_index_[i].first == id_index_[i - 1].first)
            throw JobGraphError("duplicate op id " + std::to_string(id_index_[i].first));

    auto lookup = [&](std::int64_t id) -> std::optional<std::size_t> {
        auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(id, std::size_t{0}));
        if (it == id_index_.end() || it->first != id) return std::nullopt;
        return it->second;
    };

    in_deps_.assign(n, {});
    out_deps_.assign(n, {});
    std::set<std::int64_t> dep_ids;
    for (std::size_t d = 0; d < deps_.size(); ++d) {
        const auto& dep = deps_[d];
        const auto tag = "dep " + std::to_string(dep.dep_id);
        if (!dep_ids.insert(dep.dep_id).second) throw JobGraphError("duplicate dep id " + std::to_string(dep.dep_id));
        if (!(dep.size >= 0.0) || !std::isfinite(dep.size)) throw JobGraphError(tag + ": negative or invalid size");
        if (dep.parent_op == dep.child_op) throw JobGraphError(tag + ": self loop on op " + std::to_string(dep.parent_op));
        auto p = lookup(dep.parent_op);
        if (!p) throw JobGraphError(tag + ": dangling parent op " + std::to_string(dep.parent_op));
        auto c = lookup(dep.child_op);
        if (!c) throw JobGraphError(tag + ": dangling child op " + std::to_string(dep.child_op));
        dep_parent_.push_back(*p);
        dep_child_.push_back(*c);
        out_deps_[*p].push_back(d);
        in_deps_[*c].push_back(d);
    }

    // Kahn with a min-heap so the order is deterministic.
    std::vector<std::size_t> indegree(n);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = in_deps_[i].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push(i);
    topo_.reserve(n);
    while (!ready.empty()) {
        auto i = ready.top();
        ready.pop();
        topo_.push_back(i);
        for (auto d : out_deps_[i])
            if (--indegree[dep_child_[d]] == 0) ready.push(dep_child_[d]);
    }
    if (topo_.size() != n) {
        for (std::size_t i = 0; i < n; ++i)
            if (indegree[i] > 0) throw JobGraphError("cycle detected through op " + std::to_string(ops_[i].op_id));
    }

    for (auto i : topo_) {
        int depth = 0;
        for (auto d : in_deps_[i]) depth = std::max(depth, ops_[dep_parent_[d]].depth + 1);
        ops_[i].depth = depth;
        max_depth_ = std::max(max_depth_, depth);
    }
    for (const auto& op : ops_) {
        sequential_jct_ += op.compute_time;
        sequential_ticks_ += to_nanos(op.compute_time);
    }
}

std::size_t JobGraph::op_index(std::int64_t op_id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(op_id, std::size_t{0}));
    if (it == id_index_.end() || it->first != op_id) throw JobGraphError("unknown op id " + std::to_string(op_id));
    return it->second;
}

// Profile files -------------------------------------------------------------

JobGraph read_profile(std::istream& in) {
    auto records = read_records(in);
    std::string name;
    bool have_header = false;
    std::vector<Operation> ops;
    std::vector<Dependency> deps;
    for (const auto& r : records) {
        if (r.kind() == "model") {
            if (have_header) throw ParseError("duplicate model record");
            name = r.get_string("name");
            have_header = true;
        } else if (r.kind() == "op") {
            ops.push_back({r.get_int("id"), r.get_double("compute"), r.get_double("memory"), 0});
        } else if (r.kind() == "dep") {
            deps.push_back({r.get_int("id"), r.get_int("parent"), r.get_int("child"), r.get_double("size")});
        } else {
            throw ParseError("unknown record kind '" + r.kind() + "'");
        }
    }
    if (!have_header) throw ParseError("missing model record");
    return JobGraph(std::move(name), std::move(ops), std::move(deps));
}

JobGraph load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return read_profile(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const JobGraphError& e) {
        throw JobGraphError(path + ": " + e.what());
    }
}

void write_profile(std::ostream& out, const JobGraph& job) {
    out << Record("model").add_string("name", job.model_name()).to_line() << '\n';
    for (const auto& op : job.ops())
        out << Record("op").add("id", op.op_id).add("compute", op.compute_time).add("memory", op.memory).to_line()
            << '\n';
    for (const auto& d : job.deps())
        out << Record("dep")
                   .add("id", d.dep_id)
                   .add("parent", d.parent_op)
                   .add("child", d.child_op)
                   .add("size", d.size)
                   .to_line()
            << '\n';
}

void save_profile(const std::string& path, const JobGraph& job) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    write_profile(out, job);
}

// Aggregates ----------------------------------------------------------------

double job_info_size(const JobGraph& job) {
    double total = 0.0;
    for (const auto& op : job.ops()) total += op.memory;
    for (const auto& d : job.deps()) total += d.size;
    return total;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

JobStats job_stats(const JobGraph& job) {
    JobStats s;
    s.num_ops = job.num_ops();
    s.num_deps = job.num_deps();
    s.max_depth = job.max_depth();
    std::vector<double> compute, memory, sizes;
    for (const auto& op : job.ops()) {
        compute.push_back(op.compute_time);
        memory.push_back(op.memory);
    }
    for (const auto& d : job.deps()) sizes.push_back(d.size);

    auto fill = [](const std::vector<double>& v, double& total, double& mean, double& med, double& max) {
        total = std::accumulate(v.begin(), v.end(), 0.0);
        mean = v.empty() ? 0.0 : total / static_cast<double>(v.size());
        med = median(v);
        max = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    };
    fill(compute, s.total_compute, s.mean_compute, s.median_compute, s.max_compute);
    fill(memory, s.total_memory, s.mean_memory, s.median_memory, s.max_memory);
    fill(sizes, s.total_dep_size, s.mean_dep_size, s.median_dep_size, s.max_dep_size);
    return s;
}

double JobRequest::max_acceptable_jct() const { return beta() * job->sequential_jct() * num_iterations; }

void JobCatalog::validate() const {
    if (profiles.empty()) throw std::invalid_argument("job catalog is empty");
    if (weights.size() != profiles.size()) throw std::invalid_argument("job catalog weights do not match profiles");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("job catalog weight is negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("job catalog weights do not sum to 1");
    for (const auto& p : profiles)
        if (!p) throw std::invalid_argument("job catalog holds a null profile");
}

JobCatalog JobCatalog::uniform(std::vector<JobGraphPtr> profiles) {
    JobCatalog c;
    c.weights.assign(profiles.size(), profiles.empty() ? 0.0 : 1.0 / static_cast<double>(profiles.size()));
    c.profiles = std::move(profiles);
    return c;
}

// Synthetic profiles ----------------------------------------------------------

namespace {

// Splits `total` into `count` nonnegative integers where element `peak` equals
// `max_value`, all others lie in [1, max_value] (when total allows), and the
// sum is exact. Weights are drawn uniformly in [0.2, 1).
std::vector<std::int64_t> split_exact(std::int64_t total, std::int64_t max_value, std::size_t count, std::size_t peak,
                                      Rng& rng) {
    std::vector<std::int64_t> out(count, 0);
    if (count == 0) return out;
    out[peak] = max_value;
    std::int64_t rest = total - max_value;
    const std::size_t others = count - 1;
    if (others == 0) return out;

    std::vector<double> w(count, 0.0);
    for (std::size_t i = 0; i < count; ++i)
        if (i != peak) w[i] = 0.2 + 0.8 * uniform01(rng);

    std::vector<bool> capped(count, false);
    capped[peak] = true;
    std::int64_t remaining = rest;
    // Water-filling: proportional shares, capping at max_value and redistributing.
    for (int round = 0; round < 64 && remaining > 0; ++round) {
        double wsum = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            if (!capped[i]) wsum += w[i];
        if (wsum <= 0.0) break;
        std::int64_t handed = 0;
        bool any_capped = false;
        for (std::size_t i = 0; i < count; ++i) {
            if (capped[i]) continue;
            auto share = static_cast<std::int64_t>(std::floor(static_cast<double>(remaining) * w[i] / wsum));
            if (out[i] + share >= max_value) {
                share = max_value - out[i];
                capped[i] = true;
                any_capped = true;
            }
            out[i] += share;
            handed += share;
        }
        remaining -= handed;
        if (!any_capped) break;
    }
    // Rounding leftovers, spread in index order.
    while (remaining > 0) {
        bool progressed = false;
        for (std::size_t i = 0; i < count && remaining > 0; ++i) {
            if (i == peak || out[i] >= max_value) continue;
            auto add = std::min({remaining, max_value - out[i],
                                 std::max<std::int64_t>(1, remaining / static_cast<std::int64_t>(others))});
            out[i] += add;
            remaining -= add;
            progressed = true;
        }
        if (!progressed) throw std::invalid_argument("split_exact: total exceeds count * max");
    }
    return out;
}

void check_split(const char* what, double total, double max, std::size_t count) {
    if (count == 0) {
        if (total != 0.0 || max != 0.0)
            throw std::invalid_argument(std::string(what) + ": nonzero target for an empty set");
        return;
    }
    if (!(max >= 0.0) || !(total >= max))
        throw std::invalid_argument(std::string(what) + ": total must be >= max >= 0");
    if (total > max * static_cast<double>(count) * (1.0 + 1e-12))
        throw std::invalid_argument(std::string(what) + ": total exceeds count * max");
}

}  // namespace

JobGraph generate_synthetic_profile(const ProfileTargets& t, std::uint64_t seed) {
    const std::size_t n = t.num_ops;
    if (n == 0) throw std::invalid_argument("synthetic profile needs at least one op");
    if (t.depth < 0 || static_cast<std::size_t>(t.depth) >= n)
        throw std::invalid_argument("synthetic profile depth must be in [0, num_ops)");
    const auto layers = static_cast<std::size_t>(t.depth) + 1;
    // Layer 0 holds one source unless the graph is flat.
    const std::size_t sources = layers == 1 ? n : 1;
    const std::size_t tree_edges = n - sources;
    if (t.num_deps < tree_edges)
        throw std::invalid_argument("synthetic profile needs at least " + std::to_string(tree_edges) + " deps");
    check_split("compute", t.total_compute, t.max_compute, n);
    check_split("memory", t.total_memory, t.max_memory, n);
    check_split("dep size", t.total_dep_size, t.max_dep_size, t.num_deps);

    Rng rng(seed);

    // Layer sizes: one node per layer, extras scattered over layers >= 1.
    std::vector<std::size_t> layer_size(layers, 1);
    if (layers == 1) {
        layer_size[0] = n;
    } else {
        for (std::size_t e = 0; e < n - layers; ++e) ++layer_size[1 + uniform_index(rng, layers - 1)];
    }
    std::vector<std::size_t> layer_of;
    std::vector<std::size_t> layer_start(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        layer_start[l] = layer_of.size();
        layer_of.insert(layer_of.end(), layer_size[l], l);
    }

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::set<std::pair<std::size_t, std::size_t>> present;
    for (std::size_t v = 0; v < n; ++v) {
        const auto l = layer_of[v];
        if (l == 0) continue;
        const auto p = layer_start[l - 1] + uniform_index(rng, layer_size[l - 1]);
        edges.emplace_back(p, v);
        present.insert({p, v});
    }
    if (t.num_deps > edges.size()) {
        std::vector<std::pair<std::size_t, std::size_t>> candidates;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (layer_of[a] < layer_of[b] && !present.count({a, b})) candidates.emplace_back(a, b);
        const auto extra = t.num_deps - edges.size();
        if (extra > candidates.size())
            throw std::invalid_argument("synthetic profile: too many deps for the requested depth");
        for (std::size_t i = 0; i < extra; ++i) {
            auto j = i + uniform_index(rng, candidates.size() - i);
            std::swap(candidates[i], candidates[j]);
            edges.push_back(candidates[i]);
        }
        std::sort(edges.begin() + static_cast<std::ptrdiff_t>(n - sources), edges.end());
    }

    const auto compute_us = split_exact(std::llround(t.total_compute * 1e6), std::llround(t.max_compute * 1e6), n,
                                        uniform_index(rng, n), rng);
    const auto memory = split_exact(std::llround(t.total_memory), std::llround(t.max_memory), n,
                                    uniform_index(rng, n), rng);
    const auto sizes = t.num_deps == 0
                           ? std::vector<std::int64_t>{}
                           : split_exact(std::llround(t.total_dep_size), std::llround(t.max_dep_size), t.num_deps,
                                         uniform_index(rng, t.num_deps), rng);

    std::vector<Operation> ops(n);
    for (std::size_t i = 0; i < n; ++i)
        ops[i] = {static_cast<std::int64_t>(i), static_cast<double>(compute_us[i]) / 1e6,
                  static_cast<double>(memory[i]), 0};
    std::vector<Dependency> deps(edges.size());
    for (std::size_t d = 0; d < edges.size(); ++d)
        deps[d] = {static_cast<std::int64_t>(d), static_cast<std::int64_t>(edges[d].first),
                   static_cast<std::int64_t>(edges[d].second), static_cast<double>(sizes[d])};
    return JobGraph(t.model_name, std::move(ops), std::move(deps));
}

std::vector<ProfileTargets> reference_profile_targets() {
    // Counts, depths and byte totals follow the published PipeDream graph
    // characteristics. Where the published sequential time exceeds
    // num_ops * max_op_compute the two cannot both hold; see README.
    return {
        {"ResNet-18", 142, 159, 60, 36668.35, 473.625, 17.25866e9, 0.8221212e9, 18.73329e9, 0.8220836e9},
        {"VGG-16", 82, 83, 80, 7434.448, 113.330, 30.62530e9, 1.644315e9, 29.46706e9, 1.644167e9},
        {"GNMT", 96, 117, 30, 4470.80, 69.856, 2.368447e9, 3.269491e8, 1.027801e9, 0.1944371e9},
        {"SqueezeNet-10", 136, 153, 102, 38000.15, 474.637, 24.96262e9, 1.168007e9, 27.91009e9, 1.167950e9},
        {"AlexNet", 46, 47, 44, 36061.15, 1175.907, 3.046234e9, 0.1983396e9, 2.422161e9, 0.1982464e9},
    };
}

}  // namespace rampsim
