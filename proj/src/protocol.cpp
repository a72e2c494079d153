#include "rampsim/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

namespace rampsim {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::pair<Eigen::Index, Eigen::Index> parse_dims(std::string_view s, std::string_view& body) {
    const auto colon = s.find(':');
    const auto x = s.find('x');
    if (colon == std::string_view::npos || x == std::string_view::npos || x > colon)
        throw ParseError("matrix value must look like RxC:...");
    const auto rows = parse_int(s.substr(0, x));
    const auto cols = parse_int(s.substr(x + 1, colon - x - 1));
    if (rows < 0 || cols < 0) throw ParseError("negative matrix dimension");
    body = s.substr(colon + 1);
    return {rows, cols};
}

std::string format_edges(const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2>& e) {
    std::string out = format_int(e.rows()) + "x2:";
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
        if (i) out += ',';
        out += format_int(e(i, 0)) + ',' + format_int(e(i, 1));
    }
    return out;
}

Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2> parse_edges(std::string_view s) {
    std::string_view body;
    const auto [rows, cols] = parse_dims(s, body);
    if (cols != 2) throw ParseError("edge list must have two columns");
    const auto parts = split(body, ',');
    if (static_cast<Eigen::Index>(parts.size()) != rows * 2) throw ParseError("edge list size does not match dims");
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2> e(rows, 2);
    for (Eigen::Index i = 0; i < rows * 2; ++i) e(i / 2, i % 2) = parse_int(parts[static_cast<std::size_t>(i)]);
    return e;
}

std::string format_vector(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

Eigen::VectorXd parse_vector(std::string_view s) {
    const auto parts = split(s, ',');
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
    return v;
}

std::string format_mask(const std::vector<std::uint8_t>& mask) {
    std::string out;
    for (auto b : mask) out += b ? '1' : '0';
    return out.empty() ? "-" : out;
}

std::vector<std::uint8_t> parse_mask(std::string_view s) {
    std::vector<std::uint8_t> mask;
    if (s == "-") return mask;
    for (char c : s) {
        if (c != '0' && c != '1') throw ParseError("mask must be a string of 0/1 digits");
        mask.push_back(c == '1');
    }
    return mask;
}

}  // namespace

std::string format_matrix(const Eigen::MatrixXd& m) {
    std::string out = format_int(m.rows()) + "x" + format_int(m.cols()) + ":";
    bool first = true;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!first) out += ',';
            first = false;
            out += format_double(m(i, j));
        }
    return out;
}

Eigen::MatrixXd parse_matrix(std::string_view s) {
    std::string_view body;
    const auto [rows, cols] = parse_dims(s, body);
    const auto parts = split(body, ',');
    if (static_cast<Eigen::Index>(parts.size()) != rows * cols) throw ParseError("matrix size does not match dims");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows * cols; ++i) m(i / cols, i % cols) = parse_double(parts[static_cast<std::size_t>(i)]);
    return m;
}

void append_observation(Record& r, const Observation& obs) {
    r.add("t", obs.decision_index)
        .add("op_features", format_matrix(obs.op_features))
        .add("dep_features", format_matrix(obs.dep_features))
        .add("edges", format_edges(obs.edge_list))
        .add("global_job", format_vector(obs.global_job))
        .add("global_cluster", format_vector(obs.global_cluster))
        .add("mask", format_mask(obs.action_mask));
}

Observation read_observation(const Record& r) {
    Observation obs;
    obs.decision_index = r.get_int("t");
    obs.op_features = parse_matrix(r.raw("op_features"));
    obs.dep_features = parse_matrix(r.raw("dep_features"));
    obs.edge_list = parse_edges(r.raw("edges"));
    obs.global_job = parse_vector(r.raw("global_job"));
    obs.global_cluster = parse_vector(r.raw("global_cluster"));
    obs.action_mask = parse_mask(r.raw("mask"));
    if (obs.op_features.cols() != kOpFeatures || obs.dep_features.cols() != kDepFeatures ||
        obs.global_job.size() != kGlobalJobFeatures || obs.global_cluster.size() != kGlobalClusterFeatures)
        throw ParseError("observation feature dimensions are wrong");
    return obs;
}

Record encode_hello(const RampShape& shape, int action_count) {
    return Record("hello")
        .add("version", kProtocolVersion)
        .add("n_c", shape.n_c)
        .add("n_r", shape.n_r)
        .add("n_s", shape.n_s)
        .add("action_count", action_count);
}

Record encode_observation(const Observation& obs) {
    Record r("observation");
    append_observation(r, obs);
    return r;
}

Observation decode_observation(const Record& r) {
    if (r.kind() != "observation") throw ParseError("expected observation, got " + r.kind());
    return read_observation(r);
}

Record encode_transition(const Transition& t) {
    Record r("transition");
    r.add("reward", t.reward)
        .add("done", t.done ? 1 : 0)
        .add("action", t.info.action)
        .add("accepted", t.info.accepted ? 1 : 0)
        .add("reason", std::string(to_string(t.info.reason)))
        .add("jct", t.info.jct)
        .add("jct_seq", t.info.jct_seq)
        .add_string("detail", t.info.detail);
    if (t.observation) append_observation(r, *t.observation);
    return r;
}

Transition decode_transition(const Record& r) {
    if (r.kind() != "transition") throw ParseError("expected transition, got " + r.kind());
    Transition t;
    t.reward = r.get_double("reward");
    t.done = r.get_int("done") != 0;
    t.info.action = static_cast<int>(r.get_int("action"));
    t.info.accepted = r.get_int("accepted") != 0;
    t.info.reason = parse_block_reason(r.raw("reason"));
    t.info.jct = r.get_double("jct");
    t.info.jct_seq = r.get_double("jct_seq");
    t.info.detail = r.get_string("detail");
    if (r.has("op_features")) {
        t.observation = read_observation(r);
        t.info.next_mask = t.observation->action_mask;
    }
    return t;
}

Record encode_metrics(const EpisodeMetrics& m) {
    Record r = m.to_record();
    r.add("types", m.per_type.size());
    for (std::size_t i = 0; i < m.per_type.size(); ++i) {
        const auto& t = m.per_type[i];
        const auto n = std::to_string(i);
        r.add_string("type" + n + "_model", t.model_name)
            .add("type" + n + "_arrived", t.arrived)
            .add("type" + n + "_accepted", t.accepted)
            .add("type" + n + "_blocked", t.blocked);
    }
    return r;
}

EpisodeMetrics decode_metrics(const Record& r) {
    if (r.kind() != "metrics") throw ParseError("expected metrics, got " + r.kind());
    EpisodeMetrics m = EpisodeMetrics::from_records(r);
    const auto types = r.get_int("types");
    for (std::int64_t i = 0; i < types; ++i) {
        const auto n = std::to_string(i);
        m.per_type.push_back({r.get_string("type" + n + "_model"), r.get_int("type" + n + "_arrived"),
                              r.get_int("type" + n + "_accepted"), r.get_int("type" + n + "_blocked")});
    }
    return m;
}

std::string Session::handle(std::string_view line) {
    try {
        const Record req = Record::parse(line);
        const auto& kind = req.kind();
        if (kind == "hello") return encode_hello(env_.shape(), env_.action_count()).to_line();
        if (kind == "reset") {
            Record overrides("sim");
            std::optional<std::uint64_t> seed;
            for (const auto& [k, v] : req.fields()) {
                if (k == "seed")
                    seed = static_cast<std::uint64_t>(parse_int(v));
                else
                    overrides.add(k, v);
            }
            if (!seed) throw ParseError("reset needs seed=");
            return encode_observation(env_.reset(*seed, &overrides)).to_line();
        }
        if (kind == "step") {
            const auto raw = req.find("action");
            if (!raw) throw ParseError("step needs action=");
            std::int64_t action = 0;
            try {
                action = parse_int(*raw);
            } catch (const ParseError&) {
                throw EnvError("malformed action '" + *raw + "': expected an integer");
            }
            if (action < 0 || action > env_.action_count() - 1)
                throw EnvError("malformed action " + *raw + ": expected 0.." + std::to_string(env_.action_count() - 1));
            return encode_transition(env_.step(static_cast<int>(action))).to_line();
        }
        if (kind == "metrics") return encode_metrics(env_.metrics()).to_line();
        if (kind == "close") {
            closed_ = true;
            return Record("bye").to_line();
        }
        throw ParseError("unknown message '" + kind + "'");
    } catch (const std::exception& e) {
        return Record("error").add_string("message", e.what()).to_line();
    }
}

void serve_stream(std::istream& in, std::ostream& out, const EpisodeConfig& base) {
    Session session(base);
    std::string line;
    while (!session.closed() && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out << session.handle(line) << '\n' << std::flush;
    }
}

namespace {

void serve_socket(int fd, const EpisodeConfig& base) {
    Session session(base);
    std::string buffer;
    char chunk[4096];
    while (!session.closed()) {
        const auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while (!session.closed() && (pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::string reply = session.handle(line) + '\n';
            std::size_t sent = 0;
            while (sent < reply.size()) {
                const auto w = ::send(fd, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
                if (w <= 0) {
                    ::close(fd);
                    return;
                }
                sent += static_cast<std::size_t>(w);
            }
        }
    }
    ::close(fd);
}

}  // namespace

void serve_tcp(const std::string& host, int port, const EpisodeConfig& base, const std::atomic<bool>& stop,
               const std::function<void(int)>& on_listening) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    const int yes = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listener);
        throw std::invalid_argument("bad IPv4 address '" + host + "'");
    }
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listener, 16) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listener);
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listening) on_listening(ntohs(addr.sin_port));

    std::vector<std::thread> sessions;
    while (!stop.load()) {
        pollfd pfd{listener, POLLIN, 0};
        if (::poll(&pfd, 1, 100) <= 0) continue;
        const int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0) continue;
        sessions.emplace_back(serve_socket, fd, std::cref(base));
    }
    ::close(listener);
    for (auto& t : sessions) t.join();
}

}  // namespace rampsim
