#pragma once

// Newline-delimited request/response protocol over one Env per session.
//
//   > hello                       < hello version= n_c= n_r= n_s= action_count=
//   > reset seed=S [overrides]    < observation ...
//   > step action=U               < transition reward= done= ... [observation fields]
//   > metrics                     < metrics ...
//   > close                       < bye
//
// Any failure answers `error message=...` and leaves the session usable.
// Matrices are written row-major as `RxC:v,v,...`; the action mask as a
// string of 0/1 digits for u = 1..N_W/2.

#include <atomic>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rampsim/env.hpp"
#include "rampsim/text_record.hpp"

namespace rampsim {

constexpr int kProtocolVersion = 1;

std::string format_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd parse_matrix(std::string_view s);

void append_observation(Record& r, const Observation& obs);
Observation read_observation(const Record& r);

Record encode_hello(const RampShape& shape, int action_count);
Record encode_observation(const Observation& obs);
Record encode_transition(const Transition& t);
Record encode_metrics(const EpisodeMetrics& m);

Observation decode_observation(const Record& r);
Transition decode_transition(const Record& r);
EpisodeMetrics decode_metrics(const Record& r);

class Session {
public:
    explicit Session(EpisodeConfig base) : env_(std::move(base)) {}

    /// One request line in, one response line out (without newline).
    std::string handle(std::string_view line);
    bool closed() const { return closed_; }

private:
    Env env_;
    bool closed_ = false;
};

/// Serves one session over a stream pair until `close` or end of input.
void serve_stream(std::istream& in, std::ostream& out, const EpisodeConfig& base);

/// Accepts TCP connections on host:port, one thread and session each, until
/// `stop` becomes true. `on_listening` receives the bound port (useful with
/// port 0).
void serve_tcp(const std::string& host, int port, const EpisodeConfig& base, const std::atomic<bool>& stop,
               const std::function<void(int)>& on_listening = {});

}  // namespace rampsim
