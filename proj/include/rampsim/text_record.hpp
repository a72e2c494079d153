#pragma once

// Line-oriented structured text shared by every file format and by the wire
// protocol. One record per line:
//
//   kind key=value key=value ...
//
// Values never contain whitespace; strings are percent-escaped. Doubles are
// written in shortest round-trip form so write -> read -> write is byte-exact.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rampsim {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_double(double v);
std::string format_int(std::int64_t v);
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);

std::string escape_value(std::string_view s);
std::string unescape_value(std::string_view s);

class Record {
public:
    Record() = default;
    explicit Record(std::string kind) : kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

    Record& add(std::string key, std::string raw_value);
    Record& add(std::string key, double v) { return add(std::move(key), format_double(v)); }
    Record& add(std::string key, std::int64_t v) { return add(std::move(key), format_int(v)); }
    Record& add(std::string key, int v) { return add(std::move(key), format_int(v)); }
    Record& add(std::string key, std::size_t v) {
        return add(std::move(key), format_int(static_cast<std::int64_t>(v)));
    }
    Record& add_string(std::string key, std::string_view v) { return add(std::move(key), escape_value(v)); }

    bool has(std::string_view key) const;
    const std::string& raw(std::string_view key) const;
    std::optional<std::string> find(std::string_view key) const;
    double get_double(std::string_view key) const;
    std::int64_t get_int(std::string_view key) const;
    std::string get_string(std::string_view key) const;
    double get_double_or(std::string_view key, double fallback) const;
    std::int64_t get_int_or(std::string_view key, std::int64_t fallback) const;

    const std::vector<std::pair<std::string, std::string>>& fields() const { return fields_; }

    std::string to_line() const;
    static Record parse(std::string_view line);

private:
    std::string kind_;
    std::vector<std::pair<std::string, std::string>> fields_;
};

/// Reads every non-blank, non-comment ('#') line of a stream as a record.
std::vector<Record> read_records(std::istream& in);
std::vector<Record> read_records_file(const std::string& path);
void write_records(std::ostream& out, const std::vector<Record>& records);

}  // namespace rampsim
