#include "rampsim/text_record.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace rampsim {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

std::string format_int(std::int64_t v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_int: conversion failed");
    return std::string(buf, end);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

std::int64_t parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("not an integer: '" + std::string(s) + "'");
    return v;
}

std::string escape_value(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (unsigned char ch : s) {
        if (ch <= ' ' || ch == '=' || ch == '%' || ch >= 0x7f) {
            out.push_back('%');
            out.push_back(hex[ch >> 4]);
            out.push_back(hex[ch & 0xf]);
        } else {
            out.push_back(static_cast<char>(ch));
        }
    }
    return out;
}

std::string unescape_value(std::string_view s) {
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw ParseError("bad escape in '" + std::string(s) + "'");
    };
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%') {
            if (i + 2 >= s.size()) throw ParseError("truncated escape");
            out.push_back(static_cast<char>(nibble(s[i + 1]) * 16 + nibble(s[i + 2])));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

Record& Record::add(std::string key, std::string raw_value) {
    fields_.emplace_back(std::move(key), std::move(raw_value));
    return *this;
}

bool Record::has(std::string_view key) const {
    for (const auto& [k, v] : fields_)
        if (k == key) return true;
    return false;
}

const std::string& Record::raw(std::string_view key) const {
    for (const auto& [k, v] : fields_)
        if (k == key) return v;
    throw ParseError("record '" + kind_ + "' has no field '" + std::string(key) + "'");
}

std::optional<std::string> Record::find(std::string_view key) const {
    for (const auto& [k, v] : fields_)
        if (k == key) return v;
    return std::nullopt;
}

double Record::get_double(std::string_view key) const { return parse_double(raw(key)); }
std::int64_t Record::get_int(std::string_view key) const { return parse_int(raw(key)); }
std::string Record::get_string(std::string_view key) const { return unescape_value(raw(key)); }

double Record::get_double_or(std::string_view key, double fallback) const {
    auto v = find(key);
    return v ? parse_double(*v) : fallback;
}

std::int64_t Record::get_int_or(std::string_view key, std::int64_t fallback) const {
    auto v = find(key);
    return v ? parse_int(*v) : fallback;
}

std::string Record::to_line() const {
    std::string out = kind_;
    for (const auto& [k, v] : fields_) {
        out.push_back(' ');
        out += k;
        out.push_back('=');
        out += v;
    }
    return out;
}

Record Record::parse(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        return line.substr(start, pos - start);
    };
    auto kind = next_token();
    if (kind.empty()) throw ParseError("empty record");
    Record rec{std::string(kind)};
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ParseError("malformed field '" + std::string(tok) + "' in record '" + rec.kind_ + "'");
        rec.add(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
    }
    return rec;
}

std::vector<Record> read_records(std::istream& in) {
    std::vector<Record> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            out.push_back(Record::parse(line));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Record> read_records_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return read_records(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_records(std::ostream& out, const std::vector<Record>& records) {
    for (const auto& r : records) out << r.to_line() << '\n';
}

}  // namespace rampsim
