#include "hymem/trace.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>

namespace hymem {

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_number(std::string_view s, int base, std::uint64_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
    return ec == std::errc{} && p == s.data() + s.size();
}

} // namespace

std::optional<TraceRecord> parse_trace_line(std::string_view line, std::string& error) {
    error.clear();
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto f = fields_of(line);
    if (f.empty()) return std::nullopt;
    if (f.size() < 3 || f.size() > 4) {
        error = "expected 'R|W <hex addr> <size> [+gap]'";
        return std::nullopt;
    }
    TraceRecord r;
    if (f[0] == "R" || f[0] == "r") r.op = Op::Read;
    else if (f[0] == "W" || f[0] == "w") r.op = Op::Write;
    else {
        error = "unknown op '" + std::string(f[0]) + "'";
        return std::nullopt;
    }
    std::string_view addr = f[1];
    if (addr.size() > 2 && addr[0] == '0' && (addr[1] == 'x' || addr[1] == 'X')) addr.remove_prefix(2);
    std::uint64_t a = 0;
    if (!parse_number(addr, 16, a)) {
        error = "bad hex address '" + std::string(f[1]) + "'";
        return std::nullopt;
    }
    r.addr = HostAddress{a};
    std::uint64_t size = 0;
    if (!parse_number(f[2], 10, size)) {
        error = "bad size '" + std::string(f[2]) + "'";
        return std::nullopt;
    }
    if (!is_pow2(size) || size > 4096) {
        error = "size " + std::string(f[2]) + " is not a power of two in 1..4096";
        return std::nullopt;
    }
    r.size = static_cast<std::uint32_t>(size);
    if (f.size() == 4) {
        std::string_view g = f[3];
        if (g.empty() || g[0] != '+' || !parse_number(g.substr(1), 10, r.gap)) {
            error = "bad gap '" + std::string(f[3]) + "', expected +<cycles>";
            return std::nullopt;
        }
    }
    return r;
}

std::optional<std::string> check_record(const TraceRecord& r, const SimConfig& cfg) {
    if (r.size > cfg.page_size)
        return "size " + std::to_string(r.size) + " exceeds page_size " + std::to_string(cfg.page_size);
    if (!cfg.in_window(r.addr) || r.addr.value + r.size > cfg.window_end())
        return "address " + to_hex(r.addr.value) + " is outside the window [" + to_hex(cfg.window_base.value) + ", " +
               to_hex(cfg.window_end()) + ")";
    return std::nullopt;
}

std::vector<TraceIssue> validate_trace(std::istream& in, const SimConfig& cfg) {
    std::vector<TraceIssue> issues;
    std::string line;
    std::string error;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto r = parse_trace_line(line, error);
        if (!error.empty()) {
            issues.push_back({n, error});
            continue;
        }
        if (!r) continue;
        if (auto problem = check_record(*r, cfg)) issues.push_back({n, *problem});
    }
    return issues;
}

std::vector<TraceIssue> validate_trace(const std::string& path, const SimConfig& cfg) {
    std::ifstream in(path);
    if (!in) return {TraceIssue{0, "cannot open trace file '" + path + "'"}};
    return validate_trace(in, cfg);
}

std::string format_record(const TraceRecord& r) {
    std::string out = r.op == Op::Read ? "R " : "W ";
    out += to_hex(r.addr.value);
    out += ' ';
    out += std::to_string(r.size);
    if (r.gap != 1) out += " +" + std::to_string(r.gap);
    return out;
}

std::optional<TraceRecord> TraceReader::next() {
    std::string text;
    std::string error;
    while (std::getline(in_, text)) {
        ++line_;
        auto r = parse_trace_line(text, error);
        if (!error.empty()) fail(Errc::ParseError, "trace line " + std::to_string(line_) + ": " + error);
        if (!r) continue;
        if (auto problem = check_record(*r, cfg_))
            fail(Errc::ParseError, "trace line " + std::to_string(line_) + ": " + *problem);
        return r;
    }
    return std::nullopt;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Bytes make_payload(std::uint64_t seed, Tag tag, std::uint32_t size) {
    Bytes out(size);
    std::uint64_t state = seed ^ (tag * 0xd1342543de82ef95ULL);
    for (std::uint32_t i = 0; i < size; i += 8) {
        std::uint64_t v = splitmix64(state);
        std::size_t n = std::min<std::size_t>(8, size - i);
        for (std::size_t b = 0; b < n; ++b) out[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    return out;
}

} // namespace hymem
