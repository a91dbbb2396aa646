#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/types.hpp"

namespace hymem {

/// One line of a trace: `R|W <hex addr> <size> [+gap]`. The gap counts
/// cycles since the previous record's arrival.
struct TraceRecord {
    Op op = Op::Read;
    HostAddress addr;
    std::uint32_t size = 64;
    Cycles gap = 1;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceIssue {
    std::size_t line = 0;
    std::string message;
};

/// Parses one line. Returns nullopt for blank and comment-only lines; on a
/// malformed line returns nullopt and sets `error`.
std::optional<TraceRecord> parse_trace_line(std::string_view line, std::string& error);

/// Checks a parsed record against the window and page size of `cfg`.
std::optional<std::string> check_record(const TraceRecord& r, const SimConfig& cfg);

/// Every problem in the stream, one entry per offending line.
std::vector<TraceIssue> validate_trace(std::istream& in, const SimConfig& cfg);
std::vector<TraceIssue> validate_trace(const std::string& path, const SimConfig& cfg);

std::string format_record(const TraceRecord& r);

/// Streaming reader; throws Error(ParseError) naming the line on the first
/// malformed record.
class TraceReader {
public:
    TraceReader(std::istream& in, const SimConfig& cfg) : in_(in), cfg_(cfg) {}

    std::optional<TraceRecord> next();
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    const SimConfig& cfg_;
    std::size_t line_ = 0;
};

/// Deterministic write data for the request with `tag` under `seed`.
Bytes make_payload(std::uint64_t seed, Tag tag, std::uint32_t size);

/// SplitMix64 step; the mixing function behind make_payload and seeding.
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace hymem
