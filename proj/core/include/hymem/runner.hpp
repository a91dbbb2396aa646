#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/pipeline.hpp"
#include "hymem/synth.hpp"
#include "hymem/telemetry.hpp"
#include "hymem/trace.hpp"

namespace hymem {

/// Where a run's requests come from.
struct TraceSource {
    enum class Kind : std::uint8_t { File, Synthetic, Records };

    Kind kind = Kind::Records;
    std::string path;                // File
    SynthParams synth;               // Synthetic
    std::vector<TraceRecord> records; // Records
    std::string label;               // echoed in the report

    static TraceSource file(std::string path);
    static TraceSource synthetic(SynthParams p, std::string label = "synthetic");
    static TraceSource in_memory(std::vector<TraceRecord> records, std::string label = "records");
};

struct RunHooks {
    /// Every released response with the arrival of its request.
    ResponseCallback on_response;
    /// Every request right before ingestion, with its assigned payload.
    std::function<void(const MemoryRequest&)> on_request;
};

struct TraceTotals {
    std::uint64_t requests = 0;
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;
};

struct RunResult {
    std::string report; // JSON, stable key order
    CounterSet counters;
    PipelineStats stats;
    TraceTotals totals;
    SimTime run_length;
    std::uint64_t image_checksum = 0;
    std::uint64_t read_digest = 0; // FNV-1a over (tag, data) of read responses in release order
    std::uint64_t nvm_pages = 0;
    std::uint64_t mapped_pages = 0;
    std::uint64_t allocation_spill = 0;
    bool quiescent = false;
};

/// Simulates `source` to quiescence under `cfg` and renders the report.
/// `seed` overrides cfg.seed when set; it drives synthesis and write data.
RunResult run_simulation(const SimConfig& cfg, const TraceSource& source, std::optional<std::uint64_t> seed = {},
                         const RunHooks& hooks = {});

/// One line of a sweep plan: `config=<file> trace=<file>|synthetic=<spec> seed=<n> report=<file>`.
struct SweepJob {
    std::string config;
    std::optional<std::string> trace;
    std::optional<std::string> synthetic;
    std::optional<std::uint64_t> seed;
    std::string report;
    std::size_t line = 0;
};

std::vector<SweepJob> parse_sweep_plan(const std::string& path);

struct SweepOutcome {
    std::size_t line = 0;
    int exit_code = 0; // 0 ok, 1 parse/config error, 2 invariant breach
    std::string message;
};

/// Runs every job, `jobs` at a time; each simulation is independent.
std::vector<SweepOutcome> run_sweep(const std::vector<SweepJob>& plan, unsigned jobs);

} // namespace hymem
