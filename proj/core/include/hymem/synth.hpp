#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hymem/allocator.hpp"
#include "hymem/config.hpp"
#include "hymem/trace.hpp"

namespace hymem {

enum class Locality : std::uint8_t { Uniform, Zipfian, Sequential };

std::string_view to_string(Locality l);

/// `alloc <name> <bytes> [dram|nvm]`
struct AllocDirective {
    std::string name;
    std::uint64_t bytes = 0;
    AllocationHint hint = AllocationHint::NoPreference;
};

struct SynthParams {
    std::uint64_t footprint = 64 * MiB; // ignored when allocs are given
    std::uint64_t requests = 100'000;
    double read_fraction = 0.7;
    Locality locality = Locality::Uniform;
    double zipf_s = 0.99;
    std::uint32_t request_size = 64;
    Cycles gap = 1;
    /// Touch every footprint page once, in order, before following the
    /// locality model. Needs requests >= footprint pages to reach the full
    /// footprint.
    bool cover = true;
    std::vector<AllocDirective> allocs;
};

/// Accepts either a workload file (`key = value` lines plus `alloc`
/// directives) or an inline `key=value,key=value` list.
SynthParams parse_synth_spec(const std::string& spec_or_path);
SynthParams parse_synth_text(const std::string& text, bool inline_form);

/// Deterministic request stream for fixed (cfg, params, seed).
class TraceSynthesizer {
public:
    /// `pages` lists the host pages the workload may touch, in address
    /// order; empty means the first footprint bytes of the window. Throws
    /// FootprintTooLarge when the footprint does not fit the window.
    TraceSynthesizer(const SimConfig& cfg, SynthParams params, std::uint64_t seed, std::vector<HostPage> pages = {});

    std::optional<TraceRecord> next();
    std::uint64_t footprint_pages() const { return pages_.empty() ? identity_pages_ : pages_.size(); }
    const SynthParams& params() const { return params_; }

private:
    std::uint64_t uniform_below(std::uint64_t n);
    double uniform01();
    std::uint64_t pick_page_index();
    HostPage page_at(std::uint64_t index) const { return pages_.empty() ? index : pages_[index]; }

    SimConfig cfg_;
    SynthParams params_;
    std::mt19937_64 rng_;
    std::vector<HostPage> pages_;
    std::uint64_t identity_pages_ = 0;
    std::vector<double> zipf_cdf_;
    std::vector<std::uint32_t> zipf_rank_to_index_;
    std::uint64_t emitted_ = 0;
    std::uint64_t stream_pos_ = 0;
};

/// Runs the synthesizer to completion.
std::vector<TraceRecord> synthesize(const SimConfig& cfg, const SynthParams& params, std::uint64_t seed,
                                    std::vector<HostPage> pages = {});

} // namespace hymem
