#include "hymem/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace hymem {

std::string_view to_string(Locality l) {
    switch (l) {
    case Locality::Uniform: return "uniform";
    case Locality::Zipfian: return "zipfian";
    case Locality::Sequential: return "sequential";
    }
    return "?";
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    is.imbue(std::locale::classic());
    double d = 0;
    if (!(is >> d) || !is.eof()) fail(Errc::ParseError, key + ": not a number '" + v + "'");
    return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        return parse_size(v);
    } catch (const Error&) {
        fail(Errc::ParseError, key + ": not an unsigned integer '" + v + "'");
    }
}

AllocationHint to_hint(const std::string& v) {
    if (v.empty() || v == "none" || v == "any") return AllocationHint::NoPreference;
    if (v == "dram") return AllocationHint::PreferDRAM;
    if (v == "nvm") return AllocationHint::PreferNVM;
    fail(Errc::ParseError, "alloc hint must be dram or nvm, got '" + v + "'");
}

void apply(SynthParams& p, const std::string& key, const std::string& value) {
    if (key == "footprint") p.footprint = to_u64(key, value);
    else if (key == "requests") p.requests = to_u64(key, value);
    else if (key == "read_fraction" || key == "read") p.read_fraction = to_double(key, value);
    else if (key == "zipf_s") p.zipf_s = to_double(key, value);
    else if (key == "request_size" || key == "size") {
        auto s = to_u64(key, value);
        if (!is_pow2(s) || s > 4096) fail(Errc::InvalidValue, "request_size must be a power of two in 1..4096");
        p.request_size = static_cast<std::uint32_t>(s);
    } else if (key == "gap") p.gap = to_u64(key, value);
    else if (key == "cover") p.cover = value == "true" || value == "1" || value == "yes";
    else if (key == "locality") {
        if (value == "uniform") p.locality = Locality::Uniform;
        else if (value == "zipf" || value == "zipfian") p.locality = Locality::Zipfian;
        else if (value == "sequential" || value == "stream") p.locality = Locality::Sequential;
        else fail(Errc::ParseError, "locality must be uniform, zipf or sequential");
    } else if (key == "alloc") {
        // inline form name:bytes[:hint]
        std::vector<std::string> parts;
        std::stringstream ss(value);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
        if (parts.size() < 2 || parts.size() > 3) fail(Errc::ParseError, "alloc expects name:bytes[:dram|nvm]");
        p.allocs.push_back({parts[0], to_u64("alloc", parts[1]), to_hint(parts.size() == 3 ? parts[2] : "")});
    } else {
        fail(Errc::UnknownKey, "unknown workload key '" + key + "'");
    }
}

} // namespace

SynthParams parse_synth_text(const std::string& text, bool inline_form) {
    SynthParams p;
    if (inline_form) {
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ',');) {
            item = trim(item);
            if (item.empty()) continue;
            auto eq = item.find('=');
            if (eq == std::string::npos) fail(Errc::ParseError, "expected key=value in '" + item + "'");
            apply(p, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
        }
    } else {
        std::stringstream ss(text);
        std::size_t lineno = 0;
        for (std::string line; std::getline(ss, line);) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            try {
                if (line.rfind("alloc ", 0) == 0 || line.rfind("alloc\t", 0) == 0) {
                    std::istringstream ls(line);
                    std::string kw, name, bytes, hint;
                    ls >> kw >> name >> bytes >> hint;
                    if (name.empty() || bytes.empty()) fail(Errc::ParseError, "expected 'alloc <name> <bytes> [dram|nvm]'");
                    std::string extra;
                    if (ls >> extra) fail(Errc::ParseError, "trailing text after alloc directive");
                    p.allocs.push_back({name, to_u64("alloc", bytes), to_hint(hint)});
                    continue;
                }
                auto eq = line.find('=');
                if (eq == std::string::npos) fail(Errc::ParseError, "expected 'key = value'");
                apply(p, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
            } catch (const Error& e) {
                fail(e.code(), "workload line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }
    if (p.read_fraction < 0.0 || p.read_fraction > 1.0) fail(Errc::InvalidValue, "read_fraction must lie in [0, 1]");
    if (p.locality == Locality::Zipfian && !(p.zipf_s > 0.0)) fail(Errc::InvalidValue, "zipf_s must be positive");
    return p;
}

SynthParams parse_synth_spec(const std::string& spec_or_path) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(spec_or_path, ec)) {
        std::ifstream in(spec_or_path);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_synth_text(buf.str(), false);
    }
    return parse_synth_text(spec_or_path, true);
}

TraceSynthesizer::TraceSynthesizer(const SimConfig& cfg, SynthParams params, std::uint64_t seed,
                                   std::vector<HostPage> pages)
    : cfg_(cfg), params_(std::move(params)), rng_(seed), pages_(std::move(pages)) {
    if (params_.request_size > cfg_.page_size)
        fail(Errc::InvalidValue, "request_size exceeds page_size");
    if (pages_.empty()) {
        if (params_.footprint > cfg_.window_size())
            fail(Errc::FootprintTooLarge, "footprint " + std::to_string(params_.footprint) +
                                              " exceeds the window size " + std::to_string(cfg_.window_size()));
        if (params_.footprint == 0) fail(Errc::InvalidValue, "footprint must be positive");
        identity_pages_ = (params_.footprint + cfg_.page_size - 1) / cfg_.page_size;
    }
    const std::uint64_t n = footprint_pages();
    if (params_.locality == Locality::Zipfian) {
        zipf_cdf_.resize(n);
        double acc = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            acc += 1.0 / std::pow(static_cast<double>(k + 1), params_.zipf_s);
            zipf_cdf_[k] = acc;
        }
        for (auto& c : zipf_cdf_) c /= acc;
        // hot ranks land on scattered pages
        zipf_rank_to_index_.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) zipf_rank_to_index_[i] = static_cast<std::uint32_t>(i);
        for (std::uint64_t i = n; i > 1; --i) std::swap(zipf_rank_to_index_[i - 1], zipf_rank_to_index_[uniform_below(i)]);
    }
}

std::uint64_t TraceSynthesizer::uniform_below(std::uint64_t n) {
    // rejection sampling keeps the result exactly uniform and portable
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng_();
    } while (x >= limit);
    return x % n;
}

double TraceSynthesizer::uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

std::uint64_t TraceSynthesizer::pick_page_index() {
    const std::uint64_t n = footprint_pages();
    if (params_.locality == Locality::Zipfian) {
        double u = uniform01();
        auto it = std::lower_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
        auto rank = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - zipf_cdf_.begin(), n - 1));
        return zipf_rank_to_index_[rank];
    }
    return uniform_below(n);
}

std::optional<TraceRecord> TraceSynthesizer::next() {
    if (emitted_ >= params_.requests) return std::nullopt;
    const std::uint64_t n = footprint_pages();
    const std::uint64_t slots = cfg_.page_size / params_.request_size;

    TraceRecord r;
    r.size = params_.request_size;
    r.gap = params_.gap;
    r.op = uniform01() < params_.read_fraction ? Op::Read : Op::Write;

    std::uint64_t index = 0;
    std::uint64_t offset = 0;
    if (params_.locality == Locality::Sequential) {
        const std::uint64_t span = n * slots;
        const std::uint64_t slot = stream_pos_++ % span;
        index = slot / slots;
        offset = (slot % slots) * params_.request_size;
    } else {
        index = params_.cover && emitted_ < n ? emitted_ : pick_page_index();
        offset = uniform_below(slots) * params_.request_size;
    }
    r.addr = HostAddress{cfg_.window_base.value + page_at(index) * cfg_.page_size + offset};
    ++emitted_;
    return r;
}

std::vector<TraceRecord> synthesize(const SimConfig& cfg, const SynthParams& params, std::uint64_t seed,
                                    std::vector<HostPage> pages) {
    TraceSynthesizer s(cfg, params, seed, std::move(pages));
    std::vector<TraceRecord> out;
    out.reserve(params.requests);
    while (auto r = s.next()) out.push_back(*r);
    return out;
}

} // namespace hymem
