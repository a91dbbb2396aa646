#include "hymem/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace hymem {

std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::CapacityNotPageMultiple: return "CapacityNotPageMultiple";
    case Errc::BlockNotDividingPage: return "BlockNotDividingPage";
    case Errc::ZeroCapacity: return "ZeroCapacity";
    case Errc::NotPowerOfTwo: return "NotPowerOfTwo";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::ParseError: return "ParseError";
    case Errc::OutOfWindow: return "OutOfWindow";
    case Errc::UnmappedPage: return "UnmappedPage";
    case Errc::SwapPagesIdentical: return "SwapPagesIdentical";
    case Errc::SwapInProgress: return "SwapInProgress";
    case Errc::SamePage: return "SamePage";
    case Errc::SameDevice: return "SameDevice";
    case Errc::UnknownTag: return "UnknownTag";
    case Errc::DuplicateCompletion: return "DuplicateCompletion";
    case Errc::OutOfMemory: return "OutOfMemory";
    case Errc::UnknownAllocation: return "UnknownAllocation";
    case Errc::FootprintTooLarge: return "FootprintTooLarge";
    case Errc::MissingEnergyCoefficients: return "MissingEnergyCoefficients";
    case Errc::InvariantBreach: return "InvariantBreach";
    }
    return "Unknown";
}

std::string_view to_string(Device d) { return d == Device::DRAM ? "dram" : "nvm"; }
std::string_view to_string(Op op) { return op == Op::Read ? "read" : "write"; }

std::array<DeviceTimingConfig, kNumDevices> SimConfig::default_timing() {
    DeviceTimingConfig dram;
    DeviceTimingConfig nvm;
    nvm.target_read_ns = kXPointReadNsHigh;
    nvm.target_write_ns = kXPointWriteNsHigh;
    return {dram, nvm};
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::string out = "invalid configuration:";
    for (const auto& i : issues) {
        out += "\n  ";
        out += to_string(i.code);
        out += " [" + i.field + "]: " + i.message;
    }
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::uint64_t parse_u64(const std::string& text) {
    std::string t = trim(text);
    int base = 10;
    std::string_view digits = t;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
        base = 16;
        digits.remove_prefix(2);
    }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (ec != std::errc{} || p != digits.data() + digits.size() || digits.empty())
        fail(Errc::ParseError, "not an unsigned integer: '" + t + "'");
    return v;
}

bool parse_bool(const std::string& text) {
    auto t = lower(trim(text));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    fail(Errc::ParseError, "not a boolean: '" + t + "'");
}

double parse_double(const std::string& text) {
    auto t = trim(text);
    std::istringstream is(t);
    is.imbue(std::locale::classic());
    double v = 0;
    if (!(is >> v) || !is.eof()) fail(Errc::ParseError, "not a number: '" + t + "'");
    return v;
}

template <typename T>
T narrow(std::uint64_t v, const std::string& key) {
    if (v > std::numeric_limits<T>::max()) fail(Errc::InvalidValue, key + " out of range");
    return static_cast<T>(v);
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << v;
    return os.str();
}

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(issues.empty() ? Errc::InvalidValue : issues.front().code, join_issues(issues)),
      issues_(std::move(issues)) {}

std::uint64_t parse_size(const std::string& text) {
    std::string t = trim(text);
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) return parse_u64(t);
    std::size_t split = 0;
    while (split < t.size() && std::isdigit(static_cast<unsigned char>(t[split]))) ++split;
    if (split == 0) fail(Errc::ParseError, "not a size: '" + t + "'");
    std::uint64_t n = parse_u64(t.substr(0, split));
    auto unit = lower(trim(t.substr(split)));
    std::uint64_t mul = 1;
    if (unit.empty() || unit == "b") mul = 1;
    else if (unit == "k" || unit == "kb" || unit == "kib") mul = KiB;
    else if (unit == "m" || unit == "mb" || unit == "mib") mul = MiB;
    else if (unit == "g" || unit == "gb" || unit == "gib") mul = GiB;
    else fail(Errc::ParseError, "unknown size unit '" + unit + "'");
    if (n != 0 && mul > std::numeric_limits<std::uint64_t>::max() / n)
        fail(Errc::ParseError, "size overflows: '" + t + "'");
    return n * mul;
}

std::vector<ConfigIssue> config_issues(const SimConfig& cfg) {
    std::vector<ConfigIssue> out;
    auto add = [&](Errc c, std::string field, std::string msg) {
        out.push_back({c, std::move(field), std::move(msg)});
    };

    if (!is_pow2(cfg.page_size)) add(Errc::NotPowerOfTwo, "page_size", "page_size must be a power of two");
    if (cfg.dma_block == 0 || !is_pow2(cfg.dma_block))
        add(Errc::NotPowerOfTwo, "dma.block_bytes", "dma block must be a power of two");
    else if (cfg.page_size == 0 || cfg.page_size % cfg.dma_block != 0)
        add(Errc::BlockNotDividingPage, "dma.block_bytes", "dma block must divide page_size");

    const std::pair<const char*, std::uint64_t> caps[] = {{"dram.capacity", cfg.dram_capacity},
                                                          {"nvm.capacity", cfg.nvm_capacity}};
    for (const auto& [field, cap] : caps) {
        if (cap == 0) add(Errc::ZeroCapacity, field, std::string(field) + " must be non-zero");
        else if (cfg.page_size != 0 && cap % cfg.page_size != 0)
            add(Errc::CapacityNotPageMultiple, field, std::string(field) + " must be a multiple of page_size");
    }
    if (cfg.window_base.value > std::numeric_limits<std::uint64_t>::max() - cfg.window_size())
        add(Errc::InvalidValue, "window_base", "window overflows the 64-bit address space");
    if (cfg.page_size != 0 && cfg.window_base.value % cfg.page_size != 0)
        add(Errc::InvalidValue, "window_base", "window_base must be page aligned");

    if (cfg.dma_buffer_blocks == 0) add(Errc::InvalidValue, "dma.buffer_blocks", "must be >= 1");
    if (cfg.dma_max_jobs == 0) add(Errc::InvalidValue, "dma.max_jobs", "must be >= 1");
    if (cfg.cycle_scale.ns_num == 0 || cfg.cycle_scale.ns_den == 0)
        add(Errc::InvalidValue, "ns_per_cycle", "must be a positive rational");

    for (Device d : kDevices) {
        const auto& t = cfg.timing_of(d);
        std::string p(to_string(d));
        if (t.base_read_cycles == 0) add(Errc::InvalidValue, p + ".read_cycles", "must be > 0");
        if (t.base_write_cycles == 0) add(Errc::InvalidValue, p + ".write_cycles", "must be > 0");
        if (t.target_read_ns == 0) add(Errc::InvalidValue, p + ".read_ns", "must be > 0");
        if (t.target_write_ns == 0) add(Errc::InvalidValue, p + ".write_ns", "must be > 0");
        if (t.base_ns == 0) add(Errc::InvalidValue, "base.ns", "must be > 0");
        if (t.outstanding_slots == 0) add(Errc::InvalidValue, p + ".outstanding_slots", "must be >= 1");
    }

    if (cfg.policy.epoch_cycles == 0) add(Errc::InvalidValue, "policy.epoch_cycles", "must be > 0");
    if (!(cfg.policy.dram_watermark >= 0.0 && cfg.policy.dram_watermark <= 1.0))
        add(Errc::InvalidValue, "policy.dram_watermark", "must lie in [0, 1]");
    if (cfg.report_energy && !cfg.energy_coeffs)
        add(Errc::MissingEnergyCoefficients, "energy",
            "report.energy requested but energy.<dev>.{read,write}_pj_per_byte are not all set");
    return out;
}

SimConfig validate_config(const SimConfig& cfg) {
    auto issues = config_issues(cfg);
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return cfg;
}

namespace {

// Energy coefficients are all-or-nothing; partial settings are collected here
// and folded into SimConfig once parsing is done.
struct PartialEnergy {
    std::array<std::optional<std::uint64_t>, 4> v; // dram.rd, dram.wr, nvm.rd, nvm.wr
    bool any() const {
        return std::any_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); });
    }
    bool all() const {
        return std::all_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); });
    }
};

bool apply_device_key(SimConfig& cfg, Device d, const std::string& leaf, const std::string& value,
                      const std::string& key) {
    auto& t = cfg.timing_of(d);
    if (leaf == "capacity") (d == Device::DRAM ? cfg.dram_capacity : cfg.nvm_capacity) = parse_size(value);
    else if (leaf == "read_ns") t.target_read_ns = parse_u64(value);
    else if (leaf == "write_ns") t.target_write_ns = parse_u64(value);
    else if (leaf == "read_cycles") t.base_read_cycles = parse_u64(value);
    else if (leaf == "write_cycles") t.base_write_cycles = parse_u64(value);
    else if (leaf == "read_stall_cycles") t.read_stall_override = parse_u64(value);
    else if (leaf == "write_stall_cycles") t.write_stall_override = parse_u64(value);
    else if (leaf == "outstanding_slots") t.outstanding_slots = narrow<std::uint32_t>(parse_u64(value), key);
    else return false;
    return true;
}

void apply_key(SimConfig& cfg, PartialEnergy& energy, const std::string& key, const std::string& value) {
    auto dot = key.find('.');
    std::string head = key.substr(0, dot);
    std::string leaf = dot == std::string::npos ? std::string{} : key.substr(dot + 1);

    if (key == "window_base") cfg.window_base = HostAddress{parse_u64(value)};
    else if (key == "page_size") cfg.page_size = parse_size(value);
    else if (key == "dma.block_bytes") cfg.dma_block = parse_size(value);
    else if (key == "dma.buffer_blocks") cfg.dma_buffer_blocks = narrow<std::uint32_t>(parse_u64(value), key);
    else if (key == "dma.max_jobs") cfg.dma_max_jobs = narrow<std::uint32_t>(parse_u64(value), key);
    else if (key == "link.latency_cycles") cfg.link_latency = parse_u64(value);
    else if (key == "control.delay_cycles") cfg.control_delay = parse_u64(value);
    else if (key == "posted_writes") cfg.posted_writes = parse_bool(value);
    else if (key == "seed") cfg.seed = parse_u64(value);
    else if (key == "report.energy") cfg.report_energy = parse_bool(value);
    else if (key == "base.ns") {
        auto ns = parse_u64(value);
        for (auto& t : cfg.timing) t.base_ns = ns;
    } else if (key == "device.outstanding_slots") {
        auto slots = narrow<std::uint32_t>(parse_u64(value), key);
        for (auto& t : cfg.timing) t.outstanding_slots = slots;
    } else if (key == "ns_per_cycle") {
        auto v = trim(value);
        auto slash = v.find('/');
        if (slash == std::string::npos) cfg.cycle_scale = {parse_u64(v), 1};
        else cfg.cycle_scale = {parse_u64(v.substr(0, slash)), parse_u64(v.substr(slash + 1))};
    } else if (key == "nvm.latency_point") {
        auto v = lower(trim(value));
        auto& t = cfg.timing_of(Device::NVM);
        if (v == "upper") {
            t.target_read_ns = kXPointReadNsHigh;
            t.target_write_ns = kXPointWriteNsHigh;
        } else if (v == "lower") {
            t.target_read_ns = kXPointReadNsLow;
            t.target_write_ns = kXPointWriteNsLow;
        } else {
            fail(Errc::InvalidValue, "nvm.latency_point must be upper or lower");
        }
    } else if (key == "policy") {
        auto v = lower(trim(value));
        if (v == "static") cfg.policy.kind = PolicyKind::Static;
        else if (v == "hotness") cfg.policy.kind = PolicyKind::Hotness;
        else fail(Errc::InvalidValue, "policy must be static or hotness");
    } else if (key == "policy.epoch_cycles") cfg.policy.epoch_cycles = parse_u64(value);
    else if (key == "policy.threshold") cfg.policy.threshold = narrow<std::uint32_t>(parse_u64(value), key);
    else if (key == "policy.dram_watermark") cfg.policy.dram_watermark = parse_double(value);
    else if (key == "policy.first_touch") cfg.policy.first_touch = parse_bool(value);
    else if (head == "energy") {
        static const char* names[] = {"dram.read_pj_per_byte", "dram.write_pj_per_byte", "nvm.read_pj_per_byte",
                                      "nvm.write_pj_per_byte"};
        for (std::size_t i = 0; i < 4; ++i) {
            if (leaf == names[i]) {
                energy.v[i] = parse_u64(value);
                return;
            }
        }
        fail(Errc::UnknownKey, "unknown key '" + key + "'");
    } else if ((head == "dram" || head == "nvm") &&
               apply_device_key(cfg, head == "dram" ? Device::DRAM : Device::NVM, leaf, value, key)) {
    } else {
        fail(Errc::UnknownKey, "unknown key '" + key + "'");
    }
}

void fold_energy(SimConfig& cfg, const PartialEnergy& energy) {
    if (!energy.any()) return;
    if (!energy.all())
        fail(Errc::MissingEnergyCoefficients, "energy coefficients must be given for both devices, read and write");
    cfg.energy_coeffs = std::array<EnergyCoeffs, kNumDevices>{EnergyCoeffs{*energy.v[0], *energy.v[1]},
                                                              EnergyCoeffs{*energy.v[2], *energy.v[3]}};
}

} // namespace

void apply_config_key(SimConfig& cfg, const std::string& key, const std::string& value) {
    PartialEnergy energy;
    if (cfg.energy_coeffs) {
        const auto& e = *cfg.energy_coeffs;
        energy.v = {e[0].read_pj_per_byte, e[0].write_pj_per_byte, e[1].read_pj_per_byte, e[1].write_pj_per_byte};
    }
    apply_key(cfg, energy, trim(key), value);
    fold_energy(cfg, energy);
}

SimConfig parse_config(std::istream& in) {
    SimConfig cfg;
    PartialEnergy energy;
    std::vector<ConfigIssue> issues;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto body = trim(line);
        if (body.empty()) continue;
        auto eq = body.find('=');
        std::string where = "line " + std::to_string(lineno);
        if (eq == std::string::npos) {
            issues.push_back({Errc::ParseError, where, "expected 'key = value'"});
            continue;
        }
        auto key = trim(body.substr(0, eq));
        auto value = trim(body.substr(eq + 1));
        try {
            apply_key(cfg, energy, key, value);
        } catch (const Error& e) {
            issues.push_back({e.code(), where, e.what()});
        }
    }
    try {
        fold_energy(cfg, energy);
    } catch (const Error& e) {
        issues.push_back({e.code(), "energy", e.what()});
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return validate_config(cfg);
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ParseError, "cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string render_config(const SimConfig& cfg) {
    std::ostringstream os;
    auto hex = [](std::uint64_t v) {
        std::ostringstream h;
        h << "0x" << std::hex << v;
        return h.str();
    };
    os << "window_base = " << hex(cfg.window_base.value) << '\n';
    os << "dram.capacity = " << cfg.dram_capacity << '\n';
    os << "nvm.capacity = " << cfg.nvm_capacity << '\n';
    os << "page_size = " << cfg.page_size << '\n';
    os << "dma.block_bytes = " << cfg.dma_block << '\n';
    os << "dma.buffer_blocks = " << cfg.dma_buffer_blocks << '\n';
    os << "dma.max_jobs = " << cfg.dma_max_jobs << '\n';
    os << "link.latency_cycles = " << cfg.link_latency << '\n';
    os << "control.delay_cycles = " << cfg.control_delay << '\n';
    os << "ns_per_cycle = " << cfg.cycle_scale.ns_num << '/' << cfg.cycle_scale.ns_den << '\n';
    os << "posted_writes = " << (cfg.posted_writes ? "true" : "false") << '\n';
    os << "base.ns = " << cfg.timing_of(Device::DRAM).base_ns << '\n';
    for (Device d : kDevices) {
        const auto& t = cfg.timing_of(d);
        auto p = std::string(to_string(d));
        os << p << ".read_ns = " << t.target_read_ns << '\n';
        os << p << ".write_ns = " << t.target_write_ns << '\n';
        os << p << ".read_cycles = " << t.base_read_cycles << '\n';
        os << p << ".write_cycles = " << t.base_write_cycles << '\n';
        os << p << ".outstanding_slots = " << t.outstanding_slots << '\n';
        if (t.read_stall_override) os << p << ".read_stall_cycles = " << *t.read_stall_override << '\n';
        if (t.write_stall_override) os << p << ".write_stall_cycles = " << *t.write_stall_override << '\n';
    }
    os << "policy = " << (cfg.policy.kind == PolicyKind::Static ? "static" : "hotness") << '\n';
    os << "policy.epoch_cycles = " << cfg.policy.epoch_cycles << '\n';
    os << "policy.threshold = " << cfg.policy.threshold << '\n';
    os << "policy.dram_watermark = " << fmt_double(cfg.policy.dram_watermark) << '\n';
    os << "policy.first_touch = " << (cfg.policy.first_touch ? "true" : "false") << '\n';
    if (cfg.energy_coeffs) {
        for (Device d : kDevices) {
            const auto& e = (*cfg.energy_coeffs)[index_of(d)];
            os << "energy." << to_string(d) << ".read_pj_per_byte = " << e.read_pj_per_byte << '\n';
            os << "energy." << to_string(d) << ".write_pj_per_byte = " << e.write_pj_per_byte << '\n';
        }
    }
    os << "report.energy = " << (cfg.report_energy ? "true" : "false") << '\n';
    os << "seed = " << cfg.seed << '\n';
    return os.str();
}

std::vector<MemoryRequest> split_request(const MemoryRequest& req, std::uint64_t page_size) {
    std::vector<MemoryRequest> out;
    std::uint64_t addr = req.addr.value;
    std::uint64_t remaining = req.size;
    std::uint64_t consumed = 0;
    std::uint32_t sub = 0;
    while (remaining > 0) {
        std::uint64_t room = page_size - (addr % page_size);
        std::uint64_t len = std::min(room, remaining);
        MemoryRequest piece;
        piece.op = req.op;
        piece.addr = HostAddress{addr};
        piece.size = static_cast<std::uint32_t>(len);
        piece.arrival = req.arrival;
        piece.tag = req.tag;
        piece.sub = sub++;
        if (req.is_write())
            piece.payload.assign(req.payload.begin() + static_cast<std::ptrdiff_t>(consumed),
                                 req.payload.begin() + static_cast<std::ptrdiff_t>(consumed + len));
        out.push_back(std::move(piece));
        addr += len;
        consumed += len;
        remaining -= len;
    }
    return out;
}

} // namespace hymem
