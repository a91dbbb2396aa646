#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hymem {

enum class Errc {
    // configuration
    CapacityNotPageMultiple,
    BlockNotDividingPage,
    ZeroCapacity,
    NotPowerOfTwo,
    InvalidValue,
    UnknownKey,
    ParseError,
    // addressing / placement
    OutOfWindow,
    UnmappedPage,
    SwapPagesIdentical,
    // dma
    SwapInProgress,
    SamePage,
    SameDevice,
    // pipeline
    UnknownTag,
    DuplicateCompletion,
    // allocator
    OutOfMemory,
    UnknownAllocation,
    // workloads
    FootprintTooLarge,
    MissingEnergyCoefficients,
    // internal consistency
    InvariantBreach,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Raised when an internal invariant of the simulation is violated. The CLI
/// maps this to exit code 2.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(Errc::InvariantBreach, what) {}
};

inline std::string to_hex(unsigned long long v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    do {
        out.insert(out.begin(), digits[v & 0xf]);
        v >>= 4;
    } while (v != 0);
    return "0x" + out;
}

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace hymem
