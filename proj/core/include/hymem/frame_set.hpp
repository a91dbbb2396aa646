#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

namespace hymem {

/// Set of free frame numbers in [0, size) with lowest-first extraction.
class FrameSet {
public:
    FrameSet() = default;
    explicit FrameSet(std::uint64_t size, bool all_free = true) : size_(size), words_((size + 63) / 64, 0) {
        if (all_free) {
            for (std::uint64_t f = 0; f < size; ++f) words_[f / 64] |= bit(f);
            count_ = size;
        }
    }

    std::uint64_t size() const { return size_; }
    std::uint64_t count() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool contains(std::uint64_t f) const { return f < size_ && (words_[f / 64] & bit(f)) != 0; }

    void insert(std::uint64_t f) {
        if (contains(f)) return;
        words_[f / 64] |= bit(f);
        ++count_;
        if (f / 64 < cursor_) cursor_ = f / 64;
    }

    bool erase(std::uint64_t f) {
        if (!contains(f)) return false;
        words_[f / 64] &= ~bit(f);
        --count_;
        return true;
    }

    std::optional<std::uint64_t> lowest() const {
        if (count_ == 0) return std::nullopt;
        for (std::uint64_t w = cursor_; w < words_.size(); ++w) {
            if (words_[w] != 0) {
                cursor_ = w;
                return w * 64 + static_cast<std::uint64_t>(std::countr_zero(words_[w]));
            }
        }
        return std::nullopt;
    }

    std::optional<std::uint64_t> pop_lowest() {
        auto f = lowest();
        if (f) erase(*f);
        return f;
    }

    /// First frame of the lowest run of `n` consecutive free frames.
    std::optional<std::uint64_t> find_run(std::uint64_t n) const {
        if (n == 0 || n > count_) return std::nullopt;
        std::uint64_t run = 0;
        for (std::uint64_t f = 0; f < size_; ++f) {
            if ((f & 63) == 0 && words_[f / 64] == 0) {
                run = 0;
                f += 63;
                continue;
            }
            run = contains(f) ? run + 1 : 0;
            if (run == n) return f + 1 - n;
        }
        return std::nullopt;
    }

    friend bool operator==(const FrameSet& a, const FrameSet& b) {
        return a.size_ == b.size_ && a.count_ == b.count_ && a.words_ == b.words_;
    }

private:
    static constexpr std::uint64_t bit(std::uint64_t f) { return std::uint64_t{1} << (f % 64); }

    std::uint64_t size_ = 0;
    std::uint64_t count_ = 0;
    std::vector<std::uint64_t> words_;
    mutable std::uint64_t cursor_ = 0; // no set bit below this word
};

} // namespace hymem
