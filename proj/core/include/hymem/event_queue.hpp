#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "hymem/types.hpp"

namespace hymem {

/// Min-queue of timed events. Events at the same time pop in insertion
/// order, which keeps every run deterministic.
template <typename Payload>
class EventQueue {
public:
    struct Entry {
        SimTime time;
        std::uint64_t seq;
        Payload payload;
    };

    void push(SimTime t, Payload p) { heap_.push(Entry{t, seq_++, std::move(p)}); }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    const Entry& top() const { return heap_.top(); }
    Entry pop() {
        Entry e = heap_.top();
        heap_.pop();
        return e;
    }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t seq_ = 0;
};

} // namespace hymem
