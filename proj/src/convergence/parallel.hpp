#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace convlab::convergence::detail {

/// Number of indices in [0, count) satisfying `pred`, evaluated on up to
/// `threads` workers. Each worker owns a fixed slot, so the sum is the same
/// for any thread count.
template <typename Pred>
std::uint64_t parallel_count(std::uint64_t count, unsigned threads, const Pred& pred) {
    threads = std::max(1U, threads);
    if (threads == 1 || count < 2 * static_cast<std::uint64_t>(threads)) {
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < count; ++i) hits += pred(i) ? 1 : 0;
        return hits;
    }

    std::vector<std::uint64_t> slots(threads, 0);
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        const std::uint64_t chunk = (count + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::uint64_t begin = w * chunk;
            const std::uint64_t end = std::min(count, begin + chunk);
            workers.emplace_back([&, w, begin, end] {
                try {
                    std::uint64_t hits = 0;
                    for (std::uint64_t i = begin; i < end; ++i) hits += pred(i) ? 1 : 0;
                    slots[w] = hits;
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::uint64_t total = 0;
    for (auto s : slots) total += s;
    return total;
}

} // namespace convlab::convergence::detail
