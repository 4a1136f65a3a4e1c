#ifndef HASHGP_PARALLEL_HPP
#define HASHGP_PARALLEL_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace hashgp {

/// Runs fn(i) for i in [0, count) on up to `threads` workers using a static
/// block partition. Each index is visited exactly once, so work that only
/// writes to its own slot produces results identical to the serial loop.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) {
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
}

} // namespace hashgp

#endif // HASHGP_PARALLEL_HPP
