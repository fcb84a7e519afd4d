#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rle {

/*!
 * Run fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
 * concurrency). Work items must write only to their own slot.
 *
 * If any item throws, the exception of the lowest failing index is rethrown,
 * so error reporting does not depend on scheduling.
 */
template<class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t i) {
        try
        {
            fn(i);
        }
        catch (...)
        {
            errors[i] = std::current_exception();
        }
    };

    if (threads <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            run(i);
            if (errors[i])
                break;
        }
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++)
                    run(i);
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace rle
