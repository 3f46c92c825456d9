#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ehaloha {

//! Worker count from EHALOHA_THREADS, else hardware concurrency.
unsigned default_parallelism();

//---------------------------------------------------------------------------//
/*!
 * Run body(i) for i in [0, n) on up to `threads` workers.
 *
 * Work items must only write to storage owned by their index; results are then
 * independent of scheduling. The first exception thrown by a worker is
 * rethrown on the calling thread.
 */
template<class F>
void parallel_for(std::size_t n, unsigned threads, F&& body)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
        {
            pool.emplace_back([&] {
                for (;;)
                {
                    std::size_t const i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= n)
                    {
                        return;
                    }
                    try
                    {
                        body(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                        {
                            error = std::current_exception();
                        }
                        next.store(n);
                        return;
                    }
                }
            });
        }
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

//! Fixed chunking for replicated experiments: chunk boundaries depend only on
//! the replication count, never on the worker count.
inline constexpr std::size_t kReplicationChunk = 1024;

inline std::size_t chunk_count(std::size_t reps)
{
    return (reps + kReplicationChunk - 1) / kReplicationChunk;
}

}  // namespace ehaloha
