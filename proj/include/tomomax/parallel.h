#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tomomax {

/// Upper bound on worker threads used by parallel maps. 0 restores the default
/// (hardware concurrency).
void set_thread_count(int threads);
int thread_count();

/// Runs fn(begin, end) over contiguous blocks covering [0, n). Block boundaries
/// depend only on n and block_size, never on the thread count, so reductions that
/// combine per-block results in block order are independent of parallelism.
template <class Fn>
void parallel_blocks(std::size_t n, std::size_t block_size, Fn &&fn) {
    if (n == 0) {
        return;
    }
    block_size = std::max<std::size_t>(block_size, 1);
    std::size_t num_blocks = (n + block_size - 1) / block_size;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), num_blocks);
    auto run_block = [&](std::size_t block) {
        std::size_t begin = block * block_size;
        fn(block, begin, std::min(n, begin + block_size));
    };
    if (workers <= 1) {
        for (std::size_t b = 0; b < num_blocks; b++) {
            run_block(b);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; w++) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t b = w; b < num_blocks; b += workers) {
                    run_block(b);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Element-wise parallel map: fn(i) for i in [0, n).
template <class Fn>
void parallel_for(std::size_t n, Fn &&fn, std::size_t block_size = 64) {
    parallel_blocks(n, block_size, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; i++) {
            fn(i);
        }
    });
}

}  // namespace tomomax
