#include "tomomax/parallel.h"

#include <atomic>

namespace tomomax {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int threads) {
    g_threads.store(std::max(threads, 0));
}

int thread_count() {
    int t = g_threads.load();
    if (t > 0) {
        return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace tomomax
