#include "holo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace holo {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
    int n = g_threads.load();
    if (n == 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n == 0) n = 1;
    }
    return n;
}

void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t, int64_t)>& fn) {
    const int64_t count = end - begin;
    if (count <= 0) return;
    const int workers = static_cast<int>(std::min<int64_t>(thread_count(), count));
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    const int64_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) {
        const int64_t lo = begin + w * chunk;
        const int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(fn, lo, hi);
    }
    fn(begin, std::min(end, begin + chunk));
    for (auto& t : pool) t.join();
}

}  // namespace holo
