#include "anlg/core.hpp"

#include <algorithm>
#include <atomic>

namespace anlg {

namespace {
std::atomic<int> g_threads{0};  // 0 = use hardware concurrency
}

int thread_budget() {
    int t = g_threads.load();
    if (t > 0) return t;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_budget(int n) { g_threads.store(n < 0 ? 0 : n); }

void parallel_for(size_t count, const std::function<void(size_t, size_t)>& body) {
    if (count == 0) return;
    int nt = thread_budget();
    size_t workers = std::min<size_t>(static_cast<size_t>(nt), count);
    if (workers <= 1) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    size_t chunk = (count + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        size_t b = w * chunk;
        size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace anlg
