#include "frontier/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace frontier {

namespace {
std::atomic<int> g_threads{0};
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = (base ^ stream) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void set_default_threads(int threads) { g_threads = std::max(0, threads); }

int default_threads() {
    const int t = g_threads.load();
    if (t > 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::exception_ptr> parallel_for(int count, const std::function<void(int)>& body, int threads) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(0, count)));
    if (count <= 0) return errors;
    if (threads <= 0) threads = default_threads();
    threads = std::min(threads, count);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
        return errors;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return errors;
}

}  // namespace frontier
