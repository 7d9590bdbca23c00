#include "ricci/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace ricci {

int worker_count(int requested) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int cap = hw;
    if (const char* env = std::getenv("ENTROPIC_RICCI_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) cap = v;
    }
    if (requested > 0) cap = std::min(cap, requested);
    return std::max(1, cap);
}

void parallel_for(int count, const std::function<void(int)>& fn, int workers) {
    if (count <= 0) return;
    const int w = std::min(worker_count(workers), count);
    std::vector<std::exception_ptr> errors(count);
    if (w == 1) {
        for (int i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < w; ++t)
            pool.emplace_back([&] {
                for (int i; (i = next.fetch_add(1)) < count;) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace ricci
