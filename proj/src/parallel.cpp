#include "spanpca/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spanpca {

namespace {

std::size_t automatic_workers() {
    if (const char* env = std::getenv("SPCA_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) return static_cast<std::size_t>(value);
        } catch (const std::exception&) {
            // unparseable: fall through to auto
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Nested parallel_chunks calls run inline on the calling worker.
thread_local bool inside_region = false;

std::atomic<std::size_t>& override_slot() {
    static std::atomic<std::size_t> slot{0};
    return slot;
}

}  // namespace

std::size_t worker_count() {
    const std::size_t forced = override_slot().load();
    return forced > 0 ? forced : automatic_workers();
}

void set_worker_count(std::size_t workers) { override_slot().store(workers); }

void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    const std::size_t workers = std::min(worker_count(), count);
    if (workers <= 1 || inside_region) {
        body(0, count);
        return;
    }
    // Over-partition so uneven chunks (e.g. combination prefixes) balance out.
    const std::size_t chunks = std::min(count, workers * 8);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run = [&] {
        const bool was_inside = inside_region;
        inside_region = true;
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) break;
            const std::size_t begin = count * c / chunks;
            const std::size_t end = count * (c + 1) / chunks;
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
        inside_region = was_inside;
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace spanpca
