#include "itscale/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace itscale {

unsigned resolve_threads(unsigned requested) noexcept {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for_chunks(std::size_t n, std::size_t chunk_size, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    chunk_size = std::max<std::size_t>(chunk_size, 1);
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n_chunks));

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            body(c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                body(c * chunk_size, std::min(n, (c + 1) * chunk_size));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_chunks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace itscale
