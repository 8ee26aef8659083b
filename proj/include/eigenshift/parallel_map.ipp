#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace eigenshift::harness {

template <class T>
std::vector<T> parallel_map(std::int64_t count, int workers, const std::function<T(std::int64_t)>& task) {
    std::vector<T> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    const int w = static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(count, 1)));
    if (w == 1) {
        for (std::int64_t i = 0; i < count; ++i) out[i] = task(i);
        return out;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace eigenshift::harness
