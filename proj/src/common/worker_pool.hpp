#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace forge {

// Bounded fan-out over independent items. Results land at their item index so
// output order never depends on scheduling; if several items throw, the
// exception from the lowest index is the one rethrown.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers = 1) : workers_(std::max<std::size_t>(1, workers)) {}

    std::size_t size() const noexcept { return workers_; }

    template <class Fn>
    void for_each_index(std::size_t n, Fn&& fn) const {
        if (n == 0) return;
        const std::size_t threads = std::min(workers_, n);
        if (threads == 1) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::mutex err_mu;
        std::exception_ptr first_error;
        std::size_t first_error_index = n;
        auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (i < first_error_index) {
                        first_error_index = i;
                        first_error = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        pool.clear();
        if (first_error) std::rethrow_exception(first_error);
    }

    template <class T, class Fn>
    std::vector<T> map(std::size_t n, Fn&& fn) const {
        std::vector<T> out(n);
        for_each_index(n, [&](std::size_t i) { out[i] = fn(i); });
        return out;
    }

private:
    std::size_t workers_;
};

}  // namespace forge
