#include "fmx/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fmx {

double RunningMoments::variance() const noexcept {
    if (count_ < 2) return 0.0;
    const double n = double(count_);
    const double m = sum_.value() / n;
    return std::max(0.0, (sum_sq_.value() - n * m * m) / (n - 1.0));
}

double RunningMoments::standard_error() const noexcept {
    return count_ ? std::sqrt(variance() / double(count_)) : 0.0;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = unsigned(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                try {
                    for (std::size_t i = next++; i < n; i = next++) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fmx
