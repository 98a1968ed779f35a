#pragma once

#include <sturmdisc/error.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sturmdisc {

// STURMDISC_THREADS if set (>= 1), else the hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("STURMDISC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw ValidationError("STURMDISC_THREADS must be a positive integer");
        return unsigned(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// out[i] = f(in[i]); order preserved, first exception rethrown.
template <class T, class F>
auto parallel_map(const std::vector<T>& in, F&& f) -> std::vector<decltype(f(in[0]))> {
    using R = decltype(f(in[0]));
    std::vector<R> out(in.size());
    const unsigned n = std::min<unsigned>(thread_count(), unsigned(in.size()));
    if (n <= 1) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < in.size();) {
            try {
                out[i] = f(in[i]);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace sturmdisc
