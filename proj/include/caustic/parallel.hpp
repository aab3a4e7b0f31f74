#ifndef CAUSTIC_PARALLEL_HPP
#define CAUSTIC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace caustic {

// CAUSTIC_THREADS overrides the hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("CAUSTIC_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// out[i] = f(in[i]); order of results is positional and independent of scheduling.
template <class In, class F>
auto parallel_map(const std::vector<In>& in, F&& f, unsigned threads = 0) {
    using Out = decltype(f(in[0]));
    std::vector<Out> out(in.size());
    if (threads == 0) threads = thread_count();
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, in.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= in.size()) return;
            try {
                out[i] = f(in[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace caustic

#endif
