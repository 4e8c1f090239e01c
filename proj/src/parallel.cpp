#include "meshless/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

namespace meshless {

int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("MESHLESS_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) return std::min<long>(cap, hw) > 0 ? static_cast<int>(std::min<long>(cap, hw)) : 1;
    }
    return hw;
}

void parallel_for_chunks(std::ptrdiff_t count,
                         const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn) {
    if (count <= 0) return;
    int workers = worker_count();
    if (workers <= 1 || count < 2) {
        fn(0, count);
        return;
    }
    std::ptrdiff_t nchunks = std::min<std::ptrdiff_t>(workers, count);
    std::ptrdiff_t base = count / nchunks;
    std::ptrdiff_t rem = count % nchunks;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nchunks));
    std::vector<std::exception_ptr> errors(static_cast<size_t>(nchunks));
    std::ptrdiff_t begin = 0;
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
        std::ptrdiff_t len = base + (c < rem ? 1 : 0);
        std::ptrdiff_t end = begin + len;
        pool.emplace_back([&fn, &errors, c, begin, end]() {
            try {
                fn(begin, end);
            } catch (...) {
                errors[static_cast<size_t>(c)] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void parallel_for(std::ptrdiff_t count, const std::function<void(std::ptrdiff_t)>& fn) {
    parallel_for_chunks(count, [&fn](std::ptrdiff_t begin, std::ptrdiff_t end) {
        for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
    });
}

}  // namespace meshless
