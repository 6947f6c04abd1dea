// Copyright 2026 the adsann project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace adsann {

/// Splits [begin, end) into a fixed number of chunks and runs them on a
/// small thread pool. Chunk boundaries do not depend on the thread count,
/// so per-chunk outputs (and chunk-ordered reductions) are deterministic.
/// Used only on index-phase / verification paths, never in timed loops.
inline void parallel_chunks(std::int64_t begin, std::int64_t end,
                            const std::function<void(std::int64_t, std::int64_t, int)>& fn,
                            int n_chunks = 64) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;
    if (n_chunks > total) n_chunks = static_cast<int>(total);
    unsigned hw = std::thread::hardware_concurrency();
    int n_threads = static_cast<int>(hw == 0 ? 1 : hw);
    if (n_threads > n_chunks) n_threads = n_chunks;

    if (n_threads <= 1) {
        for (int c = 0; c < n_chunks; ++c) {
            const std::int64_t lo = begin + total * c / n_chunks;
            const std::int64_t hi = begin + total * (c + 1) / n_chunks;
            fn(lo, hi, c);
        }
        return;
    }

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks) break;
            const std::int64_t lo = begin + total * c / n_chunks;
            const std::int64_t hi = begin + total * (c + 1) / n_chunks;
            fn(lo, hi, c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads - 1);
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

/// Element-wise convenience wrapper over parallel_chunks.
inline void parallel_for(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t)>& fn) {
    parallel_chunks(begin, end, [&](std::int64_t lo, std::int64_t hi, int) {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
}

}  // namespace adsann
