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

#include <cstdint>
#include <vector>

namespace adsann {

/// Per-query accounting. dims_evaluated counts every dimension consumed by
/// a distance comparison (full scans contribute D each).
struct QueryStats {
    std::uint64_t dims_evaluated = 0;
    std::uint64_t dco_count = 0;
    std::uint64_t candidates = 0;
    std::uint64_t hops = 0;
    double seconds = 0.0;
};

/// Up to K results sorted by ascending exact distance (ties by id).
struct KnnResult {
    std::vector<std::int32_t> ids;
    std::vector<double> dists;
    QueryStats stats;
};

}  // namespace adsann
