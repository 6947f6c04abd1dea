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
#include <filesystem>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "adsann/dco.hpp"
#include "adsann/result.hpp"
#include "adsann/vecio.hpp"

namespace adsann {

enum class HnswMode {
    kPlain,     // full scans over raw vectors
    kPd,        // partial scans over raw vectors
    kPlus,      // adaptive scans, thresholds from the beam set
    kPlusPlus,  // adaptive scans, thresholds from the exact top-K set
};

/// Multi-layer navigable graph. Layer 0 holds every vertex with out-degree
/// at most 2M; upper layers hold geometrically thinning subsets with
/// out-degree at most M. Vertex levels are drawn with normalization
/// m_L = 1/ln(M). The structure is built once over the transformed vectors
/// and shared by all query modes; raw vectors are kept for the baselines.
struct HnswGraph {
    std::int32_t n = 0;
    std::int32_t d = 0;
    std::int32_t M = 16;
    std::int32_t ef_construction = 500;
    double m_L = 0.0;
    std::uint64_t seed = 0;
    std::int32_t entry_point = -1;
    std::int32_t max_layer = 0;

    std::vector<std::int32_t> levels;                          // per vertex
    std::vector<std::vector<std::vector<std::int32_t>>> links; // [vertex][layer]

    Dataset data_t;
    Dataset data_raw;
};

HnswGraph build_hnsw(const Dataset& ds_raw, const Dataset& ds_transformed,
                     std::int32_t M, std::int32_t ef_construction, std::uint64_t seed);

/// Layer-0 search state. `frontier` holds candidates to expand (min-heap),
/// `routing` the N_ef best keys seen so far (max-heap; exact keys except in
/// kPlusPlus, where observed estimates may enter), `exact_topk` the
/// K smallest exact distances (kPlusPlus only). Keys tie-break by id.
struct BeamState {
    using DistId = std::pair<double, std::int32_t>;
    std::priority_queue<DistId, std::vector<DistId>, std::greater<DistId>> frontier;
    std::priority_queue<DistId> routing;
    std::priority_queue<DistId> exact_topk;
    std::vector<std::uint8_t> visited;
};

/// Per-DCO instrumentation used by property tests: for each layer-0
/// comparison in kPlusPlus, the threshold in force (max of the exact
/// top-K set) and the max key of the routing set when full.
struct HnswDebug {
    std::vector<std::pair<double, double>> r1_r2_thresholds;
    std::vector<double> beam_max_trace;  // routing-set max after each insertion
    std::vector<std::int32_t> visited;
    // One entry per layer-0 comparison: candidate id, threshold, decision.
    struct DcoEntry {
        std::int32_t id;
        double r;
        bool positive;
    };
    std::vector<DcoEntry> dco_log;
};

/// Greedy descent through the upper layers followed by beam search on
/// layer 0 with a routing set of size N_ef. kPlusPlus keeps the exact-keyed
/// top-K set separate from the routing set, whose keys may be the observed
/// estimates of rejected comparisons. Returned distances are exact in every
/// mode. Requires N_ef >= K >= 1.
KnnResult hnsw_query(const HnswGraph& g, const float* q_transformed, const float* q_raw,
                     std::int32_t K, std::int32_t N_ef, HnswMode mode,
                     const DcoConfig& cfg, HnswDebug* debug = nullptr);

void save_hnsw(const HnswGraph& g, const std::filesystem::path& dir);
/// Loads structure from `dir`; vector data is re-attached from the caller.
HnswGraph load_hnsw(const std::filesystem::path& dir, const Dataset& ds_raw,
                    const Dataset& ds_transformed);

const char* hnsw_mode_name(HnswMode mode);
HnswMode hnsw_mode_from_name(const std::string& name);

}  // namespace adsann
