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
#include <vector>

#include "adsann/dco.hpp"
#include "adsann/result.hpp"
#include "adsann/transform.hpp"
#include "adsann/vecio.hpp"

namespace adsann {

struct KmeansResult {
    Dataset centroids;                      // k x d
    std::vector<std::int32_t> assignment;   // per point, nearest centroid
    double objective = 0.0;                 // sum of squared distances
    int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding. Stops at max_iters or when the
/// relative objective change drops below 1e-4. Empty clusters are reseeded
/// from the point farthest from its assigned centroid. Ties in assignment
/// go to the lowest cluster index. Deterministic in (ds, k, seed).
KmeansResult kmeans(const Dataset& ds, std::int32_t k, int max_iters, std::uint64_t seed);

enum class IvfLayout { kContiguous, kSplit };

enum class IvfMode {
    kFd,       // full scan over raw vectors
    kPd,       // partial scan over raw vectors
    kAd,       // adaptive scan over transformed vectors
    kAdSplit,  // adaptive scan, two-array layout
    kPdSplit,  // partial scan, two-array layout
};

/// K-means inverted file over the transformed dataset. Raw vectors are kept
/// alongside for the baseline scan modes. With the split layout, the first
/// d1 coordinates of every bucket member live bucket-contiguously in A1 and
/// the remaining D-d1 in A2 (a pure permutation of the contiguous data).
struct IvfIndex {
    std::int32_t n = 0;
    std::int32_t d = 0;
    std::int32_t k_clusters = 0;
    std::int32_t d1 = 0;
    IvfLayout layout = IvfLayout::kContiguous;
    std::uint64_t seed = 0;

    Dataset centroids_t;    // k-means centroids, transformed space
    Dataset centroids_raw;  // the same centroids rotated back to raw space
    std::vector<std::vector<std::int32_t>> buckets;

    // Bucket-contiguous vector copies; ids_flat maps position -> vector id.
    std::vector<std::int32_t> ids_flat;
    std::vector<float> vec_t;
    std::vector<float> vec_raw;
    // Split arrays, filled only for IvfLayout::kSplit.
    std::vector<float> a1_t, a2_t;
    std::vector<float> a1_raw, a2_raw;
};

IvfIndex build_ivf(const Dataset& ds_raw, const Dataset& ds_transformed,
                   const TransformMatrix& m, std::int32_t k_clusters, std::uint64_t seed,
                   IvfLayout layout = IvfLayout::kContiguous, std::int32_t d1 = 32);

/// Probes the n_probe nearest centroids by exact distance and runs one
/// distance comparison per bucket member against the current Kth smallest
/// distance. Raw-vector modes take q_raw; adaptive modes take q_transformed
/// (rotated with the matrix that produced the index's transformed vectors).
/// The split modes process the first d1 coordinates of every candidate
/// before touching A2; decisions are made in candidate order either way, so
/// kAd and kAdSplit return identical results when d1 == cfg.delta_d.
KnnResult ivf_query(const IvfIndex& idx, const float* q_transformed, const float* q_raw,
                    std::int32_t K, std::int32_t n_probe, IvfMode mode,
                    const DcoConfig& cfg);

void save_ivf(const IvfIndex& idx, const std::filesystem::path& dir);
IvfIndex load_ivf(const std::filesystem::path& dir);

const char* ivf_mode_name(IvfMode mode);
IvfMode ivf_mode_from_name(const std::string& name);

}  // namespace adsann
