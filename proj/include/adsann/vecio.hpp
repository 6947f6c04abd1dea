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
#include <string>
#include <vector>

namespace adsann {

/// In-memory float dataset, row-major n x d. Ids are implicit 0..n-1.
/// Invariants: n >= 1, d >= 1, data.size() == n*d, all values finite.
struct Dataset {
    std::int32_t n = 0;
    std::int32_t d = 0;
    std::vector<float> data;

    const float* row(std::int32_t i) const {
        return data.data() + static_cast<std::size_t>(i) * d;
    }
    float* row(std::int32_t i) {
        return data.data() + static_cast<std::size_t>(i) * d;
    }
};

/// Per-query exact KNN id lists, each of length k_max, sorted by ascending
/// exact distance (ties by ascending id). Distances are not stored; callers
/// recompute them from the base dataset when needed.
struct GroundTruth {
    std::int32_t n_queries = 0;
    std::int32_t k_max = 0;
    std::vector<std::int32_t> ids;

    const std::int32_t* row(std::int32_t q) const {
        return ids.data() + static_cast<std::size_t>(q) * k_max;
    }
    std::int32_t* row(std::int32_t q) {
        return ids.data() + static_cast<std::size_t>(q) * k_max;
    }
};

/// Plain-text descriptor for a benchmark dataset (key=value lines).
struct DatasetDesc {
    std::string name;
    std::string base_path;
    std::string query_path;
    std::string gt_path;
    std::int32_t d = 0;
};

// fvecs: per record, a 4-byte little-endian int32 dimension followed by
// that many 4-byte little-endian IEEE-754 floats. ivecs is the same with
// int32 payloads. All records in one file must share the dimension.
Dataset read_fvecs(const std::filesystem::path& path);
void write_fvecs(const Dataset& ds, const std::filesystem::path& path);

GroundTruth read_ivecs(const std::filesystem::path& path);
void write_ivecs(const GroundTruth& gt, const std::filesystem::path& path);

// Variable-length ivecs records (one record per list). Used for index
// persistence (cluster buckets, graph adjacency); ground-truth files keep
// the fixed-dimension layout above.
std::vector<std::vector<std::int32_t>> read_ivecs_ragged(const std::filesystem::path& path);
void write_ivecs_ragged(const std::vector<std::vector<std::int32_t>>& rows,
                        const std::filesystem::path& path);

/// Deterministic blobs-plus-noise dataset. Vectors are drawn as
/// blob_center + noise where the noise is isotropic Gaussian scaled so its
/// expected norm is `spread`. Blob centers are redrawn (at a growing scale)
/// until every pairwise center distance is at least 10*spread.
Dataset synth_dataset(std::int32_t n, std::int32_t d, std::int32_t n_blobs,
                      double spread, std::uint64_t seed);

/// Same generator, also exposing the blob centers (k = n_blobs rows).
Dataset synth_dataset(std::int32_t n, std::int32_t d, std::int32_t n_blobs,
                      double spread, std::uint64_t seed, Dataset* centers_out);

DatasetDesc read_descriptor(const std::filesystem::path& path);
void write_descriptor(const DatasetDesc& desc, const std::filesystem::path& path);

}  // namespace adsann
