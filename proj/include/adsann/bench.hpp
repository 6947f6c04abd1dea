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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adsann/dco.hpp"
#include "adsann/hnsw.hpp"
#include "adsann/ivf.hpp"
#include "adsann/transform.hpp"
#include "adsann/vecio.hpp"

namespace adsann {

/// Exact K nearest neighbors per query, 64-bit accumulation, ties broken
/// by ascending id. Parallelized across queries (not a timed path).
GroundTruth brute_force_knn(const Dataset& ds, const Dataset& queries, std::int32_t K);

/// |result ∩ gt[0..K)| / K.
double recall(std::span<const std::int32_t> result_ids,
              std::span<const std::int32_t> gt_ids, std::int32_t K);

/// Mean of result_dists[i] / gt_dists[i] over the first K slots. A slot
/// with a zero ground-truth distance contributes 1 when the result
/// distance is also zero; otherwise the query cannot be scored and nullopt
/// is returned (callers flag and exclude it from aggregates).
std::optional<double> avg_distance_ratio(std::span<const double> result_dists,
                                         std::span<const double> gt_dists,
                                         std::int32_t K);

/// One benchmark row. dims_pct is avg_dims as a percentage of the
/// full-scan mode at the same sweep parameter.
struct BenchRecord {
    std::string algo;
    std::int32_t param = 0;
    double qps = 0.0;
    double recall = 0.0;
    double avg_ratio = 0.0;
    double avg_dims = 0.0;
    double dims_pct = 0.0;
    std::int32_t flagged_queries = 0;
};

struct SweepOptions {
    std::int32_t K = 10;
    DcoConfig cfg;
    int reps = 3;  // QPS is the median over this many timed repetitions
};

std::vector<BenchRecord> sweep_ivf(const IvfIndex& idx, const TransformMatrix& m,
                                   const Dataset& base_raw, const Dataset& queries_raw,
                                   const GroundTruth& gt,
                                   const std::vector<IvfMode>& modes,
                                   const std::vector<std::int32_t>& nprobe_grid,
                                   const SweepOptions& opt);

std::vector<BenchRecord> sweep_hnsw(const HnswGraph& g, const TransformMatrix& m,
                                    const Dataset& base_raw, const Dataset& queries_raw,
                                    const GroundTruth& gt,
                                    const std::vector<HnswMode>& modes,
                                    const std::vector<std::int32_t>& nef_grid,
                                    const SweepOptions& opt);

void write_bench_csv(const std::vector<BenchRecord>& records,
                     const std::filesystem::path& path);

/// Fixed-threshold verification: for every query, each object gets one
/// independent adaptive comparison against the exact Kth-NN distance, with
/// delta_d forced to 1. Inputs are the transformed dataset and queries so
/// the internally computed threshold matches the comparison arithmetic
/// exactly. failure_rate is the fraction of positive objects classified
/// negative; avg_dims averages over all comparisons.
struct TheoryRow {
    double epsilon0 = 0.0;
    double failure_rate = 0.0;
    double avg_dims = 0.0;
    std::uint64_t failures = 0;
    std::uint64_t positives = 0;
};

std::vector<TheoryRow> verify_theory(const Dataset& ds_t, const Dataset& queries_t,
                                     std::int32_t K, std::vector<double> epsilon0_grid);

void write_theory_csv(const std::vector<TheoryRow>& rows,
                      const std::filesystem::path& path);

const char* ivf_algo_label(IvfMode mode);
const char* hnsw_algo_label(HnswMode mode);

}  // namespace adsann
