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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace adsann {

/// Knobs of the adaptive distance comparison: epsilon0 trades reliability
/// for sampled dimensions, delta_d is the number of dimensions scanned
/// between consecutive tests.
struct DcoConfig {
    double epsilon0 = 2.1;
    std::int32_t delta_d = 32;
};

/// Result of one distance comparison. `observed` is the distance estimate
/// at termination (equal to the exact distance whenever all dimensions
/// were consumed); `distance` is set only on positive outcomes and is
/// always exact. `dims_used` is min(D, a multiple of delta_d).
struct DcoOutcome {
    bool positive = false;
    std::optional<double> distance;
    double observed = 0.0;
    std::int32_t dims_used = 0;
};

/// One comparison instance: decide whether ||data_vec - query_vec|| <= r.
/// For the adaptive strategy both vectors must already be rotated by the
/// same TransformMatrix; that precondition is not checkable here.
struct DcoQuery {
    std::span<const float> data_vec;
    std::span<const float> query_vec;
    double r = 0.0;
};

/// Inner-product / cosine comparisons rewritten as Euclidean comparisons
/// over normalized vectors. When `feasible` is false the original
/// predicate is analytically false for every input (threshold below the
/// reachable range) and no scan is needed.
struct ReducedDco {
    std::vector<float> data_vec;
    std::vector<float> query_vec;
    double r = 0.0;
    bool feasible = true;

    DcoQuery query() const { return DcoQuery{data_vec, query_vec, r}; }
};

/// 1 + epsilon0 / sqrt(d). Throws for d < 1.
double threshold_multiplier(std::int32_t d, const DcoConfig& cfg);

DcoOutcome fd_scan(const DcoQuery& q);
DcoOutcome pd_scan(const DcoQuery& q, std::int32_t delta_d);
DcoOutcome ad_sampling(const DcoQuery& q, const DcoConfig& cfg);

/// Positive iff <o, q> >= r on the original vectors.
ReducedDco reduce_inner_product(std::span<const float> o, std::span<const float> q,
                                double r);

/// Euclidean ranking over the normalized pair matches descending cosine
/// similarity; the threshold is left at 0 (callers supply their own).
ReducedDco reduce_cosine(std::span<const float> o, std::span<const float> q);

// ---------------------------------------------------------------------------
// Hot-path kernels shared by the index implementations. All comparisons run
// on squared quantities; the exact sum is accumulated in 64-bit over 32-bit
// inputs in index order, so a full scan is bit-identical between strategies.

inline double l2_sq(const float* a, const float* b, std::int32_t d) {
    double s = 0.0;
    for (std::int32_t i = 0; i < d; ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += diff * diff;
    }
    return s;
}

inline double l2_dist(const float* a, const float* b, std::int32_t d) {
    return std::sqrt(l2_sq(a, b, d));
}

/// Per-(config, dimension) precomputation: reject at d sampled dimensions
/// iff S_d > factor[d] * r^2, where factor[d] = (1 + eps0/sqrt(d))^2 * d/D.
struct AdContext {
    DcoConfig cfg;
    std::int32_t dim = 0;
    std::vector<double> factor;

    AdContext() = default;
    AdContext(const DcoConfig& c, std::int32_t d);
};

struct AdResult {
    bool positive = false;
    double dist_sq = 0.0;    // exact squared distance, valid when positive
    double observed = 0.0;   // distance estimate at termination
    std::int32_t dims = 0;
};

/// Adaptive scan starting from `d_start` consumed dimensions with partial
/// squared sum `s_start`. `data` and `query` point at coordinate d_start of
/// their vectors. When `test_at_start` is set, a test runs immediately on
/// the carried-in partial sum (split-layout resume); otherwise the first
/// test happens after delta_d more dimensions. r may be +infinity.
inline AdResult ad_scan(const float* data, const float* query, std::int32_t dim,
                        std::int32_t d_start, double s_start, double r,
                        const AdContext& ctx, bool test_at_start) {
    const double r_sq = r * r;
    double s = s_start;
    std::int32_t d = d_start;

    if (test_at_start && d > 0 && d < dim && s > ctx.factor[d] * r_sq) {
        return {false, 0.0, std::sqrt(s * dim / d), d};
    }
    while (d < dim) {
        const std::int32_t stop = std::min(d + ctx.cfg.delta_d, dim);
        const float* a = data + (d - d_start);
        const float* b = query + (d - d_start);
        for (std::int32_t i = 0; i < stop - d; ++i) {
            const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            s += diff * diff;
        }
        d = stop;
        if (d < dim && s > ctx.factor[d] * r_sq) {
            return {false, 0.0, std::sqrt(s * dim / d), d};
        }
    }
    const bool positive = s <= r_sq;
    const double dist = std::sqrt(s);
    return {positive, s, dist, dim};
}

/// Exact partial scan: stops as soon as the monotone partial sum already
/// exceeds r^2 (checked every delta_d dimensions). Never misclassifies.
inline AdResult pd_scan_kernel(const float* data, const float* query, std::int32_t dim,
                               std::int32_t d_start, double s_start, double r,
                               std::int32_t delta_d, bool test_at_start) {
    const double r_sq = r * r;
    double s = s_start;
    std::int32_t d = d_start;

    if (test_at_start && d > 0 && d < dim && s > r_sq) {
        return {false, 0.0, std::sqrt(s), d};
    }
    while (d < dim) {
        const std::int32_t stop = std::min(d + delta_d, dim);
        const float* a = data + (d - d_start);
        const float* b = query + (d - d_start);
        for (std::int32_t i = 0; i < stop - d; ++i) {
            const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            s += diff * diff;
        }
        d = stop;
        if (d < dim && s > r_sq) {
            return {false, 0.0, std::sqrt(s), d};
        }
    }
    const bool positive = s <= r_sq;
    return {positive, s, std::sqrt(s), dim};
}

}  // namespace adsann
