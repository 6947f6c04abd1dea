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

#include "adsann/ivf.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "adsann/parallel.hpp"
#include "adsann/rng.hpp"

namespace adsann {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Assigns every point to its nearest centroid (ties to the lowest index)
// and returns the summed squared distance. best_d2 is filled per point.
double assign_points(const Dataset& ds, const Dataset& centroids,
                     std::vector<std::int32_t>& assignment, std::vector<double>& best_d2) {
    const std::int32_t n = ds.n;
    const std::int32_t k = centroids.n;
    const std::int32_t d = ds.d;
    assignment.resize(n);
    best_d2.resize(n);
    parallel_for(0, n, [&](std::int64_t i) {
        const float* x = ds.row(static_cast<std::int32_t>(i));
        double best = kInf;
        std::int32_t arg = 0;
        for (std::int32_t c = 0; c < k; ++c) {
            const double d2 = l2_sq(x, centroids.row(c), d);
            if (d2 < best) {
                best = d2;
                arg = c;
            }
        }
        assignment[i] = arg;
        best_d2[i] = best;
    });
    double obj = 0.0;
    for (std::int32_t i = 0; i < n; ++i) obj += best_d2[i];
    return obj;
}

void kmeanspp_seed(const Dataset& ds, std::int32_t k, Rng& rng, Dataset& centroids) {
    const std::int32_t n = ds.n;
    const std::int32_t d = ds.d;
    centroids.n = k;
    centroids.d = d;
    centroids.data.resize(static_cast<std::size_t>(k) * d);

    std::vector<double> min_d2(n, kInf);
    std::vector<char> chosen(n, 0);

    std::int32_t pick = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
    for (std::int32_t c = 0;; ++c) {
        chosen[pick] = 1;
        const float* src = ds.row(pick);
        std::copy(src, src + d, centroids.row(c));
        if (c + 1 == k) break;

        const float* cent = centroids.row(c);
        parallel_for(0, n, [&](std::int64_t i) {
            const double d2 = l2_sq(ds.row(static_cast<std::int32_t>(i)), cent, d);
            if (d2 < min_d2[i]) min_d2[i] = d2;
        });

        double total = 0.0;
        for (std::int32_t i = 0; i < n; ++i) total += min_d2[i];
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double cum = 0.0;
            pick = -1;
            for (std::int32_t i = 0; i < n; ++i) {
                cum += min_d2[i];
                if (cum > u) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {  // fp slack at the tail
                for (std::int32_t i = n - 1; i >= 0; --i)
                    if (min_d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
        } else {
            pick = -1;
        }
        if (pick < 0) {  // all remaining mass zero: take the lowest unchosen id
            for (std::int32_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            if (pick < 0) pick = 0;
        }
    }
}

}  // namespace

KmeansResult kmeans(const Dataset& ds, std::int32_t k, int max_iters, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > ds.n) throw std::invalid_argument("kmeans: k exceeds the number of points");

    const std::int32_t n = ds.n;
    const std::int32_t d = ds.d;
    Rng rng = Rng::for_stream(seed, rng_stream::kKmeans);

    KmeansResult res;
    kmeanspp_seed(ds, k, rng, res.centroids);

    std::vector<std::int32_t> assignment;
    std::vector<double> best_d2;
    std::vector<double> sums(static_cast<std::size_t>(k) * d);
    std::vector<std::int64_t> counts(k);

    double prev_obj = kInf;
    for (int iter = 0; iter < max_iters; ++iter) {
        const double obj = assign_points(ds, res.centroids, assignment, best_d2);
        res.iterations = iter + 1;

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::int32_t i = 0; i < n; ++i) {
            const std::int32_t c = assignment[i];
            const float* x = ds.row(i);
            double* s = sums.data() + static_cast<std::size_t>(c) * d;
            for (std::int32_t j = 0; j < d; ++j) s[j] += x[j];
            ++counts[c];
        }
        for (std::int32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            float* out = res.centroids.row(c);
            const double* s = sums.data() + static_cast<std::size_t>(c) * d;
            for (std::int32_t j = 0; j < d; ++j)
                out[j] = static_cast<float>(s[j] / static_cast<double>(counts[c]));
        }

        // Reseed empty clusters from the points farthest from their centroid.
        std::vector<char> stolen(n, 0);
        for (std::int32_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            double far_d2 = -1.0;
            std::int32_t far_i = -1;
            for (std::int32_t i = 0; i < n; ++i) {
                if (stolen[i]) continue;
                if (best_d2[i] > far_d2) {
                    far_d2 = best_d2[i];
                    far_i = i;
                }
            }
            if (far_i < 0) continue;
            stolen[far_i] = 1;
            const float* src = ds.row(far_i);
            std::copy(src, src + d, res.centroids.row(c));
        }

        if (prev_obj < kInf) {
            const double denom = std::max(obj, 1e-30);
            if (std::abs(prev_obj - obj) / denom < 1e-4) {
                prev_obj = obj;
                break;
            }
        }
        prev_obj = obj;
    }

    res.objective = assign_points(ds, res.centroids, res.assignment, best_d2);
    return res;
}

IvfIndex build_ivf(const Dataset& ds_raw, const Dataset& ds_transformed,
                   const TransformMatrix& m, std::int32_t k_clusters, std::uint64_t seed,
                   IvfLayout layout, std::int32_t d1) {
    if (ds_raw.n != ds_transformed.n || ds_raw.d != ds_transformed.d)
        throw std::invalid_argument("build_ivf: raw and transformed datasets disagree");
    if (m.dim != ds_raw.d)
        throw std::invalid_argument("build_ivf: matrix dimension does not match the data");
    if (layout == IvfLayout::kSplit && (d1 < 1 || d1 >= ds_raw.d))
        throw std::invalid_argument("build_ivf: split layout needs 1 <= d1 < D");

    IvfIndex idx;
    idx.n = ds_raw.n;
    idx.d = ds_raw.d;
    idx.k_clusters = k_clusters;
    idx.d1 = d1;
    idx.layout = layout;
    idx.seed = seed;

    const KmeansResult km = kmeans(ds_transformed, k_clusters, 25, seed);
    idx.centroids_t = km.centroids;

    idx.buckets.assign(k_clusters, {});
    for (std::int32_t i = 0; i < idx.n; ++i) idx.buckets[km.assignment[i]].push_back(i);

    // The same centroids rotated back, so the untransformed probing path
    // ranks clusters identically (up to float rounding).
    const std::int32_t d = idx.d;
    idx.centroids_raw.n = k_clusters;
    idx.centroids_raw.d = d;
    idx.centroids_raw.data.resize(static_cast<std::size_t>(k_clusters) * d);
    for (std::int32_t c = 0; c < k_clusters; ++c) {
        const std::vector<float> back = apply_transpose(
            m, std::span<const float>(idx.centroids_t.row(c), d));
        std::copy(back.begin(), back.end(), idx.centroids_raw.row(c));
    }

    // Bucket-contiguous copies (and the split permutation when requested).
    idx.ids_flat.reserve(idx.n);
    idx.vec_t.resize(ds_transformed.data.size());
    idx.vec_raw.resize(ds_raw.data.size());
    std::size_t pos = 0;
    for (std::int32_t c = 0; c < k_clusters; ++c) {
        for (const std::int32_t id : idx.buckets[c]) {
            idx.ids_flat.push_back(id);
            std::copy(ds_transformed.row(id), ds_transformed.row(id) + d,
                      idx.vec_t.data() + pos * d);
            std::copy(ds_raw.row(id), ds_raw.row(id) + d, idx.vec_raw.data() + pos * d);
            ++pos;
        }
    }
    if (layout == IvfLayout::kSplit) {
        const std::int32_t d2 = d - d1;
        idx.a1_t.resize(static_cast<std::size_t>(idx.n) * d1);
        idx.a2_t.resize(static_cast<std::size_t>(idx.n) * d2);
        idx.a1_raw.resize(static_cast<std::size_t>(idx.n) * d1);
        idx.a2_raw.resize(static_cast<std::size_t>(idx.n) * d2);
        for (std::int32_t p = 0; p < idx.n; ++p) {
            const float* vt = idx.vec_t.data() + static_cast<std::size_t>(p) * d;
            const float* vr = idx.vec_raw.data() + static_cast<std::size_t>(p) * d;
            std::copy(vt, vt + d1, idx.a1_t.data() + static_cast<std::size_t>(p) * d1);
            std::copy(vt + d1, vt + d, idx.a2_t.data() + static_cast<std::size_t>(p) * d2);
            std::copy(vr, vr + d1, idx.a1_raw.data() + static_cast<std::size_t>(p) * d1);
            std::copy(vr + d1, vr + d, idx.a2_raw.data() + static_cast<std::size_t>(p) * d2);
        }
    }
    return idx;
}

namespace {

struct BoundedMaxHeap {
    std::priority_queue<std::pair<double, std::int32_t>> heap;
    std::int32_t cap;

    explicit BoundedMaxHeap(std::int32_t k) : cap(k) {}

    double threshold() const { return heap.size() < static_cast<std::size_t>(cap)
                                          ? kInf
                                          : heap.top().first; }

    // Positive candidates tied with the current max are not inserted.
    void offer(double dist, std::int32_t id) {
        if (heap.size() < static_cast<std::size_t>(cap)) {
            heap.emplace(dist, id);
        } else if (dist < heap.top().first) {
            heap.pop();
            heap.emplace(dist, id);
        }
    }
};

std::vector<std::int32_t> probe_order(const Dataset& centroids, const float* q,
                                      std::int32_t n_probe) {
    std::vector<std::pair<double, std::int32_t>> dists(centroids.n);
    for (std::int32_t c = 0; c < centroids.n; ++c)
        dists[c] = {l2_sq(centroids.row(c), q, centroids.d), c};
    std::partial_sort(dists.begin(), dists.begin() + n_probe, dists.end());
    std::vector<std::int32_t> order(n_probe);
    for (std::int32_t i = 0; i < n_probe; ++i) order[i] = dists[i].second;
    return order;
}

}  // namespace

KnnResult ivf_query(const IvfIndex& idx, const float* q_transformed, const float* q_raw,
                    std::int32_t K, std::int32_t n_probe, IvfMode mode,
                    const DcoConfig& cfg) {
    if (K < 1) throw std::invalid_argument("ivf_query: K must be >= 1");
    if (n_probe < 1 || n_probe > idx.k_clusters)
        throw std::invalid_argument("ivf_query: n_probe must be in [1, k_clusters]");
    const bool split_mode = mode == IvfMode::kAdSplit || mode == IvfMode::kPdSplit;
    if (split_mode && idx.layout != IvfLayout::kSplit)
        throw std::invalid_argument("ivf_query: split mode needs a split-layout index");
    const bool transformed_mode = mode == IvfMode::kAd || mode == IvfMode::kAdSplit;
    const float* q = transformed_mode ? q_transformed : q_raw;
    if (q == nullptr) throw std::invalid_argument("ivf_query: missing query vector");

    const auto t0 = std::chrono::steady_clock::now();
    const std::int32_t d = idx.d;
    const std::int32_t d1 = idx.d1;
    AdContext ctx;
    if (transformed_mode) ctx = AdContext(cfg, d);

    // Bucket start offsets in the flat arrays.
    std::vector<std::size_t> bucket_start(idx.k_clusters + 1, 0);
    for (std::int32_t c = 0; c < idx.k_clusters; ++c)
        bucket_start[c + 1] = bucket_start[c] + idx.buckets[c].size();

    const std::vector<std::int32_t> probes =
        probe_order(transformed_mode ? idx.centroids_t : idx.centroids_raw, q, n_probe);

    KnnResult res;
    BoundedMaxHeap heap(K);

    if (!split_mode) {
        const float* base = transformed_mode ? idx.vec_t.data() : idx.vec_raw.data();
        for (const std::int32_t c : probes) {
            for (std::size_t p = bucket_start[c]; p < bucket_start[c + 1]; ++p) {
                const float* vec = base + p * d;
                const double r = heap.threshold();
                ++res.stats.dco_count;
                switch (mode) {
                    case IvfMode::kFd: {
                        const double s = l2_sq(vec, q, d);
                        res.stats.dims_evaluated += d;
                        const double dist = std::sqrt(s);
                        if (dist <= r) heap.offer(dist, idx.ids_flat[p]);
                        break;
                    }
                    case IvfMode::kPd: {
                        const AdResult out =
                            pd_scan_kernel(vec, q, d, 0, 0.0, r, cfg.delta_d, false);
                        res.stats.dims_evaluated += out.dims;
                        if (out.positive) heap.offer(out.observed, idx.ids_flat[p]);
                        break;
                    }
                    default: {  // kAd
                        const AdResult out = ad_scan(vec, q, d, 0, 0.0, r, ctx, false);
                        res.stats.dims_evaluated += out.dims;
                        if (out.positive) heap.offer(out.observed, idx.ids_flat[p]);
                        break;
                    }
                }
            }
        }
        res.stats.candidates = res.stats.dco_count;
    } else {
        // Phase 1: the first d1 coordinates of every candidate, read from A1
        // in storage order. No decisions are made here, so the decision
        // sequence matches the contiguous modes exactly.
        const float* a1 = mode == IvfMode::kAdSplit ? idx.a1_t.data() : idx.a1_raw.data();
        const float* a2 = mode == IvfMode::kAdSplit ? idx.a2_t.data() : idx.a2_raw.data();
        const std::int32_t d2 = d - d1;

        std::size_t total = 0;
        for (const std::int32_t c : probes) total += idx.buckets[c].size();
        std::vector<double> prefix_sq;
        std::vector<std::size_t> positions;
        prefix_sq.reserve(total);
        positions.reserve(total);
        for (const std::int32_t c : probes) {
            for (std::size_t p = bucket_start[c]; p < bucket_start[c + 1]; ++p) {
                const float* v1 = a1 + p * d1;
                double s = 0.0;
                for (std::int32_t j = 0; j < d1; ++j) {
                    const double diff = static_cast<double>(v1[j]) - static_cast<double>(q[j]);
                    s += diff * diff;
                }
                prefix_sq.push_back(s);
                positions.push_back(p);
            }
        }
        res.stats.dims_evaluated += positions.size() * static_cast<std::uint64_t>(d1);
        res.stats.candidates = positions.size();
        res.stats.dco_count = positions.size();

        // Phase 2: per candidate, test the carried prefix then continue in A2.
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const std::size_t p = positions[i];
            const double r = heap.threshold();
            const float* tail = a2 + p * d2;
            AdResult out;
            if (mode == IvfMode::kAdSplit)
                out = ad_scan(tail, q + d1, d, d1, prefix_sq[i], r, ctx, true);
            else
                out = pd_scan_kernel(tail, q + d1, d, d1, prefix_sq[i], r, cfg.delta_d, true);
            res.stats.dims_evaluated += static_cast<std::uint64_t>(out.dims - d1);
            if (out.positive) heap.offer(out.observed, idx.ids_flat[p]);
        }
    }

    std::vector<std::pair<double, std::int32_t>> sorted;
    sorted.reserve(heap.heap.size());
    while (!heap.heap.empty()) {
        sorted.push_back(heap.heap.top());
        heap.heap.pop();
    }
    std::sort(sorted.begin(), sorted.end());
    res.ids.reserve(sorted.size());
    res.dists.reserve(sorted.size());
    for (const auto& [dist, id] : sorted) {
        res.ids.push_back(id);
        res.dists.push_back(dist);
    }
    res.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

void write_meta(const IvfIndex& idx, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "n=" << idx.n << "\n"
        << "d=" << idx.d << "\n"
        << "k_clusters=" << idx.k_clusters << "\n"
        << "d1=" << idx.d1 << "\n"
        << "layout=" << (idx.layout == IvfLayout::kSplit ? "split" : "contiguous") << "\n"
        << "seed=" << idx.seed << "\n";
}

Dataset as_dataset(const std::vector<float>& flat, std::int32_t n, std::int32_t d) {
    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.data = flat;
    return ds;
}

}  // namespace

void save_ivf(const IvfIndex& idx, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_meta(idx, dir / "meta.txt");
    write_fvecs(idx.centroids_t, dir / "centroids_t.fvecs");
    write_fvecs(idx.centroids_raw, dir / "centroids_raw.fvecs");
    write_ivecs_ragged(idx.buckets, dir / "buckets.ivecs");
    write_fvecs(as_dataset(idx.vec_t, idx.n, idx.d), dir / "vec_t.fvecs");
    write_fvecs(as_dataset(idx.vec_raw, idx.n, idx.d), dir / "vec_raw.fvecs");
    if (idx.layout == IvfLayout::kSplit) {
        const std::int32_t d2 = idx.d - idx.d1;
        write_fvecs(as_dataset(idx.a1_t, idx.n, idx.d1), dir / "a1_t.fvecs");
        write_fvecs(as_dataset(idx.a2_t, idx.n, d2), dir / "a2_t.fvecs");
        write_fvecs(as_dataset(idx.a1_raw, idx.n, idx.d1), dir / "a1_raw.fvecs");
        write_fvecs(as_dataset(idx.a2_raw, idx.n, d2), dir / "a2_raw.fvecs");
    }
}

IvfIndex load_ivf(const std::filesystem::path& dir) {
    std::ifstream in(dir / "meta.txt");
    if (!in) throw std::runtime_error("cannot open " + (dir / "meta.txt").string());
    IvfIndex idx;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "n") idx.n = std::stoi(val);
        else if (key == "d") idx.d = std::stoi(val);
        else if (key == "k_clusters") idx.k_clusters = std::stoi(val);
        else if (key == "d1") idx.d1 = std::stoi(val);
        else if (key == "layout") idx.layout = val == "split" ? IvfLayout::kSplit
                                                              : IvfLayout::kContiguous;
        else if (key == "seed") idx.seed = std::stoull(val);
    }

    idx.centroids_t = read_fvecs(dir / "centroids_t.fvecs");
    idx.centroids_raw = read_fvecs(dir / "centroids_raw.fvecs");
    idx.buckets = read_ivecs_ragged(dir / "buckets.ivecs");
    if (static_cast<std::int32_t>(idx.buckets.size()) != idx.k_clusters)
        throw std::runtime_error("load_ivf: bucket count does not match metadata");

    idx.ids_flat.reserve(idx.n);
    for (const auto& bucket : idx.buckets)
        for (const std::int32_t id : bucket) idx.ids_flat.push_back(id);
    if (static_cast<std::int32_t>(idx.ids_flat.size()) != idx.n)
        throw std::runtime_error("load_ivf: bucket contents do not cover the dataset");

    idx.vec_t = read_fvecs(dir / "vec_t.fvecs").data;
    idx.vec_raw = read_fvecs(dir / "vec_raw.fvecs").data;
    if (idx.layout == IvfLayout::kSplit) {
        idx.a1_t = read_fvecs(dir / "a1_t.fvecs").data;
        idx.a2_t = read_fvecs(dir / "a2_t.fvecs").data;
        idx.a1_raw = read_fvecs(dir / "a1_raw.fvecs").data;
        idx.a2_raw = read_fvecs(dir / "a2_raw.fvecs").data;
    }
    return idx;
}

const char* ivf_mode_name(IvfMode mode) {
    switch (mode) {
        case IvfMode::kFd: return "fd";
        case IvfMode::kPd: return "pd";
        case IvfMode::kAd: return "ad";
        case IvfMode::kAdSplit: return "ad-split";
        case IvfMode::kPdSplit: return "pd-split";
    }
    return "?";
}

IvfMode ivf_mode_from_name(const std::string& name) {
    if (name == "fd") return IvfMode::kFd;
    if (name == "pd") return IvfMode::kPd;
    if (name == "ad") return IvfMode::kAd;
    if (name == "ad-split") return IvfMode::kAdSplit;
    if (name == "pd-split") return IvfMode::kPdSplit;
    throw std::invalid_argument("unknown IVF mode: " + name);
}

}  // namespace adsann
