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

#include "adsann/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "adsann/parallel.hpp"

namespace adsann {

GroundTruth brute_force_knn(const Dataset& ds, const Dataset& queries, std::int32_t K) {
    if (ds.d != queries.d)
        throw std::invalid_argument("brute_force_knn: dimensionality mismatch");
    if (K < 1) throw std::invalid_argument("brute_force_knn: K must be >= 1");
    if (K > ds.n) throw std::invalid_argument("brute_force_knn: K exceeds dataset size");

    GroundTruth gt;
    gt.n_queries = queries.n;
    gt.k_max = K;
    gt.ids.resize(static_cast<std::size_t>(queries.n) * K);

    parallel_for(0, queries.n, [&](std::int64_t qi) {
        const float* q = queries.row(static_cast<std::int32_t>(qi));
        std::priority_queue<std::pair<double, std::int32_t>> heap;
        for (std::int32_t i = 0; i < ds.n; ++i) {
            const double d2 = l2_sq(ds.row(i), q, ds.d);
            if (heap.size() < static_cast<std::size_t>(K)) {
                heap.emplace(d2, i);
            } else if (std::make_pair(d2, i) < heap.top()) {
                heap.pop();
                heap.emplace(d2, i);
            }
        }
        std::int32_t* row = gt.row(static_cast<std::int32_t>(qi));
        for (std::int32_t j = K - 1; j >= 0; --j) {
            row[j] = heap.top().second;
            heap.pop();
        }
    });
    return gt;
}

double recall(std::span<const std::int32_t> result_ids,
              std::span<const std::int32_t> gt_ids, std::int32_t K) {
    if (static_cast<std::int32_t>(gt_ids.size()) < K)
        throw std::invalid_argument("recall: ground truth shorter than K");
    std::unordered_set<std::int32_t> truth(gt_ids.begin(), gt_ids.begin() + K);
    std::int32_t hit = 0;
    for (const std::int32_t id : result_ids)
        if (truth.count(id)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(K);
}

std::optional<double> avg_distance_ratio(std::span<const double> result_dists,
                                         std::span<const double> gt_dists,
                                         std::int32_t K) {
    if (static_cast<std::int32_t>(result_dists.size()) < K ||
        static_cast<std::int32_t>(gt_dists.size()) < K)
        throw std::invalid_argument("avg_distance_ratio: need at least K distances");
    double sum = 0.0;
    for (std::int32_t i = 0; i < K; ++i) {
        if (gt_dists[i] == 0.0) {
            if (result_dists[i] == 0.0) {
                sum += 1.0;
                continue;
            }
            return std::nullopt;
        }
        sum += result_dists[i] / gt_dists[i];
    }
    return sum / static_cast<double>(K);
}

namespace {

// Ground-truth distances recomputed from ids against the raw base vectors.
std::vector<double> gt_distances(const Dataset& base, const Dataset& queries,
                                 const GroundTruth& gt, std::int32_t K) {
    std::vector<double> out(static_cast<std::size_t>(gt.n_queries) * K);
    parallel_for(0, gt.n_queries, [&](std::int64_t qi) {
        const float* q = queries.row(static_cast<std::int32_t>(qi));
        const std::int32_t* row = gt.row(static_cast<std::int32_t>(qi));
        for (std::int32_t j = 0; j < K; ++j)
            out[static_cast<std::size_t>(qi) * K + j] = l2_dist(base.row(row[j]), q, base.d);
    });
    return out;
}

struct RunObserved {
    double recall = 0.0;
    double avg_ratio = 0.0;
    double avg_dims = 0.0;
    double qps = 0.0;
    std::int32_t flagged = 0;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Times `reps` passes over the whole query set on one thread; accuracy and
// dimension counters come from the first pass (they are deterministic).
template <typename QueryFn>
RunObserved run_timed(const Dataset& queries_raw, const TransformMatrix& m,
                      bool needs_transform, const GroundTruth& gt,
                      const std::vector<double>& gt_dists, std::int32_t K, int reps,
                      const QueryFn& query_fn) {
    RunObserved obs;
    std::vector<double> rep_qps;
    for (int rep = 0; rep < reps; ++rep) {
        double recall_sum = 0.0;
        double ratio_sum = 0.0;
        std::int32_t ratio_n = 0;
        std::int32_t flagged = 0;
        std::uint64_t dims = 0;

        const auto t0 = std::chrono::steady_clock::now();
        for (std::int32_t qi = 0; qi < queries_raw.n; ++qi) {
            const float* q_raw = queries_raw.row(qi);
            KnnResult res;
            if (needs_transform) {
                const std::vector<float> q_t =
                    adsann::apply(m, std::span<const float>(q_raw, queries_raw.d));
                res = query_fn(q_t.data(), q_raw);
            } else {
                res = query_fn(nullptr, q_raw);
            }
            if (rep == 0) {
                dims += res.stats.dims_evaluated;
                recall_sum += recall(res.ids,
                                     std::span<const std::int32_t>(gt.row(qi), gt.k_max), K);
                const std::span<const double> gtd(
                    gt_dists.data() + static_cast<std::size_t>(qi) * K, K);
                if (static_cast<std::int32_t>(res.dists.size()) >= K) {
                    const auto ratio = avg_distance_ratio(res.dists, gtd, K);
                    if (ratio) {
                        ratio_sum += *ratio;
                        ++ratio_n;
                    } else {
                        ++flagged;
                    }
                } else {
                    ++flagged;
                }
            }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep_qps.push_back(static_cast<double>(queries_raw.n) / secs);

        if (rep == 0) {
            obs.recall = recall_sum / queries_raw.n;
            obs.avg_ratio = ratio_n > 0 ? ratio_sum / ratio_n : 0.0;
            obs.avg_dims = static_cast<double>(dims) / queries_raw.n;
            obs.flagged = flagged;
        }
    }
    obs.qps = median(std::move(rep_qps));
    return obs;
}

}  // namespace

const char* ivf_algo_label(IvfMode mode) {
    switch (mode) {
        case IvfMode::kFd: return "IVF";
        case IvfMode::kPd: return "IVF*";
        case IvfMode::kPdSplit: return "IVF**";
        case IvfMode::kAd: return "IVF+";
        case IvfMode::kAdSplit: return "IVF++";
    }
    return "?";
}

const char* hnsw_algo_label(HnswMode mode) {
    switch (mode) {
        case HnswMode::kPlain: return "HNSW";
        case HnswMode::kPd: return "HNSW*";
        case HnswMode::kPlus: return "HNSW+";
        case HnswMode::kPlusPlus: return "HNSW++";
    }
    return "?";
}

std::vector<BenchRecord> sweep_ivf(const IvfIndex& idx, const TransformMatrix& m,
                                   const Dataset& base_raw, const Dataset& queries_raw,
                                   const GroundTruth& gt,
                                   const std::vector<IvfMode>& modes,
                                   const std::vector<std::int32_t>& nprobe_grid,
                                   const SweepOptions& opt) {
    if (gt.k_max < opt.K) throw std::invalid_argument("sweep_ivf: ground truth too short");
    const std::vector<double> gtd = gt_distances(base_raw, queries_raw, gt, opt.K);

    std::vector<BenchRecord> records;
    for (const std::int32_t np : nprobe_grid) {
        auto run_mode = [&](IvfMode mode, int reps) {
            const bool transformed = mode == IvfMode::kAd || mode == IvfMode::kAdSplit;
            return run_timed(queries_raw, m, transformed, gt, gtd, opt.K, reps,
                             [&](const float* qt, const float* qr) {
                                 return ivf_query(idx, qt, qr, opt.K, np, mode, opt.cfg);
                             });
        };

        // Full-scan baseline pins the 100% dimension count for this param.
        const bool fd_requested =
            std::find(modes.begin(), modes.end(), IvfMode::kFd) != modes.end();
        const RunObserved fd_obs = run_mode(IvfMode::kFd, fd_requested ? opt.reps : 1);

        for (const IvfMode mode : modes) {
            const RunObserved obs = mode == IvfMode::kFd ? fd_obs : run_mode(mode, opt.reps);
            BenchRecord rec;
            rec.algo = ivf_algo_label(mode);
            rec.param = np;
            rec.qps = obs.qps;
            rec.recall = obs.recall;
            rec.avg_ratio = obs.avg_ratio;
            rec.avg_dims = obs.avg_dims;
            rec.dims_pct = fd_obs.avg_dims > 0 ? 100.0 * obs.avg_dims / fd_obs.avg_dims : 0.0;
            rec.flagged_queries = obs.flagged;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<BenchRecord> sweep_hnsw(const HnswGraph& g, const TransformMatrix& m,
                                    const Dataset& base_raw, const Dataset& queries_raw,
                                    const GroundTruth& gt,
                                    const std::vector<HnswMode>& modes,
                                    const std::vector<std::int32_t>& nef_grid,
                                    const SweepOptions& opt) {
    if (gt.k_max < opt.K) throw std::invalid_argument("sweep_hnsw: ground truth too short");
    const std::vector<double> gtd = gt_distances(base_raw, queries_raw, gt, opt.K);

    std::vector<BenchRecord> records;
    for (const std::int32_t nef : nef_grid) {
        auto run_mode = [&](HnswMode mode, int reps) {
            const bool transformed = mode == HnswMode::kPlus || mode == HnswMode::kPlusPlus;
            return run_timed(queries_raw, m, transformed, gt, gtd, opt.K, reps,
                             [&](const float* qt, const float* qr) {
                                 return hnsw_query(g, qt, qr, opt.K, nef, mode, opt.cfg);
                             });
        };

        const bool plain_requested =
            std::find(modes.begin(), modes.end(), HnswMode::kPlain) != modes.end();
        const RunObserved plain_obs = run_mode(HnswMode::kPlain, plain_requested ? opt.reps : 1);

        for (const HnswMode mode : modes) {
            const RunObserved obs =
                mode == HnswMode::kPlain ? plain_obs : run_mode(mode, opt.reps);
            BenchRecord rec;
            rec.algo = hnsw_algo_label(mode);
            rec.param = nef;
            rec.qps = obs.qps;
            rec.recall = obs.recall;
            rec.avg_ratio = obs.avg_ratio;
            rec.avg_dims = obs.avg_dims;
            rec.dims_pct =
                plain_obs.avg_dims > 0 ? 100.0 * obs.avg_dims / plain_obs.avg_dims : 0.0;
            rec.flagged_queries = obs.flagged;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

void write_bench_csv(const std::vector<BenchRecord>& records,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "algo,param,qps,recall,avg_ratio,avg_dims,dims_pct\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.2f,%.6f,%.6f,%.2f,%.2f\n", r.algo.c_str(),
                      r.param, r.qps, r.recall, r.avg_ratio, r.avg_dims, r.dims_pct);
        out << buf;
    }
}

std::vector<TheoryRow> verify_theory(const Dataset& ds_t, const Dataset& queries_t,
                                     std::int32_t K, std::vector<double> epsilon0_grid) {
    if (ds_t.d != queries_t.d)
        throw std::invalid_argument("verify_theory: dimensionality mismatch");
    if (K < 1 || K > ds_t.n) throw std::invalid_argument("verify_theory: bad K");
    std::sort(epsilon0_grid.begin(), epsilon0_grid.end());
    const int G = static_cast<int>(epsilon0_grid.size());
    const std::int32_t n = ds_t.n;
    const std::int32_t dim = ds_t.d;

    // Rejection factors for every eps0 at delta_d = 1.
    std::vector<AdContext> ctx;
    ctx.reserve(G);
    for (const double eps : epsilon0_grid) ctx.emplace_back(DcoConfig{eps, 1}, dim);

    constexpr int kChunks = 64;
    struct Acc {
        std::vector<std::uint64_t> dims;
        std::vector<std::uint64_t> failures;
        std::uint64_t positives = 0;
    };
    std::vector<Acc> accs(kChunks);
    for (auto& a : accs) {
        a.dims.assign(G, 0);
        a.failures.assign(G, 0);
    }

    parallel_chunks(0, queries_t.n, [&](std::int64_t lo, std::int64_t hi, int chunk) {
        Acc& acc = accs[chunk];
        std::vector<double> dist_sq(n);
        std::vector<std::int32_t> reject_at(G);
        for (std::int64_t qi = lo; qi < hi; ++qi) {
            const float* q = queries_t.row(static_cast<std::int32_t>(qi));

            for (std::int32_t i = 0; i < n; ++i) dist_sq[i] = l2_sq(ds_t.row(i), q, dim);
            std::vector<double> kth(dist_sq);
            std::nth_element(kth.begin(), kth.begin() + (K - 1), kth.end());
            const double r_sq = kth[K - 1];

            for (std::int32_t i = 0; i < n; ++i) {
                const bool positive = dist_sq[i] <= r_sq;
                if (positive) ++acc.positives;

                const float* o = ds_t.row(i);
                double s = 0.0;
                int first_active = 0;  // grid is ascending; small eps0 rejects first
                std::fill(reject_at.begin(), reject_at.end(), 0);
                for (std::int32_t d = 1; d < dim && first_active < G; ++d) {
                    const double a = static_cast<double>(o[d - 1]) - static_cast<double>(q[d - 1]);
                    s += a * a;
                    while (first_active < G && s > ctx[first_active].factor[d] * r_sq) {
                        reject_at[first_active] = d;
                        ++first_active;
                    }
                }
                for (int gi = 0; gi < G; ++gi) {
                    if (reject_at[gi] > 0) {
                        acc.dims[gi] += reject_at[gi];
                        if (positive) ++acc.failures[gi];
                    } else {
                        acc.dims[gi] += dim;  // ran to d = D, exact comparison
                    }
                }
            }
        }
    }, kChunks);

    std::vector<std::uint64_t> dims(G, 0), failures(G, 0);
    std::uint64_t positives = 0;
    for (const auto& a : accs) {
        positives += a.positives;
        for (int gi = 0; gi < G; ++gi) {
            dims[gi] += a.dims[gi];
            failures[gi] += a.failures[gi];
        }
    }

    const double total_dcos =
        static_cast<double>(queries_t.n) * static_cast<double>(n);
    std::vector<TheoryRow> rows(G);
    for (int gi = 0; gi < G; ++gi) {
        rows[gi].epsilon0 = epsilon0_grid[gi];
        rows[gi].failures = failures[gi];
        rows[gi].positives = positives;
        rows[gi].failure_rate =
            positives > 0 ? static_cast<double>(failures[gi]) / positives : 0.0;
        rows[gi].avg_dims = static_cast<double>(dims[gi]) / total_dcos;
    }
    return rows;
}

void write_theory_csv(const std::vector<TheoryRow>& rows,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "epsilon0,failure_rate,avg_dims,failures,positives\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.8f,%.4f,%llu,%llu\n", r.epsilon0,
                      r.failure_rate, r.avg_dims,
                      static_cast<unsigned long long>(r.failures),
                      static_cast<unsigned long long>(r.positives));
        out << buf;
    }
}

}  // namespace adsann
