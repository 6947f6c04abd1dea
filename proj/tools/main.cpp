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

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adsann/bench.hpp"
#include "adsann/dco.hpp"
#include "adsann/hnsw.hpp"
#include "adsann/ivf.hpp"
#include "adsann/transform.hpp"
#include "adsann/vecio.hpp"

using namespace adsann;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ADSANN_SEED")) return std::strtoull(env, nullptr, 10);
    return 42;
}

void print_summary(const char* label, std::int32_t param, double recall_val,
                   double avg_dims, double secs, std::int32_t nq) {
    std::printf("%s param=%d recall=%.4f avg_dims=%.1f qps=%.1f\n", label, param, recall_val,
                avg_dims, nq / secs);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive distance-comparison ANN toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = default_seed();

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic blob dataset");
    std::int32_t sy_n = 10000, sy_nq = 100, sy_d = 128, sy_blobs = 64;
    double sy_spread = 1.0;
    std::string sy_base = "base.fvecs", sy_query = "query.fvecs";
    synth->add_option("--n", sy_n, "base vectors");
    synth->add_option("--nq", sy_nq, "query vectors");
    synth->add_option("--d", sy_d, "dimensions");
    synth->add_option("--blobs", sy_blobs, "number of blobs");
    synth->add_option("--spread", sy_spread, "expected noise norm per vector");
    synth->add_option("--seed", seed, "RNG seed")->envname("ADSANN_SEED");
    synth->add_option("--out-base", sy_base, "output fvecs for base vectors");
    synth->add_option("--out-query", sy_query, "output fvecs for query vectors");

    // ---- transform ----
    auto* tr = app.add_subcommand("transform", "rotate a dataset with a random orthogonal matrix");
    std::string tr_data, tr_out, tr_matrix;
    tr->add_option("--data", tr_data, "input fvecs")->required();
    tr->add_option("--out-data", tr_out, "output fvecs (rotated)")->required();
    tr->add_option("--out-matrix", tr_matrix, "output fvecs for the matrix")->required();
    tr->add_option("--seed", seed, "RNG seed")->envname("ADSANN_SEED");

    // ---- gt ----
    auto* gt_cmd = app.add_subcommand("gt", "exact ground truth by brute force");
    std::string gt_data, gt_queries, gt_out;
    std::int32_t gt_k = 100;
    gt_cmd->add_option("--data", gt_data, "base fvecs")->required();
    gt_cmd->add_option("--queries", gt_queries, "query fvecs")->required();
    gt_cmd->add_option("--K", gt_k, "neighbors per query");
    gt_cmd->add_option("--out", gt_out, "output ivecs")->required();

    // ---- build-ivf ----
    auto* bivf = app.add_subcommand("build-ivf", "build an inverted-file index");
    std::string bivf_data, bivf_data_t, bivf_matrix, bivf_out;
    std::int32_t bivf_k = 0, bivf_d1 = 32;
    std::string bivf_layout = "split";
    bivf->add_option("--data", bivf_data, "raw base fvecs")->required();
    bivf->add_option("--data-t", bivf_data_t, "rotated base fvecs")->required();
    bivf->add_option("--matrix", bivf_matrix, "transform matrix fvecs")->required();
    bivf->add_option("--k-clusters", bivf_k, "clusters (default ceil(sqrt(n)))");
    bivf->add_option("--layout", bivf_layout, "contiguous|split");
    bivf->add_option("--d1", bivf_d1, "split point for the two-array layout");
    bivf->add_option("--seed", seed, "RNG seed")->envname("ADSANN_SEED");
    bivf->add_option("--out", bivf_out, "output index directory")->required();

    // ---- query-ivf ----
    auto* qivf = app.add_subcommand("query-ivf", "query an inverted-file index");
    std::string qivf_index, qivf_queries, qivf_matrix, qivf_gt, qivf_mode = "ad-split",
                qivf_out;
    std::int32_t qivf_K = 10, qivf_np = 16;
    DcoConfig qivf_cfg;
    qivf->add_option("--index", qivf_index, "index directory")->required();
    qivf->add_option("--queries", qivf_queries, "raw query fvecs")->required();
    qivf->add_option("--matrix", qivf_matrix, "transform matrix fvecs (adaptive modes)");
    qivf->add_option("--gt", qivf_gt, "ground-truth ivecs (prints recall)");
    qivf->add_option("--K", qivf_K, "results per query");
    qivf->add_option("--nprobe", qivf_np, "clusters to probe");
    qivf->add_option("--mode", qivf_mode, "fd|pd|ad|ad-split|pd-split");
    qivf->add_option("--epsilon0", qivf_cfg.epsilon0, "test significance knob");
    qivf->add_option("--delta-d", qivf_cfg.delta_d, "dimensions per test batch");
    qivf->add_option("--out", qivf_out, "write result ids as ivecs");

    // ---- build-hnsw ----
    auto* bh = app.add_subcommand("build-hnsw", "build a layered proximity graph");
    std::string bh_data, bh_data_t, bh_out;
    std::int32_t bh_M = 16, bh_efc = 500;
    bh->add_option("--data", bh_data, "raw base fvecs")->required();
    bh->add_option("--data-t", bh_data_t, "rotated base fvecs")->required();
    bh->add_option("--M", bh_M, "max out-degree on upper layers");
    bh->add_option("--ef-construction", bh_efc, "construction beam width");
    bh->add_option("--seed", seed, "RNG seed")->envname("ADSANN_SEED");
    bh->add_option("--out", bh_out, "output index directory")->required();

    // ---- query-hnsw ----
    auto* qh = app.add_subcommand("query-hnsw", "query a layered proximity graph");
    std::string qh_index, qh_data, qh_data_t, qh_queries, qh_matrix, qh_gt,
                qh_mode = "plusplus", qh_out;
    std::int32_t qh_K = 10, qh_nef = 100;
    DcoConfig qh_cfg;
    qh->add_option("--index", qh_index, "index directory")->required();
    qh->add_option("--data", qh_data, "raw base fvecs")->required();
    qh->add_option("--data-t", qh_data_t, "rotated base fvecs")->required();
    qh->add_option("--queries", qh_queries, "raw query fvecs")->required();
    qh->add_option("--matrix", qh_matrix, "transform matrix fvecs (adaptive modes)");
    qh->add_option("--gt", qh_gt, "ground-truth ivecs (prints recall)");
    qh->add_option("--K", qh_K, "results per query");
    qh->add_option("--nef", qh_nef, "beam width");
    qh->add_option("--mode", qh_mode, "plain|pd|plus|plusplus");
    qh->add_option("--epsilon0", qh_cfg.epsilon0, "test significance knob");
    qh->add_option("--delta-d", qh_cfg.delta_d, "dimensions per test batch");
    qh->add_option("--out", qh_out, "write result ids as ivecs");

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "build indexes and sweep the query parameter");
    std::string be_data, be_queries, be_gt, be_desc, be_out = "bench.csv",
                be_family = "both";
    std::int32_t be_K = 10, be_kclusters = 0, be_M = 16, be_efc = 500, be_d1 = 32;
    int be_reps = 3;
    DcoConfig be_cfg;
    std::vector<std::int32_t> be_nprobe = {4, 8, 16, 32, 64};
    std::vector<std::int32_t> be_nef = {50, 100, 200};
    bench->add_option("--data", be_data, "raw base fvecs");
    bench->add_option("--queries", be_queries, "raw query fvecs");
    bench->add_option("--gt", be_gt, "ground-truth ivecs (computed when absent)");
    bench->add_option("--descriptor", be_desc,
                      "dataset descriptor file supplying the three paths above");
    bench->add_option("--family", be_family, "ivf|hnsw|both");
    bench->add_option("--K", be_K, "results per query");
    bench->add_option("--k-clusters", be_kclusters, "clusters (default ceil(sqrt(n)))");
    bench->add_option("--M", be_M, "graph degree parameter");
    bench->add_option("--ef-construction", be_efc, "construction beam width");
    bench->add_option("--d1", be_d1, "split point for the two-array layout");
    bench->add_option("--nprobe-grid", be_nprobe, "IVF sweep values");
    bench->add_option("--nef-grid", be_nef, "graph sweep values");
    bench->add_option("--epsilon0", be_cfg.epsilon0, "test significance knob");
    bench->add_option("--delta-d", be_cfg.delta_d, "dimensions per test batch");
    bench->add_option("--reps", be_reps, "timed repetitions per record");
    bench->add_option("--seed", seed, "RNG seed")->envname("ADSANN_SEED");
    bench->add_option("--out", be_out, "output CSV");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "fixed-threshold reliability study");
    std::string ve_data, ve_queries, ve_out = "verify.csv";
    std::int32_t ve_K = 100;
    std::vector<double> ve_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    verify->add_option("--data", ve_data, "raw base fvecs")->required();
    verify->add_option("--queries", ve_queries, "raw query fvecs")->required();
    verify->add_option("--K", ve_K, "rank of the fixed threshold distance");
    verify->add_option("--eps-grid", ve_grid, "epsilon0 values");
    verify->add_option("--seed", seed, "RNG seed")->envname("ADSANN_SEED");
    verify->add_option("--out", ve_out, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const Dataset all = synth_dataset(sy_n + sy_nq, sy_d, sy_blobs, sy_spread, seed);
            Dataset base{sy_n, sy_d, {all.data.begin(),
                                      all.data.begin() + static_cast<std::size_t>(sy_n) * sy_d}};
            Dataset query{sy_nq, sy_d,
                          {all.data.begin() + static_cast<std::size_t>(sy_n) * sy_d,
                           all.data.end()}};
            write_fvecs(base, sy_base);
            write_fvecs(query, sy_query);
            std::printf("wrote %s (%d x %d) and %s (%d x %d)\n", sy_base.c_str(), sy_n, sy_d,
                        sy_query.c_str(), sy_nq, sy_d);
        } else if (tr->parsed()) {
            const Dataset ds = read_fvecs(tr_data);
            const TransformMatrix m = generate_orthogonal(ds.d, seed);
            write_fvecs(apply_dataset(m, ds), tr_out);
            save_matrix(m, tr_matrix);
            std::printf("rotated %d x %d vectors; matrix saved to %s\n", ds.n, ds.d,
                        tr_matrix.c_str());
        } else if (gt_cmd->parsed()) {
            const Dataset ds = read_fvecs(gt_data);
            const Dataset queries = read_fvecs(gt_queries);
            write_ivecs(brute_force_knn(ds, queries, gt_k), gt_out);
            std::printf("wrote exact top-%d ids for %d queries to %s\n", gt_k, queries.n,
                        gt_out.c_str());
        } else if (bivf->parsed()) {
            const Dataset raw = read_fvecs(bivf_data);
            const Dataset dst = read_fvecs(bivf_data_t);
            const TransformMatrix m = load_matrix(bivf_matrix);
            if (bivf_k <= 0)
                bivf_k = static_cast<std::int32_t>(std::ceil(std::sqrt(double(raw.n))));
            const IvfLayout layout =
                bivf_layout == "contiguous" ? IvfLayout::kContiguous : IvfLayout::kSplit;
            const IvfIndex idx = build_ivf(raw, dst, m, bivf_k, seed, layout, bivf_d1);
            save_ivf(idx, bivf_out);
            std::printf("built IVF index: %d clusters over %d vectors -> %s\n", bivf_k, raw.n,
                        bivf_out.c_str());
        } else if (qivf->parsed()) {
            const IvfIndex idx = load_ivf(qivf_index);
            const Dataset queries = read_fvecs(qivf_queries);
            const IvfMode mode = ivf_mode_from_name(qivf_mode);
            const bool needs_t = mode == IvfMode::kAd || mode == IvfMode::kAdSplit;
            TransformMatrix m;
            if (needs_t) {
                if (qivf_matrix.empty())
                    throw std::invalid_argument("adaptive modes need --matrix");
                m = load_matrix(qivf_matrix);
            }
            GroundTruth gt;
            if (!qivf_gt.empty()) gt = read_ivecs(qivf_gt);

            GroundTruth results;
            results.n_queries = queries.n;
            results.k_max = qivf_K;
            results.ids.assign(static_cast<std::size_t>(queries.n) * qivf_K, -1);
            double recall_sum = 0.0, dims = 0.0, secs = 0.0;
            for (std::int32_t qi = 0; qi < queries.n; ++qi) {
                const float* qr = queries.row(qi);
                std::vector<float> qt;
                if (needs_t) qt = adsann::apply(m, std::span<const float>(qr, queries.d));
                const KnnResult res = ivf_query(idx, needs_t ? qt.data() : nullptr, qr, qivf_K,
                                                qivf_np, mode, qivf_cfg);
                for (std::size_t j = 0; j < res.ids.size(); ++j)
                    results.row(qi)[j] = res.ids[j];
                dims += static_cast<double>(res.stats.dims_evaluated);
                secs += res.stats.seconds;
                if (gt.n_queries > 0)
                    recall_sum += recall(res.ids,
                                         std::span<const std::int32_t>(gt.row(qi), gt.k_max),
                                         qivf_K);
            }
            print_summary(ivf_algo_label(mode), qivf_np,
                          gt.n_queries > 0 ? recall_sum / queries.n : -1.0, dims / queries.n,
                          secs, queries.n);
            if (!qivf_out.empty()) write_ivecs(results, qivf_out);
        } else if (bh->parsed()) {
            const Dataset raw = read_fvecs(bh_data);
            const Dataset dst = read_fvecs(bh_data_t);
            const HnswGraph g = build_hnsw(raw, dst, bh_M, bh_efc, seed);
            save_hnsw(g, bh_out);
            std::printf("built graph: %d vertices, max layer %d -> %s\n", g.n, g.max_layer,
                        bh_out.c_str());
        } else if (qh->parsed()) {
            const Dataset raw = read_fvecs(qh_data);
            const Dataset dst = read_fvecs(qh_data_t);
            const HnswGraph g = load_hnsw(qh_index, raw, dst);
            const Dataset queries = read_fvecs(qh_queries);
            const HnswMode mode = hnsw_mode_from_name(qh_mode);
            const bool needs_t = mode == HnswMode::kPlus || mode == HnswMode::kPlusPlus;
            TransformMatrix m;
            if (needs_t) {
                if (qh_matrix.empty())
                    throw std::invalid_argument("adaptive modes need --matrix");
                m = load_matrix(qh_matrix);
            }
            GroundTruth gt;
            if (!qh_gt.empty()) gt = read_ivecs(qh_gt);

            GroundTruth results;
            results.n_queries = queries.n;
            results.k_max = qh_K;
            results.ids.assign(static_cast<std::size_t>(queries.n) * qh_K, -1);
            double recall_sum = 0.0, dims = 0.0, secs = 0.0;
            for (std::int32_t qi = 0; qi < queries.n; ++qi) {
                const float* qr = queries.row(qi);
                std::vector<float> qt;
                if (needs_t) qt = adsann::apply(m, std::span<const float>(qr, queries.d));
                const KnnResult res =
                    hnsw_query(g, needs_t ? qt.data() : nullptr, qr, qh_K, qh_nef, mode, qh_cfg);
                for (std::size_t j = 0; j < res.ids.size(); ++j)
                    results.row(qi)[j] = res.ids[j];
                dims += static_cast<double>(res.stats.dims_evaluated);
                secs += res.stats.seconds;
                if (gt.n_queries > 0)
                    recall_sum += recall(res.ids,
                                         std::span<const std::int32_t>(gt.row(qi), gt.k_max),
                                         qh_K);
            }
            print_summary(hnsw_algo_label(mode), qh_nef,
                          gt.n_queries > 0 ? recall_sum / queries.n : -1.0, dims / queries.n,
                          secs, queries.n);
            if (!qh_out.empty()) write_ivecs(results, qh_out);
        } else if (bench->parsed()) {
            if (!be_desc.empty()) {
                const DatasetDesc desc = read_descriptor(be_desc);
                if (be_data.empty()) be_data = desc.base_path;
                if (be_queries.empty()) be_queries = desc.query_path;
                if (be_gt.empty()) be_gt = desc.gt_path;
            }
            if (be_data.empty() || be_queries.empty())
                throw std::invalid_argument("bench needs --data/--queries or --descriptor");
            const Dataset raw = read_fvecs(be_data);
            const Dataset queries = read_fvecs(be_queries);
            const TransformMatrix m = generate_orthogonal(raw.d, seed);
            const Dataset dst = apply_dataset(m, raw);
            GroundTruth gt;
            if (!be_gt.empty())
                gt = read_ivecs(be_gt);
            else
                gt = brute_force_knn(raw, queries, be_K);

            SweepOptions opt;
            opt.K = be_K;
            opt.cfg = be_cfg;
            opt.reps = be_reps;
            std::vector<BenchRecord> records;
            if (be_family == "ivf" || be_family == "both") {
                if (be_kclusters <= 0)
                    be_kclusters =
                        static_cast<std::int32_t>(std::ceil(std::sqrt(double(raw.n))));
                const IvfIndex idx =
                    build_ivf(raw, dst, m, be_kclusters, seed, IvfLayout::kSplit, be_d1);
                const std::vector<IvfMode> modes = {IvfMode::kFd, IvfMode::kPd,
                                                    IvfMode::kPdSplit, IvfMode::kAd,
                                                    IvfMode::kAdSplit};
                auto recs = sweep_ivf(idx, m, raw, queries, gt, modes, be_nprobe, opt);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            if (be_family == "hnsw" || be_family == "both") {
                const HnswGraph g = build_hnsw(raw, dst, be_M, be_efc, seed);
                const std::vector<HnswMode> modes = {HnswMode::kPlain, HnswMode::kPd,
                                                     HnswMode::kPlus, HnswMode::kPlusPlus};
                auto recs = sweep_hnsw(g, m, raw, queries, gt, modes, be_nef, opt);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            write_bench_csv(records, be_out);
            std::printf("wrote %zu records to %s\n", records.size(), be_out.c_str());
        } else if (verify->parsed()) {
            const Dataset raw = read_fvecs(ve_data);
            const Dataset queries = read_fvecs(ve_queries);
            const TransformMatrix m = generate_orthogonal(raw.d, seed);
            const Dataset dst = apply_dataset(m, raw);
            const Dataset qst = apply_dataset(m, queries);
            const auto rows = verify_theory(dst, qst, ve_K, ve_grid);
            write_theory_csv(rows, ve_out);
            for (const auto& r : rows)
                std::printf("epsilon0=%.2f failure_rate=%.6f avg_dims=%.2f\n", r.epsilon0,
                            r.failure_rate, r.avg_dims);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
