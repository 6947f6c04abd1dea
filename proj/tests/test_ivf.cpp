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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "adsann/bench.hpp"
#include "adsann/ivf.hpp"
#include "adsann/transform.hpp"
#include "oracles.hpp"

using namespace adsann;

namespace {

struct Fixture {
    Dataset raw;
    Dataset transformed;
    Dataset queries_raw;
    Dataset queries_t;
    TransformMatrix m;
};

Fixture make_fixture(std::int32_t n, std::int32_t d, std::int32_t blobs, std::int32_t nq,
                     std::uint64_t seed) {
    Fixture f;
    const Dataset all = synth_dataset(n + nq, d, blobs, 1.0, seed);
    f.raw.n = n;
    f.raw.d = d;
    f.raw.data.assign(all.data.begin(), all.data.begin() + std::size_t(n) * d);
    f.queries_raw.n = nq;
    f.queries_raw.d = d;
    f.queries_raw.data.assign(all.data.begin() + std::size_t(n) * d, all.data.end());
    f.m = generate_orthogonal(d, seed + 1);
    f.transformed = apply_dataset(f.m, f.raw);
    f.queries_t = apply_dataset(f.m, f.queries_raw);
    return f;
}

}  // namespace

TEST_CASE("kmeans with k equal to n gives singleton clusters and zero objective") {
    std::mt19937_64 gen(3);
    const Dataset ds = oracle::random_dataset(gen, 20, 8, 5.0);
    const KmeansResult km = kmeans(ds, ds.n, 25, 7);
    CHECK(km.objective == doctest::Approx(0.0).epsilon(1e-12));
    std::set<std::int32_t> used(km.assignment.begin(), km.assignment.end());
    CHECK(static_cast<std::int32_t>(used.size()) == ds.n);
}

TEST_CASE("kmeans with one cluster converges to the coordinate-wise mean") {
    std::mt19937_64 gen(5);
    const Dataset ds = oracle::random_dataset(gen, 100, 6, 2.0);
    const KmeansResult km = kmeans(ds, 1, 25, 9);
    for (std::int32_t j = 0; j < ds.d; ++j) {
        long double mean = 0.0L;
        for (std::int32_t i = 0; i < ds.n; ++i) mean += ds.row(i)[j];
        mean /= ds.n;
        CHECK(km.centroids.row(0)[j] ==
              doctest::Approx(static_cast<double>(mean)).epsilon(1e-5));
    }
}

TEST_CASE("kmeans recovers well-separated generator centers") {
    Dataset centers;
    SUBCASE("two blobs") {
        const double spread = 1.0;
        const Dataset ds = synth_dataset(400, 16, 2, spread, 11, &centers);
        const KmeansResult km = kmeans(ds, 2, 50, 13);
        for (std::int32_t c = 0; c < 2; ++c) {
            double best = 1e300;
            for (std::int32_t g = 0; g < 2; ++g)
                best = std::min(best,
                                oracle::dist(km.centroids.row(c), centers.row(g), ds.d));
            CHECK(best <= 0.5 * spread);
        }
    }
    SUBCASE("sixty-four blobs at scale") {
        const double spread = 1.0;
        const Dataset ds = synth_dataset(10000, 128, 64, spread, 17, &centers);
        const KmeansResult km = kmeans(ds, 64, 50, 19);
        std::set<std::int32_t> matched;
        for (std::int32_t g = 0; g < 64; ++g) {
            double best = 1e300;
            std::int32_t arg = -1;
            for (std::int32_t c = 0; c < 64; ++c) {
                const double dist = oracle::dist(km.centroids.row(c), centers.row(g), ds.d);
                if (dist < best) {
                    best = dist;
                    arg = c;
                }
            }
            CHECK(best <= 0.5 * spread);
            matched.insert(arg);
        }
        CHECK(matched.size() == 64);  // a distinct centroid per generator
    }
}

TEST_CASE("kmeans rejects k larger than n") {
    std::mt19937_64 gen(7);
    const Dataset ds = oracle::random_dataset(gen, 5, 4);
    CHECK_THROWS_AS(kmeans(ds, 6, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(ds, 0, 10, 1), std::invalid_argument);
}

TEST_CASE("kmeans objective is deterministic and nonincreasing across restarts") {
    std::mt19937_64 gen(15);
    const Dataset ds = oracle::random_dataset(gen, 500, 12, 3.0);
    const KmeansResult a = kmeans(ds, 10, 25, 21);
    const KmeansResult b = kmeans(ds, 10, 25, 21);
    CHECK(a.centroids.data == b.centroids.data);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("build assigns every id to exactly one bucket, the nearest centroid") {
    Fixture f = make_fixture(600, 24, 8, 4, 33);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 12, 35, IvfLayout::kContiguous);

    std::vector<int> seen(f.raw.n, 0);
    for (std::int32_t c = 0; c < idx.k_clusters; ++c)
        for (const std::int32_t id : idx.buckets[c]) ++seen[id];
    CHECK(std::count(seen.begin(), seen.end(), 1) == f.raw.n);

    // Independent nearest-centroid scan over the transformed vectors.
    for (std::int32_t c = 0; c < idx.k_clusters; ++c) {
        for (const std::int32_t id : idx.buckets[c]) {
            double best = 1e300;
            std::int32_t arg = -1;
            for (std::int32_t cc = 0; cc < idx.k_clusters; ++cc) {
                const double dist =
                    oracle::dist(f.transformed.row(id), idx.centroids_t.row(cc), f.raw.d);
                if (dist < best) {
                    best = dist;
                    arg = cc;
                }
            }
            CHECK(arg == c);
        }
    }
}

TEST_CASE("build with n equal to k gives singleton buckets") {
    Fixture f = make_fixture(16, 8, 4, 1, 41);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 16, 43);
    for (const auto& bucket : idx.buckets) CHECK(bucket.size() == 1);
}

TEST_CASE("split layout is a pure permutation of the contiguous data") {
    Fixture f = make_fixture(300, 20, 4, 1, 45);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 6, 47, IvfLayout::kSplit, 8);
    const std::int32_t d = idx.d, d1 = idx.d1;
    for (std::int32_t p = 0; p < idx.n; ++p) {
        for (std::int32_t j = 0; j < d1; ++j) {
            CHECK(idx.a1_t[std::size_t(p) * d1 + j] == idx.vec_t[std::size_t(p) * d + j]);
            CHECK(idx.a1_raw[std::size_t(p) * d1 + j] == idx.vec_raw[std::size_t(p) * d + j]);
        }
        for (std::int32_t j = d1; j < d; ++j) {
            CHECK(idx.a2_t[std::size_t(p) * (d - d1) + j - d1] ==
                  idx.vec_t[std::size_t(p) * d + j]);
            CHECK(idx.a2_raw[std::size_t(p) * (d - d1) + j - d1] ==
                  idx.vec_raw[std::size_t(p) * d + j]);
        }
    }
    CHECK_THROWS_AS(build_ivf(f.raw, f.transformed, f.m, 6, 1, IvfLayout::kSplit, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_ivf(f.raw, f.transformed, f.m, 6, 1, IvfLayout::kSplit, 20),
                    std::invalid_argument);
}

TEST_CASE("probing every cluster with full scans matches the exact oracle") {
    Fixture f = make_fixture(800, 16, 8, 10, 49);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 10, 51);
    for (std::int32_t qi = 0; qi < f.queries_raw.n; ++qi) {
        const KnnResult res = ivf_query(idx, nullptr, f.queries_raw.row(qi), 5,
                                        idx.k_clusters, IvfMode::kFd, {});
        const std::vector<std::int32_t> truth = oracle::knn(f.raw, f.queries_raw.row(qi), 5);
        REQUIRE(res.ids.size() == 5);
        CHECK(res.ids == truth);
        CHECK(res.stats.dims_evaluated ==
              static_cast<std::uint64_t>(f.raw.n) * f.raw.d);
    }
}

TEST_CASE("a database vector queries back to itself") {
    Fixture f = make_fixture(200, 12, 4, 1, 53);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 8, 55);
    const KnnResult res =
        ivf_query(idx, nullptr, f.raw.row(17), 1, idx.k_clusters, IvfMode::kFd, {});
    REQUIRE(res.ids.size() == 1);
    CHECK(res.ids[0] == 17);
    CHECK(res.dists[0] == 0.0);
}

TEST_CASE("exact modes agree and adaptive modes agree, bit for bit") {
    Fixture f = make_fixture(2000, 64, 16, 100, 57);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 40, 59, IvfLayout::kSplit, 32);
    const DcoConfig cfg{2.1, 32};

    for (std::int32_t qi = 0; qi < f.queries_raw.n; ++qi) {
        const float* qr = f.queries_raw.row(qi);
        const float* qt = f.queries_t.row(qi);
        for (const std::int32_t np : {1, 5, 40}) {
            const KnnResult fd = ivf_query(idx, qt, qr, 10, np, IvfMode::kFd, cfg);
            const KnnResult pd = ivf_query(idx, qt, qr, 10, np, IvfMode::kPd, cfg);
            const KnnResult pds = ivf_query(idx, qt, qr, 10, np, IvfMode::kPdSplit, cfg);
            CHECK(fd.ids == pd.ids);
            CHECK(fd.dists == pd.dists);
            CHECK(fd.ids == pds.ids);
            CHECK(fd.dists == pds.dists);
            CHECK(pd.stats.dims_evaluated <= fd.stats.dims_evaluated);

            const KnnResult ad = ivf_query(idx, qt, qr, 10, np, IvfMode::kAd, cfg);
            const KnnResult ads = ivf_query(idx, qt, qr, 10, np, IvfMode::kAdSplit, cfg);
            CHECK(ad.ids == ads.ids);
            CHECK(ad.dists == ads.dists);
            CHECK(ad.stats.dims_evaluated == ads.stats.dims_evaluated);
            CHECK(ad.stats.dims_evaluated <= fd.stats.dims_evaluated);
        }
    }
}

TEST_CASE("adaptive mode loses almost no recall against the full scan") {
    Fixture f = make_fixture(20000, 64, 32, 200, 61);
    const std::int32_t k_clusters = 141;  // ~sqrt(n)
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, k_clusters, 63, IvfLayout::kSplit);
    const GroundTruth gt = brute_force_knn(f.raw, f.queries_raw, 100);
    const DcoConfig cfg{2.1, 32};

    for (const std::int32_t np : {8, 32}) {
        double recall_fd = 0.0, recall_ad = 0.0;
        for (std::int32_t qi = 0; qi < f.queries_raw.n; ++qi) {
            const KnnResult fd = ivf_query(idx, nullptr, f.queries_raw.row(qi), 100, np,
                                           IvfMode::kFd, cfg);
            const KnnResult ad = ivf_query(idx, f.queries_t.row(qi), nullptr, 100, np,
                                           IvfMode::kAd, cfg);
            recall_fd += recall(fd.ids, std::span<const std::int32_t>(gt.row(qi), 100), 100);
            recall_ad += recall(ad.ids, std::span<const std::int32_t>(gt.row(qi), 100), 100);
        }
        recall_fd /= f.queries_raw.n;
        recall_ad /= f.queries_raw.n;
        CHECK(std::abs(recall_fd - recall_ad) <= 0.005);
    }
}

TEST_CASE("recall is monotone in the probe count for full scans") {
    Fixture f = make_fixture(3000, 32, 16, 50, 65);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 50, 67);
    const GroundTruth gt = brute_force_knn(f.raw, f.queries_raw, 10);

    double prev = -1.0;
    for (const std::int32_t np : {1, 2, 4, 8, 16, 32, 50}) {
        double rec = 0.0;
        for (std::int32_t qi = 0; qi < f.queries_raw.n; ++qi) {
            const KnnResult res =
                ivf_query(idx, nullptr, f.queries_raw.row(qi), 10, np, IvfMode::kFd, {});
            rec += recall(res.ids, std::span<const std::int32_t>(gt.row(qi), 10), 10);
        }
        rec /= f.queries_raw.n;
        CHECK(rec >= prev);
        prev = rec;
    }
    CHECK(prev == doctest::Approx(1.0));  // exhaustive probing is exact
}

TEST_CASE("returned distances are exact under every mode") {
    Fixture f = make_fixture(1500, 48, 8, 20, 69);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 20, 71, IvfLayout::kSplit);
    const DcoConfig cfg{2.1, 32};
    for (std::int32_t qi = 0; qi < f.queries_raw.n; ++qi) {
        const float* qr = f.queries_raw.row(qi);
        const float* qt = f.queries_t.row(qi);
        for (const IvfMode mode : {IvfMode::kFd, IvfMode::kPd, IvfMode::kAd,
                                   IvfMode::kAdSplit, IvfMode::kPdSplit}) {
            const KnnResult res = ivf_query(idx, qt, qr, 5, 10, mode, cfg);
            for (std::size_t j = 0; j < res.ids.size(); ++j) {
                const double exact = oracle::dist(f.raw.row(res.ids[j]), qr, f.raw.d);
                CHECK(std::abs(res.dists[j] - exact) <= 1e-4 * std::max(exact, 1e-12));
            }
        }
    }
}

TEST_CASE("query argument validation") {
    Fixture f = make_fixture(100, 8, 2, 1, 73);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 5, 75);
    const float* qr = f.queries_raw.row(0);
    CHECK_THROWS_AS(ivf_query(idx, nullptr, qr, 0, 1, IvfMode::kFd, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ivf_query(idx, nullptr, qr, 1, 0, IvfMode::kFd, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ivf_query(idx, nullptr, qr, 1, 6, IvfMode::kFd, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ivf_query(idx, nullptr, qr, 1, 1, IvfMode::kAdSplit, {}),
                    std::invalid_argument);  // contiguous index, split mode
    CHECK_THROWS_AS(ivf_query(idx, nullptr, qr, 1, 1, IvfMode::kAd, {}),
                    std::invalid_argument);  // missing transformed query
}

TEST_CASE("index persistence round-trips queries identically") {
    Fixture f = make_fixture(1000, 32, 8, 20, 77);
    const IvfIndex idx = build_ivf(f.raw, f.transformed, f.m, 15, 79, IvfLayout::kSplit, 16);
    const auto dir = std::filesystem::temp_directory_path() / "adsann_ivf_idx";
    save_ivf(idx, dir);
    const IvfIndex back = load_ivf(dir);
    CHECK(back.buckets == idx.buckets);
    CHECK(back.d1 == idx.d1);

    const DcoConfig cfg{2.1, 16};
    for (std::int32_t qi = 0; qi < f.queries_raw.n; ++qi) {
        const float* qr = f.queries_raw.row(qi);
        const float* qt = f.queries_t.row(qi);
        for (const IvfMode mode : {IvfMode::kFd, IvfMode::kAdSplit}) {
            const KnnResult a = ivf_query(idx, qt, qr, 5, 7, mode, cfg);
            const KnnResult b = ivf_query(back, qt, qr, 5, 7, mode, cfg);
            CHECK(a.ids == b.ids);
            CHECK(a.dists == b.dists);
            CHECK(a.stats.dims_evaluated == b.stats.dims_evaluated);
        }
    }
}
