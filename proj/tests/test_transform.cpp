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

#include <cmath>
#include <random>

#include "adsann/transform.hpp"
#include "oracles.hpp"

using namespace adsann;

namespace {

double gram_deviation(const TransformMatrix& m) {
    double worst = 0.0;
    for (std::int32_t i = 0; i < m.dim; ++i) {
        for (std::int32_t j = i; j < m.dim; ++j) {
            long double g = 0.0L;
            for (std::int32_t c = 0; c < m.dim; ++c)
                g += static_cast<long double>(m.row(i)[c]) * m.row(j)[c];
            const double dev = std::abs(static_cast<double>(g) - (i == j ? 1.0 : 0.0));
            if (dev > worst) worst = dev;
        }
    }
    return worst;
}

double norm(const std::vector<float>& v) {
    long double s = 0.0L;
    for (float x : v) s += static_cast<long double>(x) * x;
    return static_cast<double>(sqrtl(s));
}

}  // namespace

TEST_CASE("dim 1 yields +1 or -1") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
        const TransformMatrix m = generate_orthogonal(1, seed);
        CHECK(std::abs(std::abs(m.entries[0]) - 1.0) < 1e-14);
    }
}

TEST_CASE("rows are orthonormal to 1e-10") {
    const TransformMatrix m = generate_orthogonal(64, 42);
    CHECK(gram_deviation(m) <= 1e-10);
}

TEST_CASE("single sampled dimension is an unbiased norm estimator") {
    const std::int32_t d = 32;
    const TransformMatrix m = generate_orthogonal(d, 7);
    std::mt19937_64 gen(11);
    double sum = 0.0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const std::vector<float> x = oracle::random_vec(gen, d);
        const std::vector<float> y = adsann::apply(m, x);
        const double nx = norm(x);
        sum += d * static_cast<double>(y[0]) * y[0] / (nx * nx);
    }
    const double mean = sum / trials;
    CHECK(mean >= 0.8);
    CHECK(mean <= 1.2);
}

TEST_CASE("apply maps zero to zero and preserves norms") {
    const std::int32_t d = 64;
    const TransformMatrix m = generate_orthogonal(d, 3);

    const std::vector<float> zero(d, 0.0f);
    for (float v : adsann::apply(m, zero)) CHECK(v == 0.0f);

    std::mt19937_64 gen(5);
    for (int t = 0; t < 10000; ++t) {
        const std::vector<float> x = oracle::random_vec(gen, d, 4.0);
        const double nx = norm(x);
        const double ny = norm(adsann::apply(m, x));
        CHECK(std::abs(ny / nx - 1.0) <= 1e-5);
    }
}

TEST_CASE("applying to a basis vector reads off a matrix column") {
    const std::int32_t d = 16;
    const TransformMatrix m = generate_orthogonal(d, 21);
    std::vector<float> e1(d, 0.0f);
    e1[0] = 1.0f;
    const std::vector<float> y = adsann::apply(m, e1);
    for (std::int32_t i = 0; i < d; ++i)
        CHECK(y[i] == static_cast<float>(m.row(i)[0]));
}

TEST_CASE("apply_dataset preserves pairwise distances") {
    const std::int32_t d = 48;
    const TransformMatrix m = generate_orthogonal(d, 17);
    std::mt19937_64 gen(23);
    const Dataset ds = oracle::random_dataset(gen, 60, d, 3.0);
    const Dataset out = apply_dataset(m, ds);
    REQUIRE(out.n == ds.n);

    for (int t = 0; t < 100; ++t) {
        const std::int32_t i = static_cast<std::int32_t>(gen() % ds.n);
        const std::int32_t j = static_cast<std::int32_t>(gen() % ds.n);
        const double before = oracle::dist(ds.row(i), ds.row(j), d);
        const double after = oracle::dist(out.row(i), out.row(j), d);
        if (before > 0)
            CHECK(std::abs(after - before) <= 1e-5 * before);
    }
}

TEST_CASE("a single-row dataset transforms like the vector op") {
    const std::int32_t d = 8;
    const TransformMatrix m = generate_orthogonal(d, 2);
    std::mt19937_64 gen(1);
    Dataset ds = oracle::random_dataset(gen, 1, d);
    const Dataset out = apply_dataset(m, ds);
    const std::vector<float> y = adsann::apply(m, std::span<const float>(ds.row(0), d));
    for (std::int32_t j = 0; j < d; ++j) CHECK(out.row(0)[j] == y[j]);
}

TEST_CASE("transpose application inverts the rotation") {
    const std::int32_t d = 32;
    const TransformMatrix m = generate_orthogonal(d, 77);
    std::mt19937_64 gen(9);
    for (int t = 0; t < 50; ++t) {
        const std::vector<float> x = oracle::random_vec(gen, d, 2.0);
        const std::vector<float> back = apply_transpose(m, adsann::apply(m, x));
        const double nx = norm(x);
        for (std::int32_t j = 0; j < d; ++j)
            CHECK(std::abs(back[j] - x[j]) <= 1e-5 * (nx > 1 ? nx : 1.0));
    }
}

TEST_CASE("prefix application matches the head of the full product bitwise") {
    const std::int32_t d = 40;
    const TransformMatrix m = generate_orthogonal(d, 13);
    std::mt19937_64 gen(31);
    const std::vector<float> x = oracle::random_vec(gen, d);
    const std::vector<float> full = adsann::apply(m, x);
    for (std::int32_t pre : {1, 7, 20, 40}) {
        const std::vector<float> head = apply_prefix(m, x, pre);
        REQUIRE(static_cast<std::int32_t>(head.size()) == pre);
        for (std::int32_t i = 0; i < pre; ++i) CHECK(head[i] == full[i]);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    const TransformMatrix a = generate_orthogonal(24, 5);
    const TransformMatrix b = generate_orthogonal(24, 5);
    CHECK(a.entries == b.entries);
    const TransformMatrix c = generate_orthogonal(24, 6);
    CHECK(a.entries != c.entries);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(generate_orthogonal(0, 1), std::invalid_argument);
    const TransformMatrix m = generate_orthogonal(4, 1);
    const std::vector<float> wrong(5, 1.0f);
    CHECK_THROWS_AS(adsann::apply(m, wrong), std::invalid_argument);
    CHECK_THROWS_AS(apply_transpose(m, wrong), std::invalid_argument);
}

TEST_CASE("matrix persistence round-trips through fvecs") {
    const std::int32_t d = 24;
    const TransformMatrix m = generate_orthogonal(d, 4);
    const auto path = std::filesystem::temp_directory_path() / "adsann_matrix.fvecs";
    save_matrix(m, path);
    const TransformMatrix back = load_matrix(path, m.seed);
    REQUIRE(back.dim == d);
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        CHECK(back.entries[i] == static_cast<double>(static_cast<float>(m.entries[i])));
    // Rounded to 32-bit, the reloaded matrix is still an isometry to ~1e-6.
    CHECK(gram_deviation(back) <= 1e-5);
}
