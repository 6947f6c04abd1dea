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

#include "adsann/transform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "adsann/parallel.hpp"
#include "adsann/rng.hpp"

namespace adsann {

namespace {

double dot(const double* a, const double* b, std::int32_t n) {
    double s = 0.0;
    for (std::int32_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// Subtracts the projections of row i onto the already-orthonormal rows.
void orthogonalize_against_prefix(std::vector<double>& m, std::int32_t dim,
                                  std::int32_t i) {
    double* v = m.data() + static_cast<std::size_t>(i) * dim;
    for (std::int32_t j = 0; j < i; ++j) {
        const double* q = m.data() + static_cast<std::size_t>(j) * dim;
        const double proj = dot(v, q, dim);
        for (std::int32_t c = 0; c < dim; ++c) v[c] -= proj * q[c];
    }
}

}  // namespace

TransformMatrix generate_orthogonal(std::int32_t dim, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("generate_orthogonal: dim must be >= 1");

    TransformMatrix m;
    m.dim = dim;
    m.seed = seed;
    m.entries.resize(static_cast<std::size_t>(dim) * dim);

    Rng rng = Rng::for_stream(seed, rng_stream::kTransform);
    for (auto& e : m.entries) e = rng.normal();

    for (std::int32_t i = 0; i < dim; ++i) {
        double* v = m.entries.data() + static_cast<std::size_t>(i) * dim;
        for (int attempt = 0;; ++attempt) {
            orthogonalize_against_prefix(m.entries, dim, i);
            orthogonalize_against_prefix(m.entries, dim, i);
            const double norm = std::sqrt(dot(v, v, dim));
            if (norm > 1e-8) {
                for (std::int32_t c = 0; c < dim; ++c) v[c] /= norm;
                break;
            }
            // Degenerate draw (prob ~0): resample the row and retry.
            if (attempt > 8)
                throw std::runtime_error("generate_orthogonal: could not orthonormalize");
            for (std::int32_t c = 0; c < dim; ++c) v[c] = rng.normal();
        }
    }

    // Construction-time invariant: max |P P^T - I| <= 1e-10.
    constexpr int kChunks = 64;
    std::vector<double> chunk_max(kChunks, 0.0);
    parallel_chunks(0, dim, [&](std::int64_t lo, std::int64_t hi, int chunk) {
        double local = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const double* ri = m.row(static_cast<std::int32_t>(i));
            for (std::int32_t j = static_cast<std::int32_t>(i); j < dim; ++j) {
                const double g = dot(ri, m.row(j), dim);
                const double dev = std::abs(g - (i == j ? 1.0 : 0.0));
                if (dev > local) local = dev;
            }
        }
        chunk_max[chunk] = local;
    }, kChunks);
    double worst = 0.0;
    for (double v : chunk_max)
        if (v > worst) worst = v;
    if (worst > 1e-10)
        throw std::runtime_error("generate_orthogonal: orthonormality deviation " +
                                 std::to_string(worst) + " exceeds 1e-10");
    return m;
}

std::vector<float> apply(const TransformMatrix& m, std::span<const float> x) {
    return apply_prefix(m, x, m.dim);
}

std::vector<float> apply_prefix(const TransformMatrix& m, std::span<const float> x,
                                std::int32_t d) {
    if (static_cast<std::int32_t>(x.size()) != m.dim)
        throw std::invalid_argument("apply: vector length does not match matrix dim");
    if (d < 0 || d > m.dim)
        throw std::invalid_argument("apply_prefix: d out of range");
    std::vector<float> y(d);
    for (std::int32_t i = 0; i < d; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::int32_t j = 0; j < m.dim; ++j) s += r[j] * static_cast<double>(x[j]);
        y[i] = static_cast<float>(s);
    }
    return y;
}

std::vector<float> apply_transpose(const TransformMatrix& m, std::span<const float> x) {
    if (static_cast<std::int32_t>(x.size()) != m.dim)
        throw std::invalid_argument("apply_transpose: vector length does not match matrix dim");
    std::vector<double> acc(m.dim, 0.0);
    for (std::int32_t i = 0; i < m.dim; ++i) {
        const double* r = m.row(i);
        const double xi = x[i];
        for (std::int32_t j = 0; j < m.dim; ++j) acc[j] += r[j] * xi;
    }
    return std::vector<float>(acc.begin(), acc.end());
}

Dataset apply_dataset(const TransformMatrix& m, const Dataset& ds) {
    if (ds.d != m.dim)
        throw std::invalid_argument("apply_dataset: dataset dimension does not match matrix");
    Dataset out;
    out.n = ds.n;
    out.d = ds.d;
    out.data.resize(ds.data.size());
    parallel_for(0, ds.n, [&](std::int64_t i) {
        const float* x = ds.row(static_cast<std::int32_t>(i));
        float* y = out.row(static_cast<std::int32_t>(i));
        for (std::int32_t r = 0; r < m.dim; ++r) {
            const double* mr = m.row(r);
            double s = 0.0;
            for (std::int32_t j = 0; j < m.dim; ++j) s += mr[j] * static_cast<double>(x[j]);
            y[r] = static_cast<float>(s);
        }
    });
    return out;
}

void save_matrix(const TransformMatrix& m, const std::filesystem::path& path) {
    Dataset ds;
    ds.n = m.dim;
    ds.d = m.dim;
    ds.data.assign(m.entries.begin(), m.entries.end());
    write_fvecs(ds, path);
}

TransformMatrix load_matrix(const std::filesystem::path& path, std::uint64_t seed) {
    const Dataset ds = read_fvecs(path);
    if (ds.n != ds.d)
        throw std::runtime_error("load_matrix: file is not square (" + std::to_string(ds.n) +
                                 " x " + std::to_string(ds.d) + ")");
    TransformMatrix m;
    m.dim = ds.d;
    m.seed = seed;
    m.entries.assign(ds.data.begin(), ds.data.end());
    return m;
}

}  // namespace adsann
