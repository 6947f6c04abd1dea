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
#include <span>
#include <vector>

#include "adsann/vecio.hpp"

namespace adsann {

/// Dense random orthogonal matrix, row-major dim x dim in 64-bit floats.
/// Rows are orthonormal to within 1e-10 (max entrywise deviation of
/// P P^T from the identity, checked at construction). Applying the first
/// d rows to a vector is the same computation as taking the first d
/// entries of the full product, so prefix sampling of a transformed
/// vector is a d-dimensional random projection of the original.
struct TransformMatrix {
    std::int32_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<double> entries;

    const double* row(std::int32_t i) const {
        return entries.data() + static_cast<std::size_t>(i) * dim;
    }
};

/// Orthonormalizes an i.i.d. standard-normal matrix with modified
/// Gram-Schmidt plus one re-orthogonalization pass. Deterministic in
/// (dim, seed). Throws std::invalid_argument for dim == 0.
TransformMatrix generate_orthogonal(std::int32_t dim, std::uint64_t seed);

/// y = P x, accumulated in 64-bit and stored as 32-bit floats.
std::vector<float> apply(const TransformMatrix& m, std::span<const float> x);

/// First d entries of apply(m, x), evaluated in the same arithmetic order.
std::vector<float> apply_prefix(const TransformMatrix& m, std::span<const float> x,
                                std::int32_t d);

/// y = P^T x (the inverse map, since P is orthogonal).
std::vector<float> apply_transpose(const TransformMatrix& m, std::span<const float> x);

/// Transforms every row. Pairwise distances are preserved to ~1e-5 relative.
Dataset apply_dataset(const TransformMatrix& m, const Dataset& ds);

/// Matrix persistence as an fvecs file of dim rows (entries are rounded
/// to 32-bit on disk; a reloaded matrix is orthonormal only to ~1e-6).
void save_matrix(const TransformMatrix& m, const std::filesystem::path& path);
TransformMatrix load_matrix(const std::filesystem::path& path, std::uint64_t seed = 0);

}  // namespace adsann
