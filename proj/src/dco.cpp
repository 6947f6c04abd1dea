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

#include "adsann/dco.hpp"

#include <stdexcept>

namespace adsann {

namespace {

void validate_query(const DcoQuery& q) {
    if (q.data_vec.size() != q.query_vec.size())
        throw std::invalid_argument("dco: vector lengths differ");
    if (q.data_vec.empty())
        throw std::invalid_argument("dco: empty vectors");
    if (!(q.r >= 0.0) || !std::isfinite(q.r))
        throw std::invalid_argument("dco: threshold must be finite and >= 0");
}

void validate_config(const DcoConfig& cfg, std::int32_t dim) {
    if (!(cfg.epsilon0 > 0.0))
        throw std::invalid_argument("dco: epsilon0 must be > 0");
    if (cfg.delta_d < 1 || cfg.delta_d > dim)
        throw std::invalid_argument("dco: delta_d must be in [1, D]");
}

double norm_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(s);
}

std::vector<float> normalized(std::span<const float> v, double norm) {
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
    return out;
}

}  // namespace

AdContext::AdContext(const DcoConfig& c, std::int32_t d) : cfg(c), dim(d) {
    validate_config(c, d);
    factor.resize(d);
    for (std::int32_t k = 1; k < d; ++k) {
        const double mult = 1.0 + cfg.epsilon0 / std::sqrt(static_cast<double>(k));
        factor[k] = mult * mult * static_cast<double>(k) / static_cast<double>(d);
    }
}

double threshold_multiplier(std::int32_t d, const DcoConfig& cfg) {
    if (d < 1) throw std::invalid_argument("threshold_multiplier: d must be >= 1");
    if (!(cfg.epsilon0 > 0.0))
        throw std::invalid_argument("threshold_multiplier: epsilon0 must be > 0");
    return 1.0 + cfg.epsilon0 / std::sqrt(static_cast<double>(d));
}

DcoOutcome fd_scan(const DcoQuery& q) {
    validate_query(q);
    const std::int32_t dim = static_cast<std::int32_t>(q.data_vec.size());
    const double s = l2_sq(q.data_vec.data(), q.query_vec.data(), dim);
    const double dist = std::sqrt(s);
    DcoOutcome out;
    out.positive = dist <= q.r;
    out.observed = dist;
    out.dims_used = dim;
    if (out.positive) out.distance = dist;
    return out;
}

DcoOutcome pd_scan(const DcoQuery& q, std::int32_t delta_d) {
    validate_query(q);
    const std::int32_t dim = static_cast<std::int32_t>(q.data_vec.size());
    if (delta_d < 1 || delta_d > dim)
        throw std::invalid_argument("pd_scan: delta_d must be in [1, D]");
    const AdResult r = pd_scan_kernel(q.data_vec.data(), q.query_vec.data(), dim, 0, 0.0,
                                      q.r, delta_d, false);
    DcoOutcome out;
    out.positive = r.positive;
    out.observed = r.observed;
    out.dims_used = r.dims;
    if (r.positive) out.distance = r.observed;
    return out;
}

DcoOutcome ad_sampling(const DcoQuery& q, const DcoConfig& cfg) {
    validate_query(q);
    const std::int32_t dim = static_cast<std::int32_t>(q.data_vec.size());
    const AdContext ctx(cfg, dim);
    const AdResult r = ad_scan(q.data_vec.data(), q.query_vec.data(), dim, 0, 0.0, q.r,
                               ctx, false);
    DcoOutcome out;
    out.positive = r.positive;
    out.observed = r.observed;
    out.dims_used = r.dims;
    if (r.positive) out.distance = r.observed;
    return out;
}

ReducedDco reduce_inner_product(std::span<const float> o, std::span<const float> q,
                                double r) {
    if (o.size() != q.size())
        throw std::invalid_argument("reduce_inner_product: vector lengths differ");
    const double no = norm_of(o);
    const double nq = norm_of(q);
    if (no == 0.0 || nq == 0.0)
        throw std::invalid_argument("reduce_inner_product: zero-norm input");

    ReducedDco out;
    out.data_vec = normalized(o, no);
    out.query_vec = normalized(q, nq);
    const double t_sq = 2.0 - 2.0 * r / (no * nq);
    if (t_sq < 0.0) {
        // <o,q> <= |o||q| < r always; the comparison can never be positive.
        out.feasible = false;
        out.r = 0.0;
        return out;
    }
    out.r = std::sqrt(t_sq);
    return out;
}

ReducedDco reduce_cosine(std::span<const float> o, std::span<const float> q) {
    if (o.size() != q.size())
        throw std::invalid_argument("reduce_cosine: vector lengths differ");
    const double no = norm_of(o);
    const double nq = norm_of(q);
    if (no == 0.0 || nq == 0.0)
        throw std::invalid_argument("reduce_cosine: zero-norm input");
    ReducedDco out;
    out.data_vec = normalized(o, no);
    out.query_vec = normalized(q, nq);
    out.r = 0.0;
    return out;
}

}  // namespace adsann
