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

#include "adsann/hnsw.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "adsann/rng.hpp"

namespace adsann {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using DistId = std::pair<double, std::int32_t>;
using MaxHeap = std::priority_queue<DistId>;
using MinHeap = std::priority_queue<DistId, std::vector<DistId>, std::greater<DistId>>;

// Construction-time scratch: epoch-tagged visited marks.
struct VisitTags {
    std::vector<std::uint32_t> tag;
    std::uint32_t epoch = 0;

    explicit VisitTags(std::int32_t n) : tag(n, 0) {}
    void next() { ++epoch; }
    bool seen(std::int32_t id) const { return tag[id] == epoch; }
    void mark(std::int32_t id) { tag[id] = epoch; }
};

struct Builder {
    HnswGraph& g;
    VisitTags visits;

    explicit Builder(HnswGraph& graph) : g(graph), visits(graph.n) {}

    double dist(std::int32_t a, std::int32_t b) const {
        return l2_dist(g.data_t.row(a), g.data_t.row(b), g.d);
    }
    double dist_to(const float* q, std::int32_t b) const {
        return l2_dist(q, g.data_t.row(b), g.d);
    }

    // Beam search over one layer; returns (dist, id) ascending.
    std::vector<DistId> search_layer(const float* q, std::int32_t entry, std::int32_t ef,
                                     std::int32_t layer) {
        visits.next();
        MaxHeap top;
        MinHeap cands;
        const double d0 = dist_to(q, entry);
        top.emplace(d0, entry);
        cands.emplace(d0, entry);
        visits.mark(entry);
        double lower_bound = d0;

        while (!cands.empty()) {
            const auto [cd, cid] = cands.top();
            if (cd > lower_bound && top.size() == static_cast<std::size_t>(ef)) break;
            cands.pop();
            for (const std::int32_t nb : g.links[cid][layer]) {
                if (visits.seen(nb)) continue;
                visits.mark(nb);
                const double dn = dist_to(q, nb);
                if (top.size() < static_cast<std::size_t>(ef) || dn < top.top().first) {
                    cands.emplace(dn, nb);
                    top.emplace(dn, nb);
                    if (top.size() > static_cast<std::size_t>(ef)) top.pop();
                    lower_bound = top.top().first;
                }
            }
        }
        std::vector<DistId> out;
        out.reserve(top.size());
        while (!top.empty()) {
            out.push_back(top.top());
            top.pop();
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    // Keeps a candidate only if it is closer to the anchor than to every
    // neighbor kept so far.
    std::vector<std::int32_t> select_neighbors(const std::vector<DistId>& sorted_cands,
                                               std::int32_t max_count) {
        std::vector<std::int32_t> kept;
        for (const auto& [dc, c] : sorted_cands) {
            if (static_cast<std::int32_t>(kept.size()) >= max_count) break;
            bool good = true;
            for (const std::int32_t s : kept) {
                if (dist(c, s) < dc) {
                    good = false;
                    break;
                }
            }
            if (good) kept.push_back(c);
        }
        return kept;
    }

    void prune_overflow(std::int32_t node, std::int32_t layer, std::int32_t cap) {
        auto& nbs = g.links[node][layer];
        if (static_cast<std::int32_t>(nbs.size()) <= cap) return;
        std::vector<DistId> cands;
        cands.reserve(nbs.size());
        for (const std::int32_t x : nbs) cands.emplace_back(dist(node, x), x);
        std::sort(cands.begin(), cands.end());
        nbs = select_neighbors(cands, cap);
    }

    void insert(std::int32_t i) {
        const std::int32_t level = g.levels[i];
        g.links[i].assign(level + 1, {});

        if (g.entry_point < 0) {
            g.entry_point = i;
            g.max_layer = level;
            return;
        }

        const float* q = g.data_t.row(i);
        std::int32_t cur = g.entry_point;
        double curdist = dist_to(q, cur);
        for (std::int32_t lc = g.max_layer; lc > level; --lc) {
            bool changed = true;
            while (changed) {
                changed = false;
                for (const std::int32_t nb : g.links[cur][lc]) {
                    const double dn = dist_to(q, nb);
                    if (dn < curdist) {
                        curdist = dn;
                        cur = nb;
                        changed = true;
                    }
                }
            }
        }

        for (std::int32_t lc = std::min(level, g.max_layer); lc >= 0; --lc) {
            const std::vector<DistId> cands = search_layer(q, cur, g.ef_construction, lc);
            const std::vector<std::int32_t> sel = select_neighbors(cands, g.M);
            g.links[i][lc] = sel;
            const std::int32_t cap = lc == 0 ? 2 * g.M : g.M;
            for (const std::int32_t nb : sel) {
                g.links[nb][lc].push_back(i);
                prune_overflow(nb, lc, cap);
            }
            cur = cands.front().second;
        }

        if (level > g.max_layer) {
            g.max_layer = level;
            g.entry_point = i;
        }
    }
};

}  // namespace

HnswGraph build_hnsw(const Dataset& ds_raw, const Dataset& ds_transformed,
                     std::int32_t M, std::int32_t ef_construction, std::uint64_t seed) {
    if (ds_transformed.n < 1) throw std::invalid_argument("build_hnsw: empty dataset");
    if (ds_raw.n != ds_transformed.n || ds_raw.d != ds_transformed.d)
        throw std::invalid_argument("build_hnsw: raw and transformed datasets disagree");
    if (M < 2) throw std::invalid_argument("build_hnsw: M must be >= 2");
    if (ef_construction < M)
        throw std::invalid_argument("build_hnsw: ef_construction must be >= M");

    HnswGraph g;
    g.n = ds_transformed.n;
    g.d = ds_transformed.d;
    g.M = M;
    g.ef_construction = ef_construction;
    g.m_L = 1.0 / std::log(static_cast<double>(M));
    g.seed = seed;
    g.data_t = ds_transformed;
    g.data_raw = ds_raw;

    Rng rng = Rng::for_stream(seed, rng_stream::kHnsw);
    g.levels.resize(g.n);
    for (std::int32_t i = 0; i < g.n; ++i) {
        const double u = rng.uniform_open0();
        const std::int32_t lvl = static_cast<std::int32_t>(-std::log(u) * g.m_L);
        g.levels[i] = std::min(lvl, 48);
    }
    g.links.resize(g.n);

    Builder b(g);
    for (std::int32_t i = 0; i < g.n; ++i) b.insert(i);
    return g;
}

namespace {

// One distance comparison against threshold r, dispatched per mode.
struct DcoRunner {
    const Dataset* data;
    const float* q;
    HnswMode mode;
    std::int32_t delta_d;
    AdContext ctx;
    QueryStats* stats;

    AdResult run(std::int32_t id, double r) const {
        const float* vec = data->row(id);
        AdResult out;
        switch (mode) {
            case HnswMode::kPlain: {
                const double s = l2_sq(vec, q, data->d);
                const double dist = std::sqrt(s);
                out = {dist <= r, s, dist, data->d};
                break;
            }
            case HnswMode::kPd:
                out = pd_scan_kernel(vec, q, data->d, 0, 0.0, r, delta_d, false);
                break;
            default:
                out = ad_scan(vec, q, data->d, 0, 0.0, r, ctx, false);
                break;
        }
        stats->dims_evaluated += out.dims;
        ++stats->dco_count;
        return out;
    }
};

std::vector<DistId> drain_ascending(MaxHeap& heap) {
    std::vector<DistId> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back(heap.top());
        heap.pop();
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

KnnResult hnsw_query(const HnswGraph& g, const float* q_transformed, const float* q_raw,
                     std::int32_t K, std::int32_t N_ef, HnswMode mode,
                     const DcoConfig& cfg, HnswDebug* debug) {
    if (K < 1) throw std::invalid_argument("hnsw_query: K must be >= 1");
    if (N_ef < K) throw std::invalid_argument("hnsw_query: N_ef must be >= K");
    const bool transformed_mode = mode == HnswMode::kPlus || mode == HnswMode::kPlusPlus;
    const float* q = transformed_mode ? q_transformed : q_raw;
    if (q == nullptr) throw std::invalid_argument("hnsw_query: missing query vector");

    const auto t0 = std::chrono::steady_clock::now();
    KnnResult res;

    DcoRunner dco{transformed_mode ? &g.data_t : &g.data_raw, q, mode, cfg.delta_d,
                  AdContext{}, &res.stats};
    if (transformed_mode) dco.ctx = AdContext(cfg, g.d);

    // Greedy width-1 descent through the upper layers; the threshold for
    // each comparison is the best distance seen so far.
    std::int32_t cur = g.entry_point;
    double curdist = dco.run(cur, kInf).observed;
    for (std::int32_t lc = g.max_layer; lc >= 1; --lc) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const std::int32_t nb : g.links[cur][lc]) {
                const AdResult out = dco.run(nb, curdist);
                if (out.positive && out.observed < curdist) {
                    curdist = out.observed;
                    cur = nb;
                    changed = true;
                    ++res.stats.hops;
                }
            }
        }
    }

    // Layer-0 beam search.
    const bool dual = mode == HnswMode::kPlusPlus;
    BeamState beam;
    beam.visited.assign(g.n, 0);

    beam.visited[cur] = 1;
    beam.frontier.emplace(curdist, cur);
    beam.routing.emplace(curdist, cur);
    if (dual) beam.exact_topk.emplace(curdist, cur);
    if (debug && beam.routing.size() == static_cast<std::size_t>(N_ef))
        debug->beam_max_trace.push_back(beam.routing.top().first);

    while (!beam.frontier.empty()) {
        const auto [ckey, cid] = beam.frontier.top();
        if (beam.routing.size() == static_cast<std::size_t>(N_ef) &&
            ckey > beam.routing.top().first)
            break;
        beam.frontier.pop();
        ++res.stats.hops;

        for (const std::int32_t nb : g.links[cid][0]) {
            if (beam.visited[nb]) continue;
            beam.visited[nb] = 1;

            // kPlusPlus thresholds on the Kth exact distance; other modes on
            // the N_ef-th key. Either is +inf until the set fills.
            const double r =
                dual ? (beam.exact_topk.size() == static_cast<std::size_t>(K)
                            ? beam.exact_topk.top().first
                            : kInf)
                     : (beam.routing.size() == static_cast<std::size_t>(N_ef)
                            ? beam.routing.top().first
                            : kInf);
            if (debug && dual && beam.exact_topk.size() == static_cast<std::size_t>(K) &&
                beam.routing.size() == static_cast<std::size_t>(N_ef))
                debug->r1_r2_thresholds.emplace_back(r, beam.routing.top().first);

            const AdResult out = dco.run(nb, r);
            if (debug) debug->dco_log.push_back({nb, r, out.positive});
            if (dual) {
                if (out.positive) {
                    beam.exact_topk.emplace(out.observed, nb);
                    if (beam.exact_topk.size() > static_cast<std::size_t>(K))
                        beam.exact_topk.pop();
                }
                // The observed estimate feeds routing whether or not the
                // comparison was positive.
                if (beam.routing.size() < static_cast<std::size_t>(N_ef) ||
                    out.observed < beam.routing.top().first) {
                    beam.frontier.emplace(out.observed, nb);
                    beam.routing.emplace(out.observed, nb);
                    if (beam.routing.size() > static_cast<std::size_t>(N_ef))
                        beam.routing.pop();
                    if (debug && beam.routing.size() == static_cast<std::size_t>(N_ef))
                        debug->beam_max_trace.push_back(beam.routing.top().first);
                }
            } else if (out.positive) {
                beam.frontier.emplace(out.observed, nb);
                beam.routing.emplace(out.observed, nb);
                if (beam.routing.size() > static_cast<std::size_t>(N_ef)) beam.routing.pop();
                if (debug && beam.routing.size() == static_cast<std::size_t>(N_ef))
                    debug->beam_max_trace.push_back(beam.routing.top().first);
            }
        }
    }

    std::vector<DistId> out =
        dual ? drain_ascending(beam.exact_topk) : drain_ascending(beam.routing);
    if (static_cast<std::int32_t>(out.size()) > K) out.resize(K);
    res.ids.reserve(out.size());
    res.dists.reserve(out.size());
    for (const auto& [dist, id] : out) {
        res.ids.push_back(id);
        res.dists.push_back(dist);
    }
    res.stats.candidates = res.stats.dco_count;

    if (debug) {
        debug->visited.clear();
        for (std::int32_t i = 0; i < g.n; ++i)
            if (beam.visited[i]) debug->visited.push_back(i);
    }
    res.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

void save_hnsw(const HnswGraph& g, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "meta.txt", std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + (dir / "meta.txt").string());
        out << "n=" << g.n << "\n"
            << "d=" << g.d << "\n"
            << "M=" << g.M << "\n"
            << "ef_construction=" << g.ef_construction << "\n"
            << "seed=" << g.seed << "\n"
            << "entry_point=" << g.entry_point << "\n"
            << "max_layer=" << g.max_layer << "\n";
    }
    GroundTruth levels;
    levels.n_queries = g.n;
    levels.k_max = 1;
    levels.ids = g.levels;
    write_ivecs(levels, dir / "levels.ivecs");

    // One record per (vertex, layer): [vertex, layer, neighbors...].
    std::vector<std::vector<std::int32_t>> rows;
    for (std::int32_t i = 0; i < g.n; ++i) {
        for (std::int32_t lc = 0; lc <= g.levels[i]; ++lc) {
            std::vector<std::int32_t> row;
            row.reserve(2 + g.links[i][lc].size());
            row.push_back(i);
            row.push_back(lc);
            row.insert(row.end(), g.links[i][lc].begin(), g.links[i][lc].end());
            rows.push_back(std::move(row));
        }
    }
    write_ivecs_ragged(rows, dir / "links.ivecs");
}

HnswGraph load_hnsw(const std::filesystem::path& dir, const Dataset& ds_raw,
                    const Dataset& ds_transformed) {
    std::ifstream in(dir / "meta.txt");
    if (!in) throw std::runtime_error("cannot open " + (dir / "meta.txt").string());
    HnswGraph g;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "n") g.n = std::stoi(val);
        else if (key == "d") g.d = std::stoi(val);
        else if (key == "M") g.M = std::stoi(val);
        else if (key == "ef_construction") g.ef_construction = std::stoi(val);
        else if (key == "seed") g.seed = std::stoull(val);
        else if (key == "entry_point") g.entry_point = std::stoi(val);
        else if (key == "max_layer") g.max_layer = std::stoi(val);
    }
    g.m_L = 1.0 / std::log(static_cast<double>(g.M));
    if (ds_raw.n != g.n || ds_raw.d != g.d || ds_transformed.n != g.n ||
        ds_transformed.d != g.d)
        throw std::runtime_error("load_hnsw: datasets do not match the stored graph");
    g.data_raw = ds_raw;
    g.data_t = ds_transformed;

    const GroundTruth levels = read_ivecs(dir / "levels.ivecs");
    if (levels.n_queries != g.n || levels.k_max != 1)
        throw std::runtime_error("load_hnsw: bad levels file");
    g.levels = levels.ids;

    g.links.resize(g.n);
    for (std::int32_t i = 0; i < g.n; ++i) g.links[i].assign(g.levels[i] + 1, {});
    for (auto& row : read_ivecs_ragged(dir / "links.ivecs")) {
        if (row.size() < 2) throw std::runtime_error("load_hnsw: malformed links record");
        const std::int32_t id = row[0];
        const std::int32_t lc = row[1];
        if (id < 0 || id >= g.n || lc < 0 || lc > g.levels[id])
            throw std::runtime_error("load_hnsw: links record out of range");
        g.links[id][lc].assign(row.begin() + 2, row.end());
    }
    return g;
}

const char* hnsw_mode_name(HnswMode mode) {
    switch (mode) {
        case HnswMode::kPlain: return "plain";
        case HnswMode::kPd: return "pd";
        case HnswMode::kPlus: return "plus";
        case HnswMode::kPlusPlus: return "plusplus";
    }
    return "?";
}

HnswMode hnsw_mode_from_name(const std::string& name) {
    if (name == "plain") return HnswMode::kPlain;
    if (name == "pd") return HnswMode::kPd;
    if (name == "plus") return HnswMode::kPlus;
    if (name == "plusplus") return HnswMode::kPlusPlus;
    throw std::invalid_argument("unknown HNSW mode: " + name);
}

}  // namespace adsann
