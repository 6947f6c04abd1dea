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

#include "adsann/vecio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "adsann/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "vector file I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace adsann {

namespace {

std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<char> buf(size);
    if (size > 0 && !in.read(buf.data(), static_cast<std::streamsize>(size)))
        throw std::runtime_error("short read on " + path.string());
    return buf;
}

void dump(const std::filesystem::path& path, const char* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    if (!out.write(data, static_cast<std::streamsize>(size)))
        throw std::runtime_error("short write on " + path.string());
}

// Parses the shared [int32 dim][payload] framing; element size is 4 for
// both fvecs and ivecs.
template <typename T>
void read_vecs(const std::filesystem::path& path, std::int32_t& n_out,
               std::int32_t& d_out, std::vector<T>& payload) {
    const std::vector<char> buf = slurp(path);
    if (buf.empty())
        throw std::runtime_error(path.string() + ": empty file (need at least one record)");
    if (buf.size() < 4)
        throw std::runtime_error(path.string() + ": truncated record header");

    std::int32_t d = 0;
    std::memcpy(&d, buf.data(), 4);
    if (d <= 0)
        throw std::runtime_error(path.string() + ": non-positive dimension " + std::to_string(d));

    const std::size_t rec_bytes = 4 + 4 * static_cast<std::size_t>(d);
    if (buf.size() % rec_bytes != 0)
        throw std::runtime_error(path.string() + ": truncated record (file size " +
                                 std::to_string(buf.size()) + " not a multiple of " +
                                 std::to_string(rec_bytes) + ")");
    const std::size_t n = buf.size() / rec_bytes;

    payload.resize(n * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const char* rec = buf.data() + i * rec_bytes;
        std::int32_t di = 0;
        std::memcpy(&di, rec, 4);
        if (di != d)
            throw std::runtime_error(path.string() + ": inconsistent dimension at record " +
                                     std::to_string(i) + " (" + std::to_string(di) +
                                     " vs " + std::to_string(d) + ")");
        std::memcpy(payload.data() + i * d, rec + 4, 4 * static_cast<std::size_t>(d));
    }
    n_out = static_cast<std::int32_t>(n);
    d_out = d;
}

template <typename T>
void write_vecs(const std::filesystem::path& path, std::int32_t n, std::int32_t d,
                const std::vector<T>& payload) {
    if (n < 1) throw std::invalid_argument("refusing to write an empty vector file");
    if (d < 1) throw std::invalid_argument("vector dimension must be >= 1");
    if (payload.size() != static_cast<std::size_t>(n) * d)
        throw std::invalid_argument("payload size does not match n*d");

    const std::size_t rec_bytes = 4 + 4 * static_cast<std::size_t>(d);
    std::vector<char> buf(rec_bytes * n);
    for (std::int32_t i = 0; i < n; ++i) {
        char* rec = buf.data() + static_cast<std::size_t>(i) * rec_bytes;
        std::memcpy(rec, &d, 4);
        std::memcpy(rec + 4, payload.data() + static_cast<std::size_t>(i) * d,
                    4 * static_cast<std::size_t>(d));
    }
    dump(path, buf.data(), buf.size());
}

}  // namespace

Dataset read_fvecs(const std::filesystem::path& path) {
    Dataset ds;
    read_vecs(path, ds.n, ds.d, ds.data);
    for (std::size_t i = 0; i < ds.data.size(); ++i)
        if (!std::isfinite(ds.data[i]))
            throw std::runtime_error(path.string() + ": non-finite value at element " +
                                     std::to_string(i));
    return ds;
}

void write_fvecs(const Dataset& ds, const std::filesystem::path& path) {
    write_vecs(path, ds.n, ds.d, ds.data);
}

GroundTruth read_ivecs(const std::filesystem::path& path) {
    GroundTruth gt;
    read_vecs(path, gt.n_queries, gt.k_max, gt.ids);
    return gt;
}

void write_ivecs(const GroundTruth& gt, const std::filesystem::path& path) {
    write_vecs(path, gt.n_queries, gt.k_max, gt.ids);
}

std::vector<std::vector<std::int32_t>> read_ivecs_ragged(const std::filesystem::path& path) {
    const std::vector<char> buf = slurp(path);
    std::vector<std::vector<std::int32_t>> rows;
    std::size_t off = 0;
    while (off < buf.size()) {
        if (buf.size() - off < 4)
            throw std::runtime_error(path.string() + ": truncated record header");
        std::int32_t len = 0;
        std::memcpy(&len, buf.data() + off, 4);
        off += 4;
        if (len < 0) throw std::runtime_error(path.string() + ": negative record length");
        if (buf.size() - off < 4 * static_cast<std::size_t>(len))
            throw std::runtime_error(path.string() + ": truncated record payload");
        std::vector<std::int32_t> row(len);
        std::memcpy(row.data(), buf.data() + off, 4 * static_cast<std::size_t>(len));
        off += 4 * static_cast<std::size_t>(len);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_ivecs_ragged(const std::vector<std::vector<std::int32_t>>& rows,
                        const std::filesystem::path& path) {
    std::size_t bytes = 0;
    for (const auto& row : rows) bytes += 4 + 4 * row.size();
    std::vector<char> buf(bytes);
    std::size_t off = 0;
    for (const auto& row : rows) {
        const std::int32_t len = static_cast<std::int32_t>(row.size());
        std::memcpy(buf.data() + off, &len, 4);
        off += 4;
        std::memcpy(buf.data() + off, row.data(), 4 * row.size());
        off += 4 * row.size();
    }
    dump(path, buf.data(), buf.size());
}

Dataset synth_dataset(std::int32_t n, std::int32_t d, std::int32_t n_blobs,
                      double spread, std::uint64_t seed) {
    return synth_dataset(n, d, n_blobs, spread, seed, nullptr);
}

Dataset synth_dataset(std::int32_t n, std::int32_t d, std::int32_t n_blobs,
                      double spread, std::uint64_t seed, Dataset* centers_out) {
    if (n < 1 || d < 1 || n_blobs < 1)
        throw std::invalid_argument("synth_dataset: n, d, n_blobs must all be >= 1");
    if (!(spread >= 0.0) || !std::isfinite(spread))
        throw std::invalid_argument("synth_dataset: spread must be finite and >= 0");

    Rng rng = Rng::for_stream(seed, rng_stream::kSynth);
    const double min_sep = 10.0 * spread;

    // Draw centers, growing the scale until the separation invariant holds.
    std::vector<double> centers(static_cast<std::size_t>(n_blobs) * d);
    double scale = 10.0 * spread + 1.0;
    for (;;) {
        for (auto& c : centers) c = scale * rng.normal();
        bool ok = true;
        for (std::int32_t a = 0; a < n_blobs && ok; ++a) {
            for (std::int32_t b = a + 1; b < n_blobs; ++b) {
                double s = 0.0;
                for (std::int32_t j = 0; j < d; ++j) {
                    const double diff = centers[static_cast<std::size_t>(a) * d + j] -
                                        centers[static_cast<std::size_t>(b) * d + j];
                    s += diff * diff;
                }
                if (s < min_sep * min_sep) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) break;
        scale *= 1.5;
    }

    // Noise is isotropic with expected vector norm `spread`.
    const double sigma = spread / std::sqrt(static_cast<double>(d));
    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.data.resize(static_cast<std::size_t>(n) * d);
    for (std::int32_t i = 0; i < n; ++i) {
        const std::int32_t blob = i % n_blobs;
        const double* c = centers.data() + static_cast<std::size_t>(blob) * d;
        float* out = ds.row(i);
        for (std::int32_t j = 0; j < d; ++j)
            out[j] = static_cast<float>(c[j] + sigma * rng.normal());
    }

    if (centers_out) {
        centers_out->n = n_blobs;
        centers_out->d = d;
        centers_out->data.assign(centers.begin(), centers.end());
    }
    return ds;
}

DatasetDesc read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    DatasetDesc desc;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ": malformed line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "name") desc.name = val;
        else if (key == "base_path") desc.base_path = val;
        else if (key == "query_path") desc.query_path = val;
        else if (key == "gt_path") desc.gt_path = val;
        else if (key == "d") desc.d = std::stoi(val);
        else throw std::runtime_error(path.string() + ": unknown key: " + key);
    }
    return desc;
}

void write_descriptor(const DatasetDesc& desc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "name=" << desc.name << "\n"
        << "base_path=" << desc.base_path << "\n"
        << "query_path=" << desc.query_path << "\n"
        << "gt_path=" << desc.gt_path << "\n"
        << "d=" << desc.d << "\n";
}

}  // namespace adsann
