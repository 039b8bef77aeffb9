// SPDX-License-Identifier: Apache-2.0
//
// pilotnet - learned pilots and channel estimation for wideband massive MIMO
// Copyright (C) 2026 The pilotnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "pilotnet/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace pilotnet
{

namespace
{

class Writer
{
public:
    Bytes bytes;

    template <typename T>
    void put(T value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(raw, raw + sizeof(T));
        bytes.insert(bytes.end(), raw, raw + sizeof(T));
    }

    void put_raw(const char *data, std::size_t n) { bytes.insert(bytes.end(), data, data + n); }

    void put_floats(const float *data, std::size_t n)
    {
        if constexpr (std::endian::native == std::endian::little)
        {
            const auto *p = reinterpret_cast<const std::uint8_t *>(data);
            bytes.insert(bytes.end(), p, p + n * sizeof(float));
        }
        else
            for (std::size_t i = 0; i < n; ++i)
                put(data[i]);
    }
};

class Reader
{
public:
    explicit Reader(const Bytes &b) : bytes_(b) {}

    template <typename T>
    T get()
    {
        need(sizeof(T));
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(raw, raw + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, raw, sizeof(T));
        return v;
    }

    std::string get_string(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    void get_floats(float *out, std::size_t n)
    {
        if (n > (bytes_.size() - pos_) / sizeof(float))
            throw IoError("truncated payload: expected " + std::to_string(n) + " floats");
        if constexpr (std::endian::native == std::endian::little)
        {
            std::memcpy(out, bytes_.data() + pos_, n * sizeof(float));
            pos_ += n * sizeof(float);
        }
        else
            for (std::size_t i = 0; i < n; ++i)
                out[i] = get<float>();
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n)
            throw IoError("truncated file: header or payload ends early");
    }

    const Bytes &bytes_;
    std::size_t pos_ = 0;
};

void check_magic(Reader &r, const char *magic, std::uint32_t expected_version, const char *what)
{
    if (r.remaining() < 8)
        throw IoError(std::string(what) + ": file too short for a header");
    if (r.get_string(4) != magic)
        throw FormatError(std::string(what) + ": bad magic (expected \"" + magic + "\")");
    const auto version = r.get<std::uint32_t>();
    if (version != expected_version)
        throw FormatError(std::string(what) + ": unsupported format version " + std::to_string(version) +
                          " (this build reads version " + std::to_string(expected_version) + ")");
}

template <typename S>
void put_tensor(Writer &w, const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> &t)
{
    w.put(std::uint32_t(t.rows()));
    w.put(std::uint32_t(t.cols()));
    const RowMatrix<float> rm = t.template cast<float>();
    w.put_floats(rm.data(), std::size_t(rm.size()));
}

Matrix<float> get_tensor(Reader &r, Index rows, Index cols, const char *name)
{
    const auto fr = r.get<std::uint32_t>();
    const auto fc = r.get<std::uint32_t>();
    if (Index(fr) != rows || Index(fc) != cols)
        throw FormatError(std::string("checkpoint: tensor ") + name + " has shape " + std::to_string(fr) + "x" +
                          std::to_string(fc) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    RowMatrix<float> rm(rows, cols);
    r.get_floats(rm.data(), std::size_t(rm.size()));
    return rm;
}

} // namespace

Bytes encode_dataset(const StackedDataset &ds)
{
    const auto &sc = ds.scenario;
    Writer w;
    w.put_raw("PLDS", 4);
    w.put(dataset_format_version);
    w.put(std::uint32_t(sc.name.size()));
    w.put_raw(sc.name.data(), sc.name.size());
    for (Index v : {sc.n_h, sc.n_v, sc.k_sub, sc.n_clusters, sc.n_paths_per_cluster})
        w.put(std::uint64_t(v));
    for (double v : {sc.angle_spread_rad, sc.center_angle_bound_rad, sc.d_over_lambda, sc.f_s, sc.tau_max})
        w.put(v);
    w.put(std::uint32_t(ds.split));
    w.put(std::uint64_t(ds.seed));
    for (auto d : ds.samples.dims)
        w.put(std::uint64_t(d));
    w.put(std::uint32_t(1));
    w.put_floats(ds.samples.data.data(), ds.samples.size());
    return std::move(w.bytes);
}

StackedDataset decode_dataset(const Bytes &bytes)
{
    Reader r(bytes);
    check_magic(r, "PLDS", dataset_format_version, "dataset");
    StackedDataset ds;
    auto &sc = ds.scenario;
    const auto name_len = r.get<std::uint32_t>();
    if (name_len > 256)
        throw FormatError("dataset: scenario name length " + std::to_string(name_len) + " is implausible");
    sc.name = r.get_string(name_len);
    Index *counts[] = {&sc.n_h, &sc.n_v, &sc.k_sub, &sc.n_clusters, &sc.n_paths_per_cluster};
    for (Index *c : counts)
    {
        const auto v = r.get<std::uint64_t>();
        if (v == 0 || v > (std::uint64_t(1) << 31))
            throw FormatError("dataset: scenario count field out of range");
        *c = Index(v);
    }
    double *reals[] = {&sc.angle_spread_rad, &sc.center_angle_bound_rad, &sc.d_over_lambda, &sc.f_s, &sc.tau_max};
    for (double *d : reals)
        *d = r.get<double>();
    try
    {
        sc.validate();
    }
    catch (const ConfigError &e)
    {
        throw FormatError(std::string("dataset: invalid scenario block: ") + e.what());
    }
    const auto split = r.get<std::uint32_t>();
    if (split > 2)
        throw FormatError("dataset: unknown split tag " + std::to_string(split));
    ds.split = Split(split);
    ds.seed = r.get<std::uint64_t>();
    std::array<std::uint64_t, 3> dims{};
    for (auto &d : dims)
        d = r.get<std::uint64_t>();
    if (dims[1] != 2 || dims[2] != std::uint64_t(sc.n_bs()) || dims[0] == 0 || dims[0] % std::uint64_t(sc.k_sub) != 0)
        throw FormatError("dataset: dims (" + std::to_string(dims[0]) + ", " + std::to_string(dims[1]) + ", " +
                          std::to_string(dims[2]) + ") inconsistent with the scenario");
    const auto dtype = r.get<std::uint32_t>();
    if (dtype != 1)
        throw FormatError("dataset: unsupported element type " + std::to_string(dtype));
    const std::uint64_t count = dims[0] * dims[1] * dims[2];
    if (count > r.remaining() / sizeof(float))
        throw IoError("dataset: truncated payload");
    ds.samples = RealTensor3<float>(dims[0], dims[1], dims[2]);
    r.get_floats(ds.samples.data.data(), ds.samples.size());
    if (r.remaining() != 0)
        throw FormatError("dataset: trailing bytes after payload");
    return ds;
}

Bytes encode_checkpoint(const ModelParams<float> &params)
{
    const auto &h = params.hyper;
    Writer w;
    w.put_raw("PLCK", 4);
    w.put(checkpoint_format_version);
    for (Index v : {h.n_h, h.n_v, h.m, h.n_re})
        w.put(std::uint32_t(v));
    for (double v : {h.leaky_slope, h.bn_epsilon, h.bn_momentum})
        w.put(v);
    w.put(std::uint32_t(3 + 5 * params.units.size()));
    put_tensor(w, params.x_tilde);
    put_tensor(w, params.x_prime);
    for (const auto &u : params.units)
    {
        put_tensor(w, u.kernels);
        put_tensor(w, u.gamma);
        put_tensor(w, u.beta);
        put_tensor(w, Matrix<float>(u.running_mean));
        put_tensor(w, Matrix<float>(u.running_var));
    }
    put_tensor(w, params.output_conv);
    return std::move(w.bytes);
}

ModelParams<float> decode_checkpoint(const Bytes &bytes)
{
    Reader r(bytes);
    check_magic(r, "PLCK", checkpoint_format_version, "checkpoint");
    NetworkHyper h;
    Index *counts[] = {&h.n_h, &h.n_v, &h.m, &h.n_re};
    for (Index *c : counts)
        *c = Index(r.get<std::uint32_t>());
    h.leaky_slope = r.get<double>();
    h.bn_epsilon = r.get<double>();
    h.bn_momentum = r.get<double>();
    try
    {
        h.validate();
    }
    catch (const ConfigError &e)
    {
        throw FormatError(std::string("checkpoint: invalid hyper block: ") + e.what());
    }
    if (h.n_h > 4096 || h.n_v > 4096 || h.m > h.n_bs())
        throw FormatError("checkpoint: hyper block out of range");
    const auto tensors = r.get<std::uint32_t>();
    if (tensors != std::uint32_t(3 + 5 * h.n_re))
        throw FormatError("checkpoint: tensor count does not match n_re");

    ModelParams<float> p = ModelParams<float>::zeros(h);
    p.x_tilde = get_tensor(r, h.n_bs(), h.m, "x_tilde");
    p.x_prime = get_tensor(r, 2 * h.m, 2 * h.n_bs(), "x_prime");
    for (Index u = 0; u < h.n_re; ++u)
    {
        auto &cu = p.units[std::size_t(u)];
        const Index c_in = h.unit_in(u), c_out = h.unit_out(u);
        cu.kernels = get_tensor(r, 9 * c_in, c_out, "kernels");
        cu.gamma = get_tensor(r, c_out, 1, "gamma");
        cu.beta = get_tensor(r, c_out, 1, "beta");
        cu.running_mean = get_tensor(r, c_out, 1, "running_mean");
        cu.running_var = get_tensor(r, c_out, 1, "running_var");
    }
    p.output_conv = get_tensor(r, 9 * h.last_channels(), 2, "output_conv");
    if (r.remaining() != 0)
        throw FormatError("checkpoint: trailing bytes after the last tensor");
    return p;
}

Bytes read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading (check the path, or generate it first)");
    Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("error while reading '" + path + "'");
    return b;
}

void write_file(const std::string &path, const Bytes &bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
    if (!out)
        throw IoError("error while writing '" + path + "'");
}

void save_dataset(const StackedDataset &ds, const std::string &path) { write_file(path, encode_dataset(ds)); }

StackedDataset load_dataset(const std::string &path) { return decode_dataset(read_file(path)); }

void save_checkpoint(const ModelParams<float> &params, const std::string &path)
{
    write_file(path, encode_checkpoint(params));
}

ModelParams<float> load_checkpoint(const std::string &path) { return decode_checkpoint(read_file(path)); }

} // namespace pilotnet
