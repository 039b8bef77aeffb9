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

#include "pilotnet/channel.hpp"

namespace pilotnet
{

void ScenarioConfig::validate() const
{
    if (n_h < 1 || n_v < 1 || k_sub < 1 || n_clusters < 1 || n_paths_per_cluster < 1)
        throw ConfigError("ScenarioConfig: counts must be >= 1");
    if (!(angle_spread_rad >= 0.0) || !(tau_max >= 0.0) || !(d_over_lambda > 0.0) || !(f_s > 0.0) ||
        !(center_angle_bound_rad >= 0.0))
        throw ConfigError("ScenarioConfig: angle spread, tau_max, f_s, d/lambda out of range");
}

ScenarioConfig ScenarioConfig::cluster(Index n_h, Index n_v, Index k_sub)
{
    ScenarioConfig c;
    c.name = "cluster";
    c.n_h = n_h;
    c.n_v = n_v;
    c.k_sub = k_sub;
    c.n_clusters = 6;
    c.n_paths_per_cluster = 10;
    c.angle_spread_rad = 3.75 * std::numbers::pi / 180.0;
    c.reset_tau_max();
    return c;
}

ScenarioConfig ScenarioConfig::one_ring(Index n_h, Index n_v, Index k_sub, double spread_deg)
{
    ScenarioConfig c;
    c.name = "onering";
    c.n_h = n_h;
    c.n_v = n_v;
    c.k_sub = k_sub;
    c.n_clusters = 1;
    c.n_paths_per_cluster = 100;
    c.angle_spread_rad = spread_deg * std::numbers::pi / 180.0;
    c.reset_tau_max();
    return c;
}

ScenarioConfig ScenarioConfig::by_name(const std::string &name, Index n_h, Index n_v, Index k_sub)
{
    if (name == "cluster")
        return cluster(n_h, n_v, k_sub);
    if (name == "onering" || name == "one-ring" || name == "one_ring")
        return one_ring(n_h, n_v, k_sub);
    throw ConfigError("unknown scenario '" + name + "' (expected cluster or onering)");
}

std::string to_string(Split s)
{
    switch (s)
    {
    case Split::train:
        return "train";
    case Split::val:
        return "val";
    case Split::test:
        return "test";
    }
    return "unknown";
}

Split split_from_string(const std::string &s)
{
    if (s == "train")
        return Split::train;
    if (s == "val")
        return Split::val;
    if (s == "test")
        return Split::test;
    throw ConfigError("unknown split '" + s + "'");
}

std::size_t StackedDataset::n_realizations() const
{
    const auto k = std::size_t(scenario.k_sub);
    return k == 0 ? 0 : samples.dims[0] / k;
}

ComplexMatrix<double> StackedDataset::realization(std::size_t r) const
{
    const Index k = scenario.k_sub;
    const Index n = n_bs();
    if (r >= n_realizations())
        throw ShapeError("StackedDataset::realization: index out of range");
    ComplexMatrix<double> h(k, n);
    for (Index row = 0; row < k; ++row)
    {
        const float *s = samples.slice(r * std::size_t(k) + std::size_t(row));
        for (Index p = 0; p < n; ++p)
            h(row, p) = {double(s[p]), double(s[n + p])};
    }
    return h;
}

std::vector<PathParams> sample_paths(const ScenarioConfig &cfg, RngStream &rng)
{
    cfg.validate();
    std::vector<PathParams> paths;
    paths.reserve(std::size_t(cfg.n_clusters * cfg.n_paths_per_cluster));
    const double bound = cfg.center_angle_bound_rad;
    const double spread = cfg.angle_spread_rad;
    for (Index i = 0; i < cfg.n_clusters; ++i)
    {
        const double az_center = rng.uniform(-bound, bound);
        const double el_center = rng.uniform(-bound, bound);
        for (Index l = 0; l < cfg.n_paths_per_cluster; ++l)
        {
            PathParams p;
            p.cluster = i;
            p.azimuth = az_center + rng.uniform(-spread, spread);
            p.elevation = el_center + rng.uniform(-spread, spread);
            p.gain = rng.complex_gaussian();
            p.delay = rng.uniform(0.0, cfg.tau_max);
            paths.push_back(p);
        }
    }
    return paths;
}

ComplexVector<double> steering_vector(double azimuth, double elevation, Index n_h, Index n_v, double d_over_lambda)
{
    if (n_h < 1 || n_v < 1)
        throw ShapeError("steering_vector: array dimensions must be >= 1");
    const double u = std::sin(azimuth) * std::cos(elevation);
    const double v = std::sin(elevation);
    const double scale = 1.0 / std::sqrt(double(n_h * n_v));
    ComplexVector<double> a(n_h * n_v);
    for (Index m = 0; m < n_h; ++m)
        for (Index n = 0; n < n_v; ++n)
        {
            const double phase = -2.0 * std::numbers::pi * d_over_lambda * (double(m) * u + double(n) * v);
            a(m * n_v + n) = std::polar(scale, phase);
        }
    return a;
}

ComplexMatrix<double> channel_from_paths(const ScenarioConfig &cfg, const std::vector<PathParams> &paths)
{
    const Index n_bs = cfg.n_bs();
    const Index k_sub = cfg.k_sub;
    const Index n_paths = Index(paths.size());
    if (n_paths == 0)
        return ComplexMatrix<double>::Zero(k_sub, n_bs);

    // H_s^T = A D with A the steering matrix (N_BS x L) and D(l,k) = alpha_l exp(-j 2 pi tau_l f_s k / K)
    ComplexMatrix<double> steering(n_bs, n_paths);
    ComplexMatrix<double> weights(n_paths, k_sub);
    for (Index l = 0; l < n_paths; ++l)
    {
        const auto &p = paths[std::size_t(l)];
        steering.col(l) = steering_vector(p.azimuth, p.elevation, cfg.n_h, cfg.n_v, cfg.d_over_lambda);
        for (Index k = 0; k < k_sub; ++k)
        {
            const double phase = -2.0 * std::numbers::pi * p.delay * cfg.f_s * double(k) / double(k_sub);
            weights(l, k) = p.gain * std::polar(1.0, phase);
        }
    }
    const double norm = std::sqrt(double(n_bs) / double(cfg.n_clusters * cfg.n_paths_per_cluster));
    return (norm * (steering * weights)).transpose();
}

ChannelRealization gen_realization(const ScenarioConfig &cfg, RngStream &rng)
{
    ChannelRealization r;
    r.seed = rng.seed();
    r.stream_id = rng.stream_id();
    r.scenario = cfg;
    r.h_s = channel_from_paths(cfg, sample_paths(cfg, rng));
    return r;
}

ComplexMatrix<double> angular_basis(Index n_h, Index n_v)
{
    return kron(dft_matrix<double>(n_h).transpose(), dft_matrix<double>(n_v));
}

ComplexMatrix<double> angular_transform(const ComplexMatrix<double> &h_s, Index n_h, Index n_v)
{
    if (n_h < 1 || n_v < 1 || h_s.cols() != n_h * n_v)
        throw ShapeError("angular_transform: H_s must have n_h * n_v columns");
    return h_s * angular_basis(n_h, n_v);
}

ComplexMatrix<double> inverse_angular_transform(const ComplexMatrix<double> &h_a, Index n_h, Index n_v)
{
    if (n_h < 1 || n_v < 1 || h_a.cols() != n_h * n_v)
        throw ShapeError("inverse_angular_transform: H_a must have n_h * n_v columns");
    return h_a * angular_basis(n_h, n_v).adjoint();
}

std::uint64_t realization_stream_id(Split split, std::uint64_t index)
{
    return (std::uint64_t(split) + 1) << 40 | index;
}

StackedDataset build_dataset(const ScenarioConfig &cfg, std::size_t n_realizations, std::uint64_t seed, Split split)
{
    cfg.validate();
    if (n_realizations < 1)
        throw ConfigError("build_dataset: n_realizations must be >= 1");
    const auto k_sub = std::size_t(cfg.k_sub);
    const auto n_bs = std::size_t(cfg.n_bs());

    StackedDataset ds;
    ds.scenario = cfg;
    ds.split = split;
    ds.seed = seed;
    ds.samples = RealTensor3<float>(n_realizations * k_sub, 2, n_bs);
    for (std::size_t r = 0; r < n_realizations; ++r)
    {
        RngStream rng(seed, realization_stream_id(split, r));
        const ChannelRealization real = gen_realization(cfg, rng);
        for (std::size_t k = 0; k < k_sub; ++k)
        {
            float *s = ds.samples.slice(r * k_sub + k);
            for (std::size_t p = 0; p < n_bs; ++p)
            {
                const auto h = real.h_s(Index(k), Index(p));
                s[p] = float(h.real());
                s[n_bs + p] = float(h.imag());
            }
        }
    }
    return ds;
}

} // namespace pilotnet
