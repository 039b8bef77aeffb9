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

#ifndef PILOTNET_CHANNEL_HPP
#define PILOTNET_CHANNEL_HPP

#include "pilotnet/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pilotnet
{

// Geometry and path statistics of a wideband UPA channel scenario.
// Angles are in radians; angle_spread_rad is the half-width of the per-path offset law.
struct ScenarioConfig
{
    std::string name = "cluster";
    Index n_h = 8;
    Index n_v = 8;
    Index k_sub = 64;
    Index n_clusters = 6;
    Index n_paths_per_cluster = 10;
    double angle_spread_rad = 3.75 * std::numbers::pi / 180.0;
    double center_angle_bound_rad = std::numbers::pi / 3.0;
    double d_over_lambda = 0.5;
    double f_s = 100e6;
    double tau_max = 64.0 / (4.0 * 100e6);

    Index n_bs() const { return n_h * n_v; }

    // Throws ConfigError when any field is outside its valid range
    void validate() const;

    // mmWave cluster-sparse scenario: 6 clusters of 10 paths, +-3.75 deg spread
    static ScenarioConfig cluster(Index n_h, Index n_v, Index k_sub);

    // Low-frequency one-ring scenario: one cluster of 100 paths, +-7.5 deg spread
    static ScenarioConfig one_ring(Index n_h, Index n_v, Index k_sub, double spread_deg = 7.5);

    // "cluster" or "onering"
    static ScenarioConfig by_name(const std::string &name, Index n_h, Index n_v, Index k_sub);

    // Default delay bound K / (4 f_s)
    void reset_tau_max() { tau_max = double(k_sub) / (4.0 * f_s); }

    bool operator==(const ScenarioConfig &) const = default;
};

struct PathParams
{
    Complex<double> gain;
    double delay = 0.0;     // seconds
    double azimuth = 0.0;   // radians
    double elevation = 0.0; // radians
    Index cluster = 0;
};

// Frequency-spatial channel, one row per subcarrier (K x N_BS)
struct ChannelRealization
{
    ComplexMatrix<double> h_s;
    ScenarioConfig scenario;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

enum class Split : std::uint8_t
{
    train = 0,
    val = 1,
    test = 2,
};

std::string to_string(Split s);
Split split_from_string(const std::string &s);

// Samples (S*K, 2, N_BS): row 0 is Re(h_k), row 1 is Im(h_k); realization-major, subcarrier-minor
struct StackedDataset
{
    RealTensor3<float> samples;
    ScenarioConfig scenario;
    Split split = Split::train;
    std::uint64_t seed = 0;

    std::size_t n_samples() const { return samples.dims[0]; }
    Index n_bs() const { return Index(samples.dims[2]); }

    // Realizations are contiguous K-row groups
    std::size_t n_realizations() const;

    // Complex K x N_BS view of realization r, rebuilt from the stored single-precision samples
    ComplexMatrix<double> realization(std::size_t r) const;
};

std::vector<PathParams> sample_paths(const ScenarioConfig &cfg, RngStream &rng);

// UPA response; flat index p = m * n_v + n, entry exp(-j 2 pi d/lambda (m sin(az) cos(el) + n sin(el))) / sqrt(N_BS)
ComplexVector<double> steering_vector(double azimuth, double elevation, Index n_h, Index n_v, double d_over_lambda);

// Channel from an explicit path list:
//   h_k = sqrt(N_BS / (N_c N_p)) sum_l alpha_l exp(-j 2 pi tau_l f_s k / K) a(az_l, el_l)
ComplexMatrix<double> channel_from_paths(const ScenarioConfig &cfg, const std::vector<PathParams> &paths);

ChannelRealization gen_realization(const ScenarioConfig &cfg, RngStream &rng);

// Angular transform matrix F = F_{n_h}^T (x) F_{n_v}
ComplexMatrix<double> angular_basis(Index n_h, Index n_v);

// H_a = H_s F
ComplexMatrix<double> angular_transform(const ComplexMatrix<double> &h_s, Index n_h, Index n_v);

// H_s = H_a F^H
ComplexMatrix<double> inverse_angular_transform(const ComplexMatrix<double> &h_a, Index n_h, Index n_v);

// Substream id used for realization `index` of `split`
std::uint64_t realization_stream_id(Split split, std::uint64_t index);

StackedDataset build_dataset(const ScenarioConfig &cfg, std::size_t n_realizations, std::uint64_t seed, Split split);

} // namespace pilotnet

#endif
