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

// Binary formats, all little-endian.
//
// Dataset "PLDS" v1
//   char[4]  "PLDS"
//   u32      version (1)
//   u32      scenario name length L, then L bytes of name
//   u64 x5   n_h, n_v, k_sub, n_clusters, n_paths_per_cluster
//   f64 x5   angle_spread_rad, center_angle_bound_rad, d_over_lambda, f_s, tau_max
//   u32      split (0 train, 1 val, 2 test)
//   u64      seed
//   u64 x3   dims d0, d1, d2   (d1 = 2, d2 = n_h n_v, d0 a multiple of k_sub)
//   u32      element type (1 = IEEE-754 binary32)
//   f32[d0 d1 d2] row-major payload
//
// Checkpoint "PLCK" v1
//   char[4]  "PLCK"
//   u32      version (1)
//   u32 x4   n_h, n_v, m, n_re
//   f64 x3   leaky_slope, bn_epsilon, bn_momentum
//   u32      tensor count T = 3 + 5 n_re
//   T times: u32 rows, u32 cols, f32[rows cols] row-major
//   tensor order: x_tilde, x_prime, per unit (kernels, gamma, beta, running_mean, running_var), output_conv

#ifndef PILOTNET_IO_HPP
#define PILOTNET_IO_HPP

#include "pilotnet/channel.hpp"
#include "pilotnet/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pilotnet
{

inline constexpr std::uint32_t dataset_format_version = 1;
inline constexpr std::uint32_t checkpoint_format_version = 1;

using Bytes = std::vector<std::uint8_t>;

Bytes encode_dataset(const StackedDataset &ds);
StackedDataset decode_dataset(const Bytes &bytes);

Bytes encode_checkpoint(const ModelParams<float> &params);
ModelParams<float> decode_checkpoint(const Bytes &bytes);

void save_dataset(const StackedDataset &ds, const std::string &path);
StackedDataset load_dataset(const std::string &path);

void save_checkpoint(const ModelParams<float> &params, const std::string &path);
ModelParams<float> load_checkpoint(const std::string &path);

Bytes read_file(const std::string &path);
void write_file(const std::string &path, const Bytes &bytes);

} // namespace pilotnet

#endif
