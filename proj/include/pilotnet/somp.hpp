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

// Simultaneous OMP over an oversampled 2-D DFT dictionary. All K subcarriers of a
// realization share one support; each iteration picks the atom with the largest
// correlation energy summed over the K residual columns, then re-projects every column
// onto the selected atoms.

#ifndef PILOTNET_SOMP_HPP
#define PILOTNET_SOMP_HPP

#include "pilotnet/numerics.hpp"

#include <optional>
#include <vector>

namespace pilotnet
{

// psi = Psi_h (x) Psi_v with (Psi_h)(m, g) = exp(-j 2 pi m g / g_h) / sqrt(n_h); atom index g * g_v + g'
struct Dictionary
{
    ComplexMatrix<double> psi; // (N_BS, g_h g_v)
    Index n_h = 0;
    Index n_v = 0;
    Index g_h = 0;
    Index g_v = 0;

    Index atoms() const { return psi.cols(); }
};

Dictionary build_dictionary(Index g_h, Index g_v, Index n_h, Index n_v);

// i.i.d. N(0, 1/m) real entries, (n_bs, m)
Matrix<double> random_pilot(Index n_bs, Index m, RngStream &rng);

struct SompConfig
{
    Index iterations = 16;
    std::optional<double> residual_tol;
};

struct SompResult
{
    std::vector<Index> support;          // selected atom indices, in selection order
    ComplexMatrix<double> coeffs;        // (|support|, K)
    std::vector<double> residual_norms;  // [0] = ||Y||_F, then one entry per iteration
    Index best_iteration = 0;            // iterate whose coefficients were kept
};

// phi must have unit-norm columns. Throws ConfigError for I outside [1, M], RankError
// when the selected atoms become linearly dependent.
SompResult somp_estimate(const ComplexMatrix<double> &y_meas, const ComplexMatrix<double> &phi,
                         const SompConfig &cfg);

// H^_s (K x N_BS) with h^_k = psi[:, support] coeffs[:, k]
ComplexMatrix<double> reestablish(const SompResult &result, const Dictionary &dict);

// Measurements of a realization through a real pilot: Y (M x K) = X^T H_s^T
ComplexMatrix<double> somp_measure(const ComplexMatrix<double> &h_s, const Matrix<double> &pilot);

struct SompChannelEstimate
{
    SompResult result; // coefficients refer to the unnormalized dictionary atoms
    ComplexMatrix<double> h_s_hat;
};

// Builds phi = X^T psi, normalizes its columns, runs SOMP and reconstructs H^_s
SompChannelEstimate somp_channel_estimate(const ComplexMatrix<double> &y_meas, const Matrix<double> &pilot,
                                          const Dictionary &dict, const SompConfig &cfg);

} // namespace pilotnet

#endif
