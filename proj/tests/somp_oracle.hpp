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

// Exhaustive-support least squares, shared by the unit and acceptance suites.

#ifndef PILOTNET_TESTS_SOMP_ORACLE_HPP
#define PILOTNET_TESTS_SOMP_ORACLE_HPP

#include "pilotnet/somp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle
{
using namespace pilotnet;

struct Trial
{
    Dictionary dict;
    Matrix<double> pilot;
    ComplexMatrix<double> h_s;   // K x N_BS
    ComplexMatrix<double> y;     // M x K
    std::vector<Index> support;  // true atoms, ascending
};

// Noiseless on-grid MMV: two distinct atoms, common support across K columns
inline Trial two_sparse_trial(std::uint64_t seed, Index n_h, Index n_v, Index g, Index m, Index k)
{
    Trial t;
    t.dict = build_dictionary(g, g, n_h, n_v);
    RngStream rng(seed, 0x4f52'4143ull);
    t.pilot = random_pilot(n_h * n_v, m, rng);
    const Index d = t.dict.atoms();
    const Index a = Index(rng.below(std::uint64_t(d)));
    Index b = Index(rng.below(std::uint64_t(d - 1)));
    if (b >= a)
        ++b;
    t.support = {std::min(a, b), std::max(a, b)};
    ComplexMatrix<double> coeffs(2, k);
    for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < 2; ++i)
            coeffs(i, j) = rng.complex_gaussian();
    ComplexMatrix<double> sub(n_h * n_v, 2);
    sub.col(0) = t.dict.psi.col(t.support[0]);
    sub.col(1) = t.dict.psi.col(t.support[1]);
    t.h_s = (sub * coeffs).transpose();
    t.y = somp_measure(t.h_s, t.pilot);
    return t;
}

struct Exhaustive
{
    std::vector<Index> support;
    ComplexMatrix<double> h_s_hat;
    double residual = std::numeric_limits<double>::infinity();
};

// Best support of size 2 by Householder QR over every pair of atoms
inline Exhaustive exhaustive_two(const Trial &t)
{
    const ComplexMatrix<double> phi = t.pilot.transpose().cast<Complex<double>>() * t.dict.psi;
    const Index d = phi.cols();
    Exhaustive best;
    ComplexMatrix<double> best_c;
    for (Index a = 0; a < d; ++a)
        for (Index b = a + 1; b < d; ++b)
        {
            ComplexMatrix<double> sub(phi.rows(), 2);
            sub.col(0) = phi.col(a);
            sub.col(1) = phi.col(b);
            Eigen::HouseholderQR<ComplexMatrix<double>> qr(sub);
            const ComplexMatrix<double> c = qr.solve(t.y);
            const double r = (t.y - sub * c).norm();
            if (r < best.residual)
            {
                best.residual = r;
                best.support = {a, b};
                best_c = c;
            }
        }
    ComplexMatrix<double> atoms(t.dict.psi.rows(), 2);
    atoms.col(0) = t.dict.psi.col(best.support[0]);
    atoms.col(1) = t.dict.psi.col(best.support[1]);
    best.h_s_hat = (atoms * best_c).transpose();
    return best;
}

} // namespace oracle

#endif
