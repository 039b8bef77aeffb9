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


// Finite-difference helpers shared by the unit and acceptance suites.

#ifndef PILOTNET_TESTS_FD_CHECK_HPP
#define PILOTNET_TESTS_FD_CHECK_HPP

#include "pilotnet/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fd
{
using namespace pilotnet;

inline RowMatrix<double> random_rows(Index r, Index c, RngStream &rng)
{
    RowMatrix<double> m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            m(i, j) = rng.gaussian();
    return m;
}

// Central differences of f with respect to every entry of w
template <typename M>
M numeric_grad(M &w, const std::function<double()> &f)
{
    M g(w.rows(), w.cols());
    for (Index i = 0; i < w.rows(); ++i)
        for (Index j = 0; j < w.cols(); ++j)
        {
            const double orig = w(i, j);
            const double h = 1e-5 * std::max(1.0, std::abs(orig));
            w(i, j) = orig + h;
            const double up = f();
            w(i, j) = orig - h;
            const double down = f();
            w(i, j) = orig;
            g(i, j) = (up - down) / (2.0 * h);
        }
    return g;
}

template <typename A, typename B>
double rel_err(const A &analytic, const B &numeric)
{
    const double denom = std::max(numeric.norm(), 1e-12);
    return (analytic - numeric).norm() / denom;
}

} // namespace fd

#endif
