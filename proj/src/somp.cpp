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

#include "pilotnet/somp.hpp"

#include <algorithm>

namespace pilotnet
{

namespace
{
ComplexMatrix<double> grid_factor(Index n, Index g)
{
    ComplexMatrix<double> f(n, g);
    const double scale = 1.0 / std::sqrt(double(n));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < g; ++j)
            f(i, j) = std::polar(scale, -2.0 * std::numbers::pi * double((i * j) % g) / double(g));
    return f;
}
} // namespace

Dictionary build_dictionary(Index g_h, Index g_v, Index n_h, Index n_v)
{
    if (n_h < 1 || n_v < 1 || g_h < n_h || g_v < n_v)
        throw ConfigError("build_dictionary: need g_h >= n_h >= 1 and g_v >= n_v >= 1");
    Dictionary d;
    d.n_h = n_h;
    d.n_v = n_v;
    d.g_h = g_h;
    d.g_v = g_v;
    d.psi = kron(grid_factor(n_h, g_h), grid_factor(n_v, g_v));
    for (Index j = 0; j < d.psi.cols(); ++j)
        d.psi.col(j).normalize();
    return d;
}

Matrix<double> random_pilot(Index n_bs, Index m, RngStream &rng)
{
    if (m < 1 || m > n_bs)
        throw ConfigError("random_pilot: need 1 <= m <= n_bs");
    Matrix<double> x(n_bs, m);
    const double scale = 1.0 / std::sqrt(double(m));
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n_bs; ++i)
            x(i, j) = scale * rng.gaussian();
    return x;
}

SompResult somp_estimate(const ComplexMatrix<double> &y_meas, const ComplexMatrix<double> &phi, const SompConfig &cfg)
{
    const Index m = y_meas.rows();
    const Index k = y_meas.cols();
    if (phi.rows() != m || phi.cols() < 1 || k < 1)
        throw ShapeError("somp_estimate: phi must be (M x D) with M = rows(y)");
    if (cfg.iterations < 1 || cfg.iterations > m)
        throw ConfigError("somp_estimate: iterations must lie in [1, M]");

    SompResult out;
    out.coeffs.resize(0, k);
    ComplexMatrix<double> residual = y_meas;
    const double y_norm = y_meas.norm();
    out.residual_norms.push_back(y_norm);
    if (!(y_norm > 0.0))
        return out;

    std::vector<Index> support;
    std::vector<char> used(std::size_t(phi.cols()), 0);
    ComplexMatrix<double> best_coeffs(0, k);
    double best_norm = y_norm;
    Index best_iter = 0;
    const ComplexMatrix<double> phi_h = phi.adjoint();

    for (Index it = 1; it <= cfg.iterations; ++it)
    {
        // Correlation energy per atom, summed over the K columns
        const Vector<double> energy = (phi_h * residual).rowwise().squaredNorm();
        Index pick = -1;
        double top = 0.0;
        for (Index d = 0; d < energy.size(); ++d)
            if (!used[std::size_t(d)] && energy(d) > top)
            {
                top = energy(d);
                pick = d;
            }
        if (pick < 0 || top <= 1e-28 * y_norm * y_norm)
            break;

        used[std::size_t(pick)] = 1;
        support.push_back(pick);
        ComplexMatrix<double> sub(m, Index(support.size()));
        for (std::size_t s = 0; s < support.size(); ++s)
            sub.col(Index(s)) = phi.col(support[s]);

        ComplexMatrix<double> coeffs = lstsq(sub, y_meas);
        residual = y_meas - sub * coeffs;
        const double r_norm = residual.norm();
        out.residual_norms.push_back(r_norm);
        if (r_norm < best_norm)
        {
            best_norm = r_norm;
            best_iter = it;
            best_coeffs = std::move(coeffs);
        }
        if (cfg.residual_tol && r_norm < *cfg.residual_tol)
            break;
    }

    out.best_iteration = best_iter;
    out.support.assign(support.begin(), support.begin() + best_iter);
    out.coeffs = best_coeffs;
    return out;
}

ComplexMatrix<double> reestablish(const SompResult &result, const Dictionary &dict)
{
    const Index k = result.coeffs.cols();
    const Index n = dict.psi.rows();
    if (Index(result.support.size()) != result.coeffs.rows())
        throw ShapeError("reestablish: support and coefficient counts differ");
    ComplexMatrix<double> h = ComplexMatrix<double>::Zero(k, n);
    for (std::size_t s = 0; s < result.support.size(); ++s)
        h += result.coeffs.row(Index(s)).transpose() * dict.psi.col(result.support[s]).transpose();
    return h;
}

ComplexMatrix<double> somp_measure(const ComplexMatrix<double> &h_s, const Matrix<double> &pilot)
{
    if (h_s.cols() != pilot.rows())
        throw ShapeError("somp_measure: pilot rows must equal N_BS");
    return pilot.transpose().cast<Complex<double>>() * h_s.transpose();
}

SompChannelEstimate somp_channel_estimate(const ComplexMatrix<double> &y_meas, const Matrix<double> &pilot,
                                          const Dictionary &dict, const SompConfig &cfg)
{
    if (pilot.rows() != dict.psi.rows() || y_meas.rows() != pilot.cols())
        throw ShapeError("somp_channel_estimate: pilot must be (N_BS x M) matching dictionary and measurements");
    ComplexMatrix<double> phi = pilot.transpose().cast<Complex<double>>() * dict.psi;
    Vector<double> norms = phi.colwise().norm().transpose();
    for (Index j = 0; j < phi.cols(); ++j)
        if (norms(j) > 0.0)
            phi.col(j) /= norms(j);

    SompChannelEstimate est;
    est.result = somp_estimate(y_meas, phi, cfg);
    for (std::size_t s = 0; s < est.result.support.size(); ++s)
        est.result.coeffs.row(Index(s)) /= norms(est.result.support[s]);
    est.h_s_hat = reestablish(est.result, dict);
    return est;
}

} // namespace pilotnet
