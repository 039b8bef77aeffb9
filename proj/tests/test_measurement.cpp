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

#include <catch_amalgamated.hpp>
#include "pilotnet/measurement.hpp"

#include <cmath>

using namespace pilotnet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
Matrix<double> random_real(Index r, Index c, RngStream &rng)
{
    Matrix<double> m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i)
            m(i, j) = rng.gaussian();
    return m;
}
} // namespace

TEST_CASE("compress - Identity, zero and complex oracle")
{
    RngStream rng(1, 1);
    const Matrix<double> s = random_real(2, 6, rng);
    const PilotMatrix<double> eye{Matrix<double>::Identity(6, 6)};
    CHECK(compress(s, eye) == s);
    CHECK(eye.rho() == 1.0);

    const PilotMatrix<double> x{random_real(6, 3, rng)};
    CHECK(x.m() == 3);
    CHECK_THAT(x.rho(), WithinAbs(0.5, 0.0));
    CHECK(compress(Matrix<double>::Zero(2, 6), x).isZero(0.0));

    // Stacked real path equals h^T X~ computed in complex arithmetic
    ComplexVector<double> h(6);
    for (Index i = 0; i < 6; ++i)
        h(i) = rng.complex_gaussian();
    Matrix<double> stacked(2, 6);
    stacked.row(0) = h.real().transpose();
    stacked.row(1) = h.imag().transpose();
    const ComplexVector<double> y = (h.transpose() * x.x_tilde.cast<Complex<double>>()).transpose();
    const Matrix<double> got = compress(stacked, x);
    for (Index j = 0; j < 3; ++j)
    {
        CHECK_THAT(got(0, j), WithinAbs(y(j).real(), 1e-12));
        CHECK_THAT(got(1, j), WithinAbs(y(j).imag(), 1e-12));
    }

    // Linearity
    const Matrix<double> s2 = random_real(2, 6, rng);
    const Matrix<double> lin = compress((2.5 * s - 1.5 * s2).eval(), x) - (2.5 * compress(s, x) - 1.5 * compress(s2, x));
    CHECK(lin.cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(compress(Matrix<double>::Zero(2, 5), x), ShapeError);
    CHECK_THROWS_AS(compress(Matrix<double>::Zero(3, 6), x), ShapeError);
}

TEST_CASE("calibrate_snr - Decibel rule and pilot-scale invariance")
{
    const auto ds = build_dataset(ScenarioConfig::cluster(4, 4, 8), 4, 5, Split::train);
    RngStream rng(3, 3);
    const PilotMatrix<double> x{random_real(16, 8, rng)};

    const SnrSpec s0 = calibrate_snr(ds, x, 0.0);
    CHECK(s0.reference_power > 0.0);
    CHECK_THAT(s0.noise_sigma2, WithinRel(s0.reference_power, 1e-15));
    const SnrSpec s10 = calibrate_snr(ds, x, 10.0);
    CHECK_THAT(s10.noise_sigma2, WithinRel(s10.reference_power / 10.0, 1e-14));

    // Reference power by direct summation
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
    {
        Eigen::Map<const RowMatrix<float>> sample(ds.samples.slice(i), 2, 16);
        acc += compress(sample.cast<double>(), x).squaredNorm();
    }
    CHECK_THAT(s0.reference_power, WithinRel(acc / (double(ds.n_samples()) * 8.0), 1e-12));

    const PilotMatrix<double> scaled{-3.7 * x.x_tilde};
    const SnrSpec sc = calibrate_snr(ds, scaled, 10.0);
    CHECK_THAT(sc.noise_sigma2 / sc.reference_power, WithinRel(s10.noise_sigma2 / s10.reference_power, 1e-12));
    CHECK_THAT(sc.reference_power, WithinRel(3.7 * 3.7 * s10.reference_power, 1e-12));

    const PilotMatrix<double> zero{Matrix<double>::Zero(16, 8)};
    CHECK_THROWS_AS(calibrate_snr(ds, zero, 10.0), NumericError);
    const PilotMatrix<double> wrong{Matrix<double>::Zero(9, 8)};
    CHECK_THROWS_AS(calibrate_snr(ds, wrong, 10.0), ShapeError);
}

TEST_CASE("add_awgn - Variance, determinism and empirical SNR")
{
    SnrSpec spec{0.0, 2.0, 2.0};
    Matrix<double> zero = Matrix<double>::Zero(2, 500000);
    RngStream a(9, 9), b(9, 9);
    const Matrix<double> na = add_awgn(zero, spec, a);
    const Matrix<double> nb = add_awgn(zero, spec, b);
    CHECK(na == nb);
    const double var = na.squaredNorm() / double(na.size());
    CHECK((var >= 0.99 * 1.0 && var <= 1.01 * 1.0));

    SnrSpec none{0.0, 0.0, 1.0};
    Matrix<double> ones = Matrix<double>::Ones(2, 4);
    CHECK(add_awgn(ones, none, a) == ones);

    // 10^5 noisy samples at 7 dB
    const auto ds = build_dataset(ScenarioConfig::cluster(4, 4, 100), 1000, 2, Split::train);
    RngStream p(4, 4);
    const PilotMatrix<double> x{random_real(16, 6, p)};
    const SnrSpec s = calibrate_snr(ds, x, 7.0);
    RngStream n(5, 5);
    double signal = 0.0, noise = 0.0;
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
    {
        Eigen::Map<const RowMatrix<float>> sample(ds.samples.slice(i), 2, 16);
        const Matrix<double> clean = compress(sample.cast<double>(), x);
        const Matrix<double> noisy = add_awgn(clean, s, n);
        signal += clean.squaredNorm();
        noise += (noisy - clean).squaredNorm();
    }
    CHECK(std::abs(10.0 * std::log10(signal / noise) - 7.0) < 0.1);

    SnrSpec neg{0.0, -1.0, 1.0};
    CHECK_THROWS_AS(add_awgn(ones, neg, a), NumericError);
}

TEST_CASE("add_complex_awgn - Total variance per entry")
{
    SnrSpec spec{0.0, 0.5, 1.0};
    RngStream rng(6, 6);
    const ComplexMatrix<double> z = add_complex_awgn(ComplexMatrix<double>::Zero(100, 2000), spec, rng);
    const double var = z.squaredNorm() / double(z.size());
    CHECK((var >= 0.99 * 0.5 && var <= 1.01 * 0.5));
    CHECK(std::abs(z.real().squaredNorm() / z.imag().squaredNorm() - 1.0) < 0.02);
}

TEST_CASE("make_snr_spec - Rejects degenerate power")
{
    CHECK_THROWS_AS(make_snr_spec(0.0, 10.0), NumericError);
    CHECK_THROWS_AS(make_snr_spec(std::nan(""), 10.0), NumericError);
    CHECK_THAT(db_to_linear(20.0), WithinRel(100.0, 1e-15));
}
