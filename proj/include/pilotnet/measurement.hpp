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

#ifndef PILOTNET_MEASUREMENT_HPP
#define PILOTNET_MEASUREMENT_HPP

#include "pilotnet/channel.hpp"
#include "pilotnet/numerics.hpp"

namespace pilotnet
{

// Real pilot weights X~ (N_BS x M). The same matrix multiplies the real and the
// imaginary row of a sample, so y = h^T X~ holds for complex h.
template <typename Scalar>
struct PilotMatrix
{
    Matrix<Scalar> x_tilde;

    Index n_bs() const { return x_tilde.rows(); }
    Index m() const { return x_tilde.cols(); }
    double rho() const { return double(m()) / double(n_bs()); }
};

// Measurement-referenced SNR.
// noise_sigma2 is the total variance of one complex measurement; each real part gets half.
struct SnrSpec
{
    double snr_db = 0.0;
    double noise_sigma2 = 0.0;
    double reference_power = 0.0;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline SnrSpec make_snr_spec(double reference_power, double snr_db)
{
    if (!(reference_power > 0.0) || !std::isfinite(reference_power))
        throw NumericError("SNR calibration: reference power must be positive (all-zero signal?)");
    return {snr_db, reference_power / db_to_linear(snr_db), reference_power};
}

// (2 x N_BS) -> (2 x M): both rows multiplied by the shared real X~
template <typename Derived, typename Scalar>
Matrix<Scalar> compress(const Eigen::MatrixBase<Derived> &sample, const PilotMatrix<Scalar> &pilot)
{
    if (sample.rows() != 2 || sample.cols() != pilot.n_bs())
        throw ShapeError("compress: sample must be 2 x N_BS with N_BS = rows(X~)");
    return sample.template cast<Scalar>() * pilot.x_tilde;
}

// Mean of Re^2 + Im^2 over all noiseless measurements of the dataset
template <typename Scalar>
double measurement_power(const StackedDataset &dataset, const PilotMatrix<Scalar> &pilot)
{
    const Index n_bs = dataset.n_bs();
    if (dataset.n_samples() == 0)
        throw ShapeError("measurement_power: empty dataset");
    if (n_bs != pilot.n_bs())
        throw ShapeError("measurement_power: dataset N_BS does not match pilot rows");
    const Matrix<double> x = pilot.x_tilde.template cast<double>();
    using Rows = Eigen::Map<const RowMatrix<float>>;
    double acc = 0.0;
    constexpr std::size_t chunk = 1024;
    for (std::size_t start = 0; start < dataset.n_samples(); start += chunk)
    {
        const std::size_t count = std::min(chunk, dataset.n_samples() - start);
        Rows rows(dataset.samples.slice(start), Index(2 * count), n_bs);
        acc += (rows.cast<double>() * x).squaredNorm();
    }
    return acc / (double(dataset.n_samples()) * double(pilot.m()));
}

template <typename Scalar>
SnrSpec calibrate_snr(const StackedDataset &dataset, const PilotMatrix<Scalar> &pilot, double snr_db)
{
    return make_snr_spec(measurement_power(dataset, pilot), snr_db);
}

// Adds N(0, noise_sigma2 / 2) to every real entry
template <typename Derived>
Matrix<typename Derived::Scalar> add_awgn(const Eigen::MatrixBase<Derived> &meas, const SnrSpec &spec, RngStream &rng)
{
    using S = typename Derived::Scalar;
    if (!(spec.noise_sigma2 >= 0.0))
        throw NumericError("add_awgn: noise variance must be non-negative");
    const double sd = std::sqrt(spec.noise_sigma2 / 2.0);
    Matrix<S> out = meas;
    for (Index j = 0; j < out.cols(); ++j)
        for (Index i = 0; i < out.rows(); ++i)
            out(i, j) += S(sd * rng.gaussian());
    return out;
}

// Complex AWGN with total variance noise_sigma2 per entry
inline ComplexMatrix<double> add_complex_awgn(const ComplexMatrix<double> &meas, const SnrSpec &spec, RngStream &rng)
{
    const double sd = std::sqrt(spec.noise_sigma2);
    ComplexMatrix<double> out = meas;
    for (Index j = 0; j < out.cols(); ++j)
        for (Index i = 0; i < out.rows(); ++i)
            out(i, j) += sd * rng.complex_gaussian();
    return out;
}

} // namespace pilotnet

#endif
