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

#ifndef PILOTNET_NUMERICS_HPP
#define PILOTNET_NUMERICS_HPP

#include "pilotnet/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace pilotnet
{

using Eigen::Index;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexMatrix = Matrix<Complex<Scalar>>;

template <typename Scalar>
using ComplexVector = Vector<Complex<Scalar>>;

// True when every entry (real and imaginary part) is finite
template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived> &m)
{
    return m.allFinite();
}

// Unitary n x n DFT matrix, entry (p,q) = exp(-j 2 pi p q / n) / sqrt(n)
template <typename Scalar = double>
ComplexMatrix<Scalar> dft_matrix(Index n)
{
    if (n < 1)
        throw ShapeError("dft_matrix: n must be >= 1");
    ComplexMatrix<Scalar> f(n, n);
    const double scale = 1.0 / std::sqrt(double(n));
    for (Index p = 0; p < n; ++p)
        for (Index q = 0; q < n; ++q)
        {
            // Reduce p*q mod n first so large products keep full phase accuracy
            const double phase = -2.0 * std::numbers::pi * double((p * q) % n) / double(n);
            f(p, q) = Complex<Scalar>(Scalar(scale * std::cos(phase)), Scalar(scale * std::sin(phase)));
        }
    return f;
}

// Kronecker product A (x) B, block (p,q) = A(p,q) * B
template <typename DerivedA, typename DerivedB>
Matrix<typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar, typename DerivedB::Scalar>::ReturnType>
kron(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedB> &b)
{
    using Out = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar, typename DerivedB::Scalar>::ReturnType;
    constexpr auto max_index = std::numeric_limits<Index>::max();
    if ((a.rows() != 0 && b.rows() > max_index / a.rows()) || (a.cols() != 0 && b.cols() > max_index / a.cols()))
        throw ShapeError("kron: result dimensions overflow");
    if (a.size() == 0 || b.size() == 0)
        throw ShapeError("kron: empty operand");

    Matrix<Out> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index p = 0; p < a.rows(); ++p)
        for (Index q = 0; q < a.cols(); ++q)
            out.block(p * b.rows(), q * b.cols(), b.rows(), b.cols()) = Out(a(p, q)) * b.template cast<Out>();
    return out;
}

// Least-squares solution X = argmin ||A X - B||_F for a tall, full column rank A.
// Rank is judged on the singular values: sigma_min < 1e-12 sigma_max is rejected.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> lstsq(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedB> &b)
{
    using S = typename DerivedA::Scalar;
    if (a.rows() != b.rows())
        throw ShapeError("lstsq: A and B row counts differ");
    if (a.cols() < 1 || a.rows() < a.cols())
        throw ShapeError("lstsq: A must have rows >= cols >= 1");

    const Matrix<S> a_eval = a;
    Eigen::JacobiSVD<Matrix<S>> svd(a_eval, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (!(sv(0) > 0) || sv(sv.size() - 1) < 1e-12 * sv(0))
        throw RankError("lstsq: matrix is rank deficient");
    return svd.solve(b.template cast<S>().eval());
}

// Row-major real 3-tensor (d0, d1, d2)
template <typename Scalar>
struct RealTensor3
{
    std::array<std::size_t, 3> dims{0, 0, 0};
    std::vector<Scalar> data;

    RealTensor3() = default;
    RealTensor3(std::size_t d0, std::size_t d1, std::size_t d2) : dims{d0, d1, d2}, data(d0 * d1 * d2, Scalar(0)) {}

    std::size_t size() const { return data.size(); }
    std::size_t slice_size() const { return dims[1] * dims[2]; }

    Scalar &operator()(std::size_t i, std::size_t j, std::size_t k) { return data[(i * dims[1] + j) * dims[2] + k]; }
    const Scalar &operator()(std::size_t i, std::size_t j, std::size_t k) const
    {
        return data[(i * dims[1] + j) * dims[2] + k];
    }

    Scalar *slice(std::size_t i) { return data.data() + i * slice_size(); }
    const Scalar *slice(std::size_t i) const { return data.data() + i * slice_size(); }

    bool operator==(const RealTensor3 &) const = default;
};

// Deterministic random stream keyed by (seed, stream_id).
// Engine is mt19937_64 seeded through std::seed_seq, both of which have a fully
// specified output sequence; uniforms and normals are derived here rather than through
// the implementation-defined std:: distributions.
class RngStream
{
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t cursor() const { return cursor_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [0, n)
    std::uint64_t below(std::uint64_t n);

    // Standard normal (Box-Muller, spare value cached)
    double gaussian();
    Vector<double> gaussian(Index n);

    // Circular complex normal with unit variance, (x + j y)/sqrt(2)
    Complex<double> complex_gaussian();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t cursor_ = 0;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline RngStream rng_stream(std::uint64_t seed, std::uint64_t stream_id) { return RngStream(seed, stream_id); }

inline Vector<double> draw_gaussian(RngStream &s, Index n) { return s.gaussian(n); }

} // namespace pilotnet

#endif
