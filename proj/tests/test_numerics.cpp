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
#include "pilotnet/numerics.hpp"

#include <cmath>
#include <vector>

using namespace pilotnet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dft_matrix - Values and unitarity")
{
    const auto f1 = dft_matrix(1);
    CHECK(f1.rows() == 1);
    CHECK_THAT(f1(0, 0).real(), WithinAbs(1.0, 1e-15));

    // n = 2 is [[1, 1], [1, -1]] / sqrt(2)
    const auto f2 = dft_matrix(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK_THAT(f2(1, 1).real(), WithinAbs(-s, 1e-15));
    CHECK_THAT(f2(1, 1).imag(), WithinAbs(0.0, 1e-15));

    // n = 4, entry (1, 1) = exp(-j pi / 2) / 2 = -j/2
    const auto f4 = dft_matrix(4);
    CHECK_THAT(f4(1, 1).real(), WithinAbs(0.0, 1e-15));
    CHECK_THAT(f4(1, 1).imag(), WithinAbs(-0.5, 1e-15));

    for (Index n : {1, 2, 3, 5, 8, 16, 64, 256})
    {
        const auto f = dft_matrix(n);
        const double err = (f.adjoint() * f - ComplexMatrix<double>::Identity(n, n)).cwiseAbs().maxCoeff();
        CHECK(err < 1e-12);
        CHECK((f - f.transpose()).cwiseAbs().maxCoeff() == 0.0); // symmetric
    }

    CHECK_THROWS_AS(dft_matrix(0), ShapeError);
    CHECK_THROWS_AS(dft_matrix(-3), ShapeError);
}

TEST_CASE("kron - Shape, blocks and mixed product")
{
    Matrix<double> a(2, 3), b(3, 2);
    a << 1, 2, 3, 4, 5, 6;
    b << 0, 1, 1, 0, 2, -1;
    const Matrix<double> k = kron(a, b);
    REQUIRE(k.rows() == 6);
    REQUIRE(k.cols() == 6);
    CHECK(k.block(3, 6 - 2, 3, 2) == 6.0 * b);
    CHECK(k(4, 3) == a(1, 1) * b(1, 1));
    CHECK(k(2, 1) == a(0, 0) * b(2, 1));

    // (A (x) B)(C (x) D) = (AC) (x) (BD)
    RngStream rng(3, 1);
    auto randm = [&](Index r, Index c) {
        ComplexMatrix<double> m(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i)
                m(i, j) = rng.complex_gaussian();
        return m;
    };
    const auto A = randm(3, 4), B = randm(2, 5), C = randm(4, 2), D = randm(5, 3);
    const ComplexMatrix<double> lhs = kron(A, B) * kron(C, D);
    const ComplexMatrix<double> rhs = kron(A * C, B * D);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * rhs.cwiseAbs().maxCoeff());

    // Mixed real / complex operands promote to complex
    const ComplexMatrix<double> mixed = kron(a, B);
    CHECK(mixed.rows() == 4);
    CHECK(mixed(0, 0) == a(0, 0) * B(0, 0));

    CHECK_THROWS_AS(kron(Matrix<double>(0, 2), b), ShapeError);
}

TEST_CASE("lstsq - Exact solve, orthogonality and rank checks")
{
    Matrix<double> a(3, 2);
    a << 1, 0, 0, 1, 1, 1;
    Matrix<double> b(3, 1);
    b << 1, 2, 4;
    // Normal equations [[2, 1], [1, 2]] x = [5, 6] give x = [4/3, 7/3]
    const Matrix<double> x = lstsq(a, b);
    CHECK_THAT(x(0), WithinAbs(4.0 / 3.0, 1e-13));
    CHECK_THAT(x(1), WithinAbs(7.0 / 3.0, 1e-13));

    RngStream rng(11, 0);
    ComplexMatrix<double> ac(20, 6), bc(20, 4);
    for (Index j = 0; j < 6; ++j)
        for (Index i = 0; i < 20; ++i)
            ac(i, j) = rng.complex_gaussian();
    for (Index j = 0; j < 4; ++j)
        for (Index i = 0; i < 20; ++i)
            bc(i, j) = rng.complex_gaussian();
    const ComplexMatrix<double> xc = lstsq(ac, bc);
    const ComplexMatrix<double> r = bc - ac * xc;
    CHECK((ac.adjoint() * r).cwiseAbs().maxCoeff() < 1e-12);

    // Square, well conditioned: exact recovery
    Matrix<double> sq = Matrix<double>::Random(5, 5) + 5.0 * Matrix<double>::Identity(5, 5);
    const Matrix<double> truth = Matrix<double>::Random(5, 2);
    CHECK((lstsq(sq, sq * truth) - truth).cwiseAbs().maxCoeff() < 1e-12);

    Matrix<double> dep(4, 2);
    dep << 1, 2, 2, 4, 3, 6, 4, 8;
    CHECK_THROWS_AS(lstsq(dep, Matrix<double>::Ones(4, 1)), RankError);
    CHECK_THROWS_AS(lstsq(Matrix<double>::Zero(3, 2), Matrix<double>::Ones(3, 1)), RankError);
    CHECK_THROWS_AS(lstsq(Matrix<double>::Ones(2, 3), Matrix<double>::Ones(2, 1)), ShapeError);
    CHECK_THROWS_AS(lstsq(a, Matrix<double>::Ones(4, 1)), ShapeError);
}

TEST_CASE("RngStream - Golden sequence")
{
    // Reference values from an independent implementation of seed_seq + mt19937_64
    RngStream a(0, 0);
    CHECK(a.next_u64() == 3373632161362506401ull);
    CHECK(a.next_u64() == 11818349101561957838ull);
    CHECK(a.next_u64() == 10478129664661402245ull);

    RngStream b(42, 7);
    CHECK(b.next_u64() == 15935333257242757272ull);
    CHECK(b.next_u64() == 10104937892238970824ull);
    CHECK(b.next_u64() == 11097938231647209428ull);

    RngStream c(0x123456789abcdef0ull, (1ull << 40) | 5);
    CHECK(c.next_u64() == 4085684186802383612ull);
    CHECK(c.next_u64() == 1662655233173511685ull);
    CHECK(c.next_u64() == 17583728187975619083ull);
    CHECK(c.cursor() == 3);

    RngStream u(42, 7);
    CHECK(u.uniform() == 0.8638561468391553);
    CHECK(u.uniform() == 0.5477897807798292);
    CHECK(u.uniform() == 0.601620437043092);

    RngStream g(42, 7);
    CHECK_THAT(g.gaussian(), WithinRel(-0.5168085724309354, 1e-14));
    CHECK_THAT(g.gaussian(), WithinRel(-0.1600216890617508, 1e-14));
    CHECK_THAT(g.gaussian(), WithinRel(-0.6095836535989934, 1e-14));
    CHECK_THAT(g.gaussian(), WithinRel(0.8029102321022047, 1e-14));
}

TEST_CASE("RngStream - Determinism, independence and moments")
{
    RngStream a(5, 9), b(5, 9), c(5, 10);
    bool differs = false;
    for (int i = 0; i < 100; ++i)
    {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);

    RngStream s(1, 2);
    constexpr int n = 200000;
    double mean = 0.0, sq = 0.0, cm = 0.0;
    std::vector<int> bins(7, 0);
    for (int i = 0; i < n; ++i)
    {
        const double x = s.gaussian();
        mean += x;
        sq += x * x;
        cm += std::norm(s.complex_gaussian());
        const double u = s.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        ++bins[s.below(7)];
    }
    CHECK(std::abs(mean / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);
    CHECK(std::abs(cm / n - 1.0) < 0.01);
    for (int count : bins)
        CHECK(std::abs(count - n / 7.0) < 0.02 * n / 7.0);

    CHECK_THROWS_AS(s.below(0), ConfigError);
    const Vector<double> v = s.gaussian(5);
    CHECK(v.size() == 5);
}

TEST_CASE("RealTensor3 - Layout")
{
    RealTensor3<float> t(2, 3, 4);
    CHECK(t.size() == 24);
    t(1, 2, 3) = 7.0f;
    CHECK(t.data[23] == 7.0f);
    CHECK(t.slice(1)[11] == 7.0f);
    RealTensor3<float> u = t;
    CHECK(u == t);
    u(0, 0, 0) = 1.0f;
    CHECK_FALSE(u == t);
}
