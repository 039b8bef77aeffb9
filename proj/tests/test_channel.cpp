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
#include "pilotnet/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace pilotnet;
using Catch::Matchers::WithinAbs;

namespace
{
constexpr double pi = std::numbers::pi;
constexpr double deg = pi / 180.0;
} // namespace

TEST_CASE("ScenarioConfig - Presets and validation")
{
    const auto c = ScenarioConfig::cluster(16, 16, 256);
    CHECK(c.n_clusters == 6);
    CHECK(c.n_paths_per_cluster == 10);
    CHECK_THAT(c.angle_spread_rad, WithinAbs(3.75 * deg, 1e-15));
    CHECK_THAT(c.tau_max, WithinAbs(256.0 / (4.0 * 100e6), 1e-20));
    CHECK(c.n_bs() == 256);

    const auto o = ScenarioConfig::one_ring(8, 8, 64);
    CHECK(o.n_clusters == 1);
    CHECK(o.n_paths_per_cluster == 100);
    CHECK_THAT(o.angle_spread_rad, WithinAbs(7.5 * deg, 1e-15));
    CHECK(ScenarioConfig::by_name("onering", 4, 4, 8) == ScenarioConfig::one_ring(4, 4, 8));
    CHECK_THROWS_AS(ScenarioConfig::by_name("urban", 4, 4, 8), ConfigError);

    ScenarioConfig bad = c;
    bad.n_h = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.angle_spread_rad = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.d_over_lambda = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.tau_max = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    CHECK(split_from_string(to_string(Split::val)) == Split::val);
    CHECK_THROWS_AS(split_from_string("dev"), ConfigError);
}

TEST_CASE("sample_paths - Counts, bounds and gain moments")
{
    ScenarioConfig cfg = ScenarioConfig::cluster(8, 8, 64);
    RngStream rng(1, 0);
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto paths = sample_paths(cfg, rng);
        REQUIRE(paths.size() == 60);
        for (Index i = 0; i < cfg.n_clusters; ++i)
        {
            // All paths of a cluster lie within 2 spreads of each other
            double az_lo = 1e9, az_hi = -1e9, el_lo = 1e9, el_hi = -1e9;
            for (const auto &p : paths)
                if (p.cluster == i)
                {
                    az_lo = std::min(az_lo, p.azimuth);
                    az_hi = std::max(az_hi, p.azimuth);
                    el_lo = std::min(el_lo, p.elevation);
                    el_hi = std::max(el_hi, p.elevation);
                    CHECK(std::abs(p.azimuth) <= cfg.center_angle_bound_rad + cfg.angle_spread_rad);
                    CHECK((p.delay >= 0.0 && p.delay <= cfg.tau_max));
                }
            CHECK(az_hi - az_lo <= 2.0 * cfg.angle_spread_rad);
            CHECK(el_hi - el_lo <= 2.0 * cfg.angle_spread_rad);
        }
    }

    // Zero spread: paths sit on the cluster centre
    cfg.angle_spread_rad = 0.0;
    cfg.n_clusters = 1;
    cfg.n_paths_per_cluster = 3;
    const auto zero = sample_paths(cfg, rng);
    REQUIRE(zero.size() == 3);
    CHECK(zero[0].azimuth == zero[1].azimuth);
    CHECK(zero[1].azimuth == zero[2].azimuth);
    CHECK(zero[0].elevation == zero[2].elevation);

    // One-ring: 100 paths within +-7.5 deg of one centre
    const auto ring = ScenarioConfig::one_ring(8, 8, 64);
    const auto rp = sample_paths(ring, rng);
    REQUIRE(rp.size() == 100);
    const auto [mn, mx] = std::minmax_element(rp.begin(), rp.end(), [](const auto &a, const auto &b) {
        return a.azimuth < b.azimuth;
    });
    CHECK(mx->azimuth - mn->azimuth <= 15.0 * deg);

    // E|alpha|^2 = 1
    ScenarioConfig many = ScenarioConfig::cluster(2, 2, 4);
    many.n_clusters = 1000;
    many.n_paths_per_cluster = 100;
    RngStream g(2, 0);
    double power = 0.0;
    const auto lots = sample_paths(many, g);
    for (const auto &p : lots)
        power += std::norm(p.gain);
    power /= double(lots.size());
    CHECK((power >= 0.99 && power <= 1.01));
}

TEST_CASE("steering_vector - Closed forms")
{
    const auto a0 = steering_vector(0.0, 0.0, 3, 4, 0.5);
    REQUIRE(a0.size() == 12);
    for (Index i = 0; i < 12; ++i)
    {
        CHECK_THAT(a0(i).real(), WithinAbs(1.0 / std::sqrt(12.0), 1e-15));
        CHECK_THAT(a0(i).imag(), WithinAbs(0.0, 1e-15));
    }

    const auto a1 = steering_vector(pi / 2, 0.0, 2, 1, 0.5);
    CHECK_THAT(a1(0).real(), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(a1(1).real(), WithinAbs(-1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(a1(1).imag(), WithinAbs(0.0, 1e-15));

    RngStream rng(4, 4);
    for (int i = 0; i < 100; ++i)
    {
        const auto a = steering_vector(rng.uniform(-pi, pi), rng.uniform(-pi, pi), 5, 7, 0.5);
        CHECK_THAT(a.norm(), WithinAbs(1.0, 1e-12));
    }
    CHECK_THROWS_AS(steering_vector(0, 0, 0, 3, 0.5), ShapeError);
}

TEST_CASE("channel_from_paths - Reference values and phase ramp")
{
    ScenarioConfig cfg = ScenarioConfig::cluster(2, 3, 4);
    cfg.n_clusters = 1;
    cfg.n_paths_per_cluster = 2;
    std::vector<PathParams> paths(2);
    paths[0] = {{0.3, -0.5}, 2e-9, 0.4, -0.2, 0};
    paths[1] = {{1.1, 0.2}, 7.5e-9, -0.9, 0.35, 0};
    const auto h = channel_from_paths(cfg, paths);
    REQUIRE(h.rows() == 4);
    REQUIRE(h.cols() == 6);
    // Reference values evaluated independently from the channel sum
    CHECK_THAT(h(0, 0).real(), WithinAbs(0.9899494936611667, 1e-13));
    CHECK_THAT(h(0, 0).imag(), WithinAbs(-0.21213203435596426, 1e-13));
    CHECK_THAT(h(1, 4).real(), WithinAbs(0.6277757000420892, 1e-13));
    CHECK_THAT(h(1, 4).imag(), WithinAbs(-0.2025025932226773, 1e-13));
    CHECK_THAT(h(3, 5).real(), WithinAbs(-0.9318062636541824, 1e-13));
    CHECK_THAT(h(3, 5).imag(), WithinAbs(-0.3429533630271281, 1e-13));
    CHECK_THAT(h(2, 2).real(), WithinAbs(0.08368816763880871, 1e-13));
    CHECK_THAT(h(2, 2).imag(), WithinAbs(0.5692069277846573, 1e-13));

    // Single unit path without delay: identical rows sqrt(N) a
    cfg.n_paths_per_cluster = 1;
    const std::vector<PathParams> one{{{1.0, 0.0}, 0.0, 0.3, 0.1, 0}};
    const auto h1 = channel_from_paths(cfg, one);
    const auto a = steering_vector(0.3, 0.1, 2, 3, 0.5);
    for (Index k = 0; k < 4; ++k)
        CHECK((h1.row(k).transpose() - std::sqrt(6.0) * a).cwiseAbs().maxCoeff() < 1e-14);

    // With delay: h_{k+1} / h_k = exp(-j 2 pi tau f_s / K)
    const double tau = 3.3e-9;
    const std::vector<PathParams> delayed{{{1.0, 0.0}, tau, 0.3, 0.1, 0}};
    const auto h2 = channel_from_paths(cfg, delayed);
    const Complex<double> ramp = std::polar(1.0, -2.0 * pi * tau * cfg.f_s / 4.0);
    for (Index k = 0; k + 1 < 4; ++k)
        for (Index p = 0; p < 6; ++p)
            CHECK(std::abs(h2(k + 1, p) / h2(k, p) - ramp) < 1e-12);
}

TEST_CASE("gen_realization - Energy normalization")
{
    // 10^5 rows: 1000 realizations x 100 subcarriers
    ScenarioConfig cfg = ScenarioConfig::cluster(4, 4, 100);
    double acc = 0.0;
    for (std::uint64_t r = 0; r < 1000; ++r)
    {
        RngStream rng(17, r);
        acc += gen_realization(cfg, rng).h_s.rowwise().squaredNorm().sum();
    }
    const double mean = acc / 1e5;
    CHECK((mean >= 0.98 * 16 && mean <= 1.02 * 16));
}

TEST_CASE("angular_transform - Norm, inverse and on-grid sparsity")
{
    ComplexMatrix<double> one(3, 1);
    one << Complex<double>(1, 2), Complex<double>(-1, 0), Complex<double>(0, 3);
    CHECK((angular_transform(one, 1, 1) - one).cwiseAbs().maxCoeff() < 1e-15);

    RngStream rng(8, 1);
    ComplexMatrix<double> h(5, 24);
    for (Index j = 0; j < 24; ++j)
        for (Index i = 0; i < 5; ++i)
            h(i, j) = rng.complex_gaussian();
    const auto ha = angular_transform(h, 4, 6);
    CHECK_THAT(ha.norm(), WithinAbs(h.norm(), 1e-10));
    CHECK((inverse_angular_transform(ha, 4, 6) - h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(angular_transform(h, 4, 5), ShapeError);

    // d/lambda sin(az) cos(el) = k1 / n_h and d/lambda sin(el) = k2 / n_v
    const Index n_h = 8, n_v = 4;
    for (auto [k1, k2] : {std::pair{1, 1}, std::pair{3, 0}, std::pair{-2, 1}})
    {
        const double el = std::asin(2.0 * double(k2) / double(n_v));
        const double az = std::asin(2.0 * double(k1) / double(n_h) / std::cos(el));
        ComplexMatrix<double> row = steering_vector(az, el, n_h, n_v, 0.5).transpose();
        const auto a = angular_transform(row, n_h, n_v);
        int big = 0;
        for (Index p = 0; p < a.cols(); ++p)
            if (std::abs(a(0, p)) > 1e-9)
                ++big;
        CHECK(big == 1);
        CHECK_THAT(a.cwiseAbs().maxCoeff(), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("angular_transform - Cluster channels are compressible")
{
    const ScenarioConfig cfg = ScenarioConfig::cluster(16, 16, 16);
    const Index n = cfg.n_bs();
    const Index top = n / 10;
    double worst = 1.0;
    for (std::uint64_t r = 0; r < 10; ++r)
    {
        RngStream rng(23, r);
        const auto ha = angular_transform(gen_realization(cfg, rng).h_s, 16, 16);
        for (Index k = 0; k < ha.rows(); ++k)
        {
            std::vector<double> e(static_cast<std::size_t>(n));
            for (Index p = 0; p < n; ++p)
                e[std::size_t(p)] = std::norm(ha(k, p));
            std::sort(e.begin(), e.end(), std::greater<>());
            double head = 0.0, total = 0.0;
            for (Index p = 0; p < n; ++p)
            {
                total += e[std::size_t(p)];
                if (p < top)
                    head += e[std::size_t(p)];
            }
            worst = std::min(worst, head / total);
        }
    }
    INFO("smallest top-10% energy fraction " << worst);
    // i.i.d. Rayleigh entries would put 0.1 (1 + ln 10) = 0.33 of the energy in the top 10%
    CHECK(worst > 2.0 * 0.1 * (1.0 + std::log(10.0)));
}

TEST_CASE("build_dataset - Shape, ordering and determinism")
{
    ScenarioConfig cfg = ScenarioConfig::cluster(2, 1, 4);
    const auto ds = build_dataset(cfg, 1, 3, Split::test);
    CHECK(ds.samples.dims == std::array<std::size_t, 3>{4, 2, 2});
    CHECK(ds.n_realizations() == 1);

    const ScenarioConfig c8 = ScenarioConfig::cluster(4, 4, 8);
    const auto a = build_dataset(c8, 3, 99, Split::train);
    const auto b = build_dataset(c8, 3, 99, Split::train);
    const auto v = build_dataset(c8, 3, 99, Split::val);
    CHECK(a.samples == b.samples);
    CHECK_FALSE(a.samples == v.samples);

    // Realization r equals gen_realization on its own substream, rounded to float
    RngStream rng(99, realization_stream_id(Split::train, 2));
    const auto ref = gen_realization(c8, rng).h_s;
    const auto got = a.realization(2);
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-6 * ref.cwiseAbs().maxCoeff());
    CHECK(a.samples(2 * 8 + 5, 1, 3) == float(ref(5, 3).imag()));
    CHECK_THROWS_AS(a.realization(3), ShapeError);
    CHECK_THROWS_AS(build_dataset(c8, 0, 1, Split::train), ConfigError);
}
