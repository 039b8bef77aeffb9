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
#include "pilotnet/io.hpp"

#include <cstring>
#include <filesystem>

using namespace pilotnet;
using Catch::Matchers::ContainsSubstring;

namespace
{
void put_u64(Bytes &b, std::size_t offset, std::uint64_t v) { std::memcpy(b.data() + offset, &v, sizeof v); }

ModelParams<float> sample_model()
{
    NetworkHyper h;
    h.n_h = 4;
    h.n_v = 2;
    h.m = 3;
    h.n_re = 2;
    RngStream rng(8, 8);
    auto p = init_params<float>(h, rng);
    p.units[1].running_mean(2) = 0.25f;
    p.units[0].running_var(1) = 3.5f;
    return p;
}
} // namespace

TEST_CASE("dataset - Byte-exact round trip")
{
    const auto ds = build_dataset(ScenarioConfig::one_ring(4, 2, 8), 3, 21, Split::val);
    const Bytes a = encode_dataset(ds);
    const StackedDataset back = decode_dataset(a);
    CHECK(back.samples.dims == ds.samples.dims);
    CHECK(back.samples.data == ds.samples.data);
    CHECK(back.scenario.name == "onering");
    CHECK(back.scenario.angle_spread_rad == ds.scenario.angle_spread_rad);
    CHECK(back.split == Split::val);
    CHECK(back.seed == 21);
    CHECK(encode_dataset(back) == a);

    // 4 + 4 + 4 + 7 name bytes + 40 + 40 + 4 + 8 + 24 + 4 header bytes
    CHECK(a.size() == 139 + 24 * 2 * 8 * 4);
}

TEST_CASE("dataset - Corrupt input is rejected")
{
    const auto ds = build_dataset(ScenarioConfig::cluster(2, 2, 4), 2, 3, Split::train);
    const Bytes good = encode_dataset(ds);

    Bytes magic = good;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_dataset(magic), FormatError);

    Bytes version = good;
    version[4] = 2;
    CHECK_THROWS_WITH(decode_dataset(version), ContainsSubstring("version 2"));

    // "cluster" puts dims at byte 111
    Bytes dims = good;
    put_u64(dims, 119, 3);
    CHECK_THROWS_AS(decode_dataset(dims), FormatError);
    Bytes rows = good;
    put_u64(rows, 111, 7);
    CHECK_THROWS_AS(decode_dataset(rows), FormatError);

    Bytes cut(good.begin(), good.end() - 1);
    CHECK_THROWS_AS(decode_dataset(cut), IoError);
    Bytes head(good.begin(), good.begin() + 6);
    CHECK_THROWS_AS(decode_dataset(head), IoError);
    Bytes extra = good;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_dataset(extra), FormatError);
    CHECK_THROWS_AS(decode_dataset(encode_checkpoint(sample_model())), FormatError);
}

TEST_CASE("checkpoint - Byte-exact round trip")
{
    const auto p = sample_model();
    const Bytes a = encode_checkpoint(p);
    const auto back = decode_checkpoint(a);
    CHECK(back.hyper == p.hyper);
    CHECK(back.x_tilde == p.x_tilde);
    CHECK(back.x_prime == p.x_prime);
    REQUIRE(back.units.size() == 2);
    for (std::size_t u = 0; u < 2; ++u)
    {
        CHECK(back.units[u].kernels == p.units[u].kernels);
        CHECK(back.units[u].gamma == p.units[u].gamma);
        CHECK(back.units[u].beta == p.units[u].beta);
        CHECK(back.units[u].running_mean == p.units[u].running_mean);
        CHECK(back.units[u].running_var == p.units[u].running_var);
    }
    CHECK(back.output_conv == p.output_conv);
    CHECK(encode_checkpoint(back) == a);
}

TEST_CASE("checkpoint - Corrupt input is rejected")
{
    const Bytes good = encode_checkpoint(sample_model());
    Bytes magic = good;
    magic[3] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(magic), FormatError);
    Bytes version = good;
    version[4] = 9;
    CHECK_THROWS_AS(decode_checkpoint(version), FormatError);
    // n_re field at byte 20
    Bytes n_re = good;
    n_re[20] = 3;
    CHECK_THROWS_AS(decode_checkpoint(n_re), FormatError);
    // first tensor rows at byte 52
    Bytes shape = good;
    shape[52] = 9;
    CHECK_THROWS_AS(decode_checkpoint(shape), FormatError);
    Bytes cut(good.begin(), good.end() - 3);
    CHECK_THROWS_AS(decode_checkpoint(cut), IoError);
}

TEST_CASE("files - Save, load and missing paths")
{
    const auto dir = std::filesystem::temp_directory_path() / "pilotnet_test_io";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto ds = build_dataset(ScenarioConfig::cluster(2, 2, 4), 1, 5, Split::test);
    const std::string path = (dir / "d.plds").string();
    save_dataset(ds, path);
    CHECK(load_dataset(path).samples.data == ds.samples.data);
    const auto p = sample_model();
    save_checkpoint(p, (dir / "m.plck").string());
    CHECK(encode_checkpoint(load_checkpoint((dir / "m.plck").string())) == encode_checkpoint(p));

    CHECK_THROWS_WITH(load_dataset((dir / "none.plds").string()), ContainsSubstring("generate it first"));
    CHECK_THROWS_AS(load_checkpoint((dir / "none.plck").string()), IoError);
    CHECK_THROWS_AS(save_dataset(ds, (dir / "no" / "such" / "dir.plds").string()), IoError);
    std::filesystem::remove_all(dir);
}
