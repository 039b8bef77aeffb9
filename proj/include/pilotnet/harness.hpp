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

#ifndef PILOTNET_HARNESS_HPP
#define PILOTNET_HARNESS_HPP

#include "pilotnet/channel.hpp"
#include "pilotnet/network.hpp"
#include "pilotnet/somp.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pilotnet
{

inline constexpr double nmse_floor_db = -100.0;
inline constexpr const char *pilotnet_version = "0.1.0";

// ||H - H^||_F^2 / ||H||_F^2; throws NumericError on an all-zero H
double nmse_ratio(const ComplexMatrix<double> &h_true, const ComplexMatrix<double> &h_est);

// 10 log10(ratio), clamped below at -100 dB
double ratio_to_db(double mean_ratio);

double nmse_db(const ComplexMatrix<double> &h_true, const ComplexMatrix<double> &h_est);

// Mean of per-realization ratios
class NmseAccumulator
{
public:
    void add(const ComplexMatrix<double> &h_true, const ComplexMatrix<double> &h_est);
    void add_ratio(double r);
    std::size_t count() const { return n_; }
    double mean_ratio() const;
    double db() const { return ratio_to_db(mean_ratio()); }

private:
    double sum_ = 0.0;
    std::size_t n_ = 0;
};

struct EvalResult
{
    double nmse_db = 0.0;
    std::size_t n_test = 0; // realizations
};

// Test NMSE of a network. Noise (when snr_db is set) is calibrated on the test set
// against the model's own pilot.
EvalResult evaluate_dnn(const ModelParams<float> &params, const StackedDataset &test, std::optional<double> snr_db,
                        std::uint64_t seed);

// Test NMSE of SOMP with a real pilot (N_BS x M) over the given dictionary
EvalResult evaluate_somp(const StackedDataset &test, const Matrix<double> &pilot, const Dictionary &dict,
                         const SompConfig &cfg, std::optional<double> snr_db, std::uint64_t seed);

// Picks I from the candidates (clipped to [1, M]) with the lowest validation NMSE
Index select_somp_iterations(const StackedDataset &val, const Matrix<double> &pilot, const Dictionary &dict,
                             const std::vector<Index> &candidates, std::optional<double> snr_db, std::uint64_t seed);

// Every realization reduced to one subcarrier, repeated K times so the sample count is unchanged
StackedDataset single_carrier_dataset(const StackedDataset &ds, Index subcarrier = 0);

Index measurements_for(double rho, Index n_bs);

struct ExperimentConfig
{
    ScenarioConfig scenario = ScenarioConfig::cluster(8, 8, 64);
    std::vector<double> rhos{0.25, 0.5};
    std::vector<double> snrs_db{0, 5, 10, 15, 20};
    std::size_t s_train = 100;
    std::size_t s_val = 20;
    std::size_t s_test = 50;
    TrainConfig train;
    NetworkHyper net; // n_h, n_v and m are filled in per cell
    Index somp_grid = 32;
    std::vector<Index> somp_iterations{8, 16, 32, 64};
    // dnn, dnn_init (untrained), dnn_single (single-subcarrier training), somp
    std::vector<std::string> methods{"dnn", "somp"};
    std::uint64_t seed = 1;
    std::string output;
    std::string model_dir; // when set, cells save / reuse checkpoints here
    bool record_wall_time = true;
    bool verbose = false;

    static ExperimentConfig desk_default();
    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string &path);
ExperimentConfig parse_experiment_config(const std::string &json_text);
std::string experiment_config_json(const ExperimentConfig &cfg);

struct NmseRow
{
    std::string method;
    std::string scenario;
    double rho = 0.0;
    double snr_db = 0.0;
    double nmse_db = 0.0;
    std::size_t n_test = 0;
    double wall_s = 0.0;
};

struct NmseReport
{
    std::vector<NmseRow> rows; // sorted by (method, rho, snr_db)
    std::map<std::string, std::string> metadata;

    const NmseRow *find(const std::string &method, double rho, double snr_db) const;
};

inline constexpr const char *nmse_csv_header = "method,scenario,rho,snr_db,nmse_db,n_test,wall_s";

std::string report_csv(const NmseReport &report);
void write_report(const NmseReport &report, const std::string &csv_path);

NmseReport run_curve(const ExperimentConfig &cfg, std::ostream *log = nullptr);

// Datasets an experiment uses, generated from its seed
struct ExperimentData
{
    StackedDataset train, val, test;
};
ExperimentData make_experiment_data(const ExperimentConfig &cfg);

struct ComplexityInputs
{
    Index n_h = 16;
    Index n_v = 16;
    double rho = 0.25;
    Index n_re = 8;
    Index kernel_side = 3;
    Index grid = 64; // G per dimension
    Index k_sub = 256;
    Index somp_iterations = 16;
};

struct ComplexityRow
{
    std::string scheme;     // dnn / somp
    std::string operation;
    std::string formula;
    double table_value = 0.0;      // value of the published order formula
    double closed_form = -1.0;     // exact MAC count of this implementation (dnn only)
    double instrumented = -1.0;    // counted during a real forward pass (dnn only)
};

std::vector<ComplexityRow> complexity_report(const ComplexityInputs &in);
std::string format_complexity(const std::vector<ComplexityRow> &rows);

// Sum_{l=1}^{N_re} n_{l-1} n_l with n_0 = 2 and n_l = 2^l
std::uint64_t conv_channel_product_sum(Index n_re);

std::uint64_t fnv1a64(const std::string &s);

} // namespace pilotnet

#endif
