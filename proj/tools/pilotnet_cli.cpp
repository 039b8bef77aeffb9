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

#include "pilotnet/harness.hpp"
#include "pilotnet/io.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

using namespace pilotnet;

namespace
{

void emit(const NmseReport &report, const std::string &out)
{
    if (out.empty())
        std::cout << report_csv(report);
    else
    {
        write_report(report, out);
        std::cout << "wrote " << out << '\n';
    }
}

Index side_of(Index n_bs)
{
    const Index s = Index(std::llround(std::sqrt(double(n_bs))));
    if (s * s != n_bs)
        throw ConfigError("--nbs " + std::to_string(n_bs) + " is not a square; pass --nh and --nv instead");
    return s;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"pilotnet: learned pilots and DNN channel estimation for wideband massive MIMO"};
    app.require_subcommand(1);

    // gen
    auto *gen = app.add_subcommand("gen", "Generate a stacked channel dataset");
    std::string gen_scenario = "cluster", gen_split = "train", gen_out;
    Index gen_nh = 8, gen_nv = 8, gen_k = 64;
    std::size_t gen_s = 100;
    std::uint64_t gen_seed = 1;
    gen->add_option("--scenario", gen_scenario, "cluster or onering")->capture_default_str();
    gen->add_option("--nh", gen_nh, "Horizontal antennas")->capture_default_str();
    gen->add_option("--nv", gen_nv, "Vertical antennas")->capture_default_str();
    gen->add_option("--k", gen_k, "Subcarriers")->capture_default_str();
    gen->add_option("--s", gen_s, "Channel realizations")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Master seed")->capture_default_str();
    gen->add_option("--split", gen_split, "train, val or test")->capture_default_str();
    gen->add_option("--out", gen_out, "Output dataset file")->required();

    // train
    auto *tr = app.add_subcommand("train", "Train a pilot + estimator network");
    std::string tr_data, tr_val, tr_out;
    double tr_rho = 0.5;
    std::optional<double> tr_snr;
    TrainConfig tcfg;
    tcfg.epochs = 50;
    Index tr_nre = 6;
    tr->add_option("--data", tr_data, "Training dataset")->required()->check(CLI::ExistingFile);
    tr->add_option("--val", tr_val, "Validation dataset")->check(CLI::ExistingFile);
    tr->add_option("--rho", tr_rho, "Compression ratio M / N_BS")->capture_default_str();
    tr->add_option("--snr-db", tr_snr, "Training SNR in dB (omit for noiseless)");
    tr->add_option("--epochs", tcfg.epochs, "Epochs")->capture_default_str();
    tr->add_option("--batch", tcfg.batch_size, "Batch size")->capture_default_str();
    tr->add_option("--lr", tcfg.learning_rate, "Adam learning rate")->capture_default_str();
    tr->add_option("--n-re", tr_nre, "Convolution units")->capture_default_str();
    tr->add_option("--seed", tcfg.seed, "Training seed")->capture_default_str();
    tr->add_option("--max-steps", tcfg.max_steps, "Stop after this many steps (0 = no cap)")->capture_default_str();
    tr->add_option("--out", tr_out, "Output checkpoint")->required();
    bool tr_quiet = false;
    tr->add_flag("--quiet", tr_quiet, "Suppress per-epoch losses");

    // eval
    auto *ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string ev_model, ev_data, ev_out, ev_method = "dnn";
    std::optional<double> ev_snr;
    std::uint64_t ev_seed = 1;
    ev->add_option("--model", ev_model, "Checkpoint file")->required()->check(CLI::ExistingFile);
    ev->add_option("--data", ev_data, "Test dataset")->required()->check(CLI::ExistingFile);
    ev->add_option("--snr-db", ev_snr, "Test SNR in dB (omit for noiseless)");
    ev->add_option("--seed", ev_seed, "Noise seed")->capture_default_str();
    ev->add_option("--method", ev_method, "Method label written to the CSV")->capture_default_str();
    ev->add_option("--out", ev_out, "Output CSV (stdout when omitted)");

    // somp
    auto *so = app.add_subcommand("somp", "Run the SOMP baseline on a dataset");
    std::string so_data, so_out;
    double so_rho = 0.5;
    Index so_grid = 32, so_iters = 16;
    std::optional<double> so_snr;
    std::uint64_t so_seed = 1;
    so->add_option("--data", so_data, "Test dataset")->required()->check(CLI::ExistingFile);
    so->add_option("--rho", so_rho, "Compression ratio M / N_BS")->capture_default_str();
    so->add_option("--grid", so_grid, "Dictionary points per array dimension")->capture_default_str();
    so->add_option("--iters", so_iters, "SOMP iterations")->capture_default_str();
    so->add_option("--snr-db", so_snr, "Test SNR in dB (omit for noiseless)");
    so->add_option("--seed", so_seed, "Pilot and noise seed")->capture_default_str();
    so->add_option("--out", so_out, "Output CSV (stdout when omitted)");

    // compare
    auto *cmp = app.add_subcommand("compare", "Run an experiment config and write the NMSE report");
    std::string cmp_config, cmp_out, cmp_model_dir;
    std::optional<std::uint64_t> cmp_seed;
    std::optional<Index> cmp_epochs;
    bool cmp_no_wall = false, cmp_verbose = false;
    cmp->add_option("--config", cmp_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmp->add_option("--out", cmp_out, "Output CSV (overrides the config)");
    cmp->add_option("--seed", cmp_seed, "Master seed (overrides the config)");
    cmp->add_option("--epochs", cmp_epochs, "Epochs (overrides the config)");
    cmp->add_option("--model-dir", cmp_model_dir, "Checkpoint cache directory (overrides the config)");
    cmp->add_flag("--no-wall-time", cmp_no_wall, "Write wall_s = 0 for byte-stable output");
    cmp->add_flag("--verbose", cmp_verbose, "Print per-epoch losses");

    // complexity
    auto *cx = app.add_subcommand("complexity", "Print operation counts for both schemes");
    ComplexityInputs ci;
    std::optional<Index> cx_nbs, cx_nh, cx_nv;
    cx->add_option("--nbs", cx_nbs, "Antennas (square array)");
    cx->add_option("--nh", cx_nh, "Horizontal antennas");
    cx->add_option("--nv", cx_nv, "Vertical antennas");
    cx->add_option("--rho", ci.rho, "Compression ratio")->capture_default_str();
    cx->add_option("--nre", ci.n_re, "Convolution units")->capture_default_str();
    cx->add_option("--grid", ci.grid, "Dictionary points per dimension")->capture_default_str();
    cx->add_option("--k", ci.k_sub, "Subcarriers")->capture_default_str();
    cx->add_option("--iters", ci.somp_iterations, "SOMP iterations")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (gen->parsed())
        {
            const ScenarioConfig cfg = ScenarioConfig::by_name(gen_scenario, gen_nh, gen_nv, gen_k);
            const StackedDataset ds = build_dataset(cfg, gen_s, gen_seed, split_from_string(gen_split));
            save_dataset(ds, gen_out);
            std::cout << "wrote " << gen_out << " dims (" << ds.samples.dims[0] << ", " << ds.samples.dims[1] << ", "
                      << ds.samples.dims[2] << ")\n";
        }
        else if (tr->parsed())
        {
            const StackedDataset train_set = load_dataset(tr_data);
            std::optional<StackedDataset> val_set;
            if (!tr_val.empty())
                val_set = load_dataset(tr_val);
            NetworkHyper hyper;
            hyper.n_h = train_set.scenario.n_h;
            hyper.n_v = train_set.scenario.n_v;
            hyper.m = measurements_for(tr_rho, hyper.n_bs());
            hyper.n_re = tr_nre;
            tcfg.snr_db = tr_snr;
            EpochCallback cb;
            if (!tr_quiet)
                cb = [](Index e, double tl, double vl) {
                    std::cout << "epoch " << e + 1 << " train_loss " << tl << " val_loss " << vl << '\n';
                };
            const auto result = train<float>(train_set, val_set ? &*val_set : nullptr, hyper, tcfg, cb);
            save_checkpoint(result.params, tr_out);
            std::cout << "wrote " << tr_out << " after " << result.history.steps << " steps\n";
        }
        else if (ev->parsed())
        {
            const ModelParams<float> params = load_checkpoint(ev_model);
            const StackedDataset test = load_dataset(ev_data);
            const EvalResult r = evaluate_dnn(params, test, ev_snr, ev_seed);
            NmseReport report;
            report.rows.push_back({ev_method, test.scenario.name, extract_pilot(params).rho(), ev_snr.value_or(INFINITY),
                                   r.nmse_db, r.n_test, 0.0});
            report.metadata["seed"] = std::to_string(ev_seed);
            report.metadata["version"] = pilotnet_version;
            emit(report, ev_out);
        }
        else if (so->parsed())
        {
            const StackedDataset test = load_dataset(so_data);
            const Index n_bs = test.n_bs();
            RngStream pilot_rng(so_seed, 0x5049'4c54ull);
            const Matrix<double> pilot = random_pilot(n_bs, measurements_for(so_rho, n_bs), pilot_rng);
            const Dictionary dict = build_dictionary(so_grid, so_grid, test.scenario.n_h, test.scenario.n_v);
            SompConfig sc;
            sc.iterations = so_iters;
            const EvalResult r = evaluate_somp(test, pilot, dict, sc, so_snr, so_seed);
            NmseReport report;
            report.rows.push_back(
                {"somp", test.scenario.name, so_rho, so_snr.value_or(INFINITY), r.nmse_db, r.n_test, 0.0});
            report.metadata["seed"] = std::to_string(so_seed);
            report.metadata["somp_iterations"] = std::to_string(so_iters);
            report.metadata["version"] = pilotnet_version;
            emit(report, so_out);
        }
        else if (cmp->parsed())
        {
            ExperimentConfig cfg = load_experiment_config(cmp_config);
            if (!cmp_out.empty())
                cfg.output = cmp_out;
            if (cmp_seed)
                cfg.seed = *cmp_seed;
            if (cmp_epochs)
                cfg.train.epochs = *cmp_epochs;
            if (!cmp_model_dir.empty())
                cfg.model_dir = cmp_model_dir;
            if (cmp_no_wall)
                cfg.record_wall_time = false;
            cfg.verbose = cmp_verbose;
            const NmseReport report = run_curve(cfg, &std::cerr);
            if (cfg.output.empty())
                std::cout << report_csv(report);
            else
                std::cout << "wrote " << cfg.output << '\n';
        }
        else if (cx->parsed())
        {
            if (cx_nbs)
                ci.n_h = ci.n_v = side_of(*cx_nbs);
            if (cx_nh)
                ci.n_h = *cx_nh;
            if (cx_nv)
                ci.n_v = *cx_nv;
            if (cx_nbs && ci.n_h * ci.n_v != *cx_nbs)
                throw ConfigError("--nh * --nv must equal --nbs");
            std::cout << format_complexity(complexity_report(ci));
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "pilotnet: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
