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

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pilotnet
{

using json = nlohmann::json;

// ---- NMSE ------------------------------------------------------------------------

double nmse_ratio(const ComplexMatrix<double> &h_true, const ComplexMatrix<double> &h_est)
{
    if (h_true.rows() != h_est.rows() || h_true.cols() != h_est.cols())
        throw ShapeError("nmse: true and estimated channels differ in shape");
    const double ref = h_true.squaredNorm();
    if (!(ref > 0.0))
        throw NumericError("nmse: true channel has zero norm");
    return (h_true - h_est).squaredNorm() / ref;
}

double ratio_to_db(double mean_ratio)
{
    if (std::isnan(mean_ratio) || mean_ratio < 0.0)
        throw NumericError("nmse: ratio must be a non-negative number");
    if (mean_ratio <= 0.0)
        return nmse_floor_db;
    return std::max(nmse_floor_db, 10.0 * std::log10(mean_ratio));
}

double nmse_db(const ComplexMatrix<double> &h_true, const ComplexMatrix<double> &h_est)
{
    return ratio_to_db(nmse_ratio(h_true, h_est));
}

void NmseAccumulator::add(const ComplexMatrix<double> &h_true, const ComplexMatrix<double> &h_est)
{
    add_ratio(nmse_ratio(h_true, h_est));
}

void NmseAccumulator::add_ratio(double r)
{
    sum_ += r;
    ++n_;
}

double NmseAccumulator::mean_ratio() const
{
    if (n_ == 0)
        throw NumericError("nmse: no realizations accumulated");
    return sum_ / double(n_);
}

// ---- evaluation ------------------------------------------------------------------

namespace
{
ComplexMatrix<double> rows_to_complex(const RowMatrix<float> &rows, Index first, Index k, Index n)
{
    ComplexMatrix<double> h(k, n);
    for (Index i = 0; i < k; ++i)
        for (Index p = 0; p < n; ++p)
            h(i, p) = {double(rows(first + i, p)), double(rows(first + i, n + p))};
    return h;
}

SnrSpec somp_snr(const StackedDataset &ds, const Matrix<double> &pilot, double snr_db)
{
    return calibrate_snr(ds, PilotMatrix<double>{pilot}, snr_db);
}
} // namespace

EvalResult evaluate_dnn(const ModelParams<float> &params, const StackedDataset &test, std::optional<double> snr_db,
                        std::uint64_t seed)
{
    const std::size_t n_real = test.n_realizations();
    if (n_real == 0)
        throw ShapeError("evaluate_dnn: empty test set");
    if (test.n_bs() != params.hyper.n_bs())
        throw ShapeError("evaluate_dnn: test N_BS does not match the network");
    const Index k = test.scenario.k_sub;
    const Index n = test.n_bs();

    NoiseConfig noise = NoiseConfig::noiseless();
    if (snr_db)
        noise = NoiseConfig::fixed(calibrate_snr(test, extract_pilot(params), *snr_db));
    RngStream rng(seed, 0x4556'4e4eull);

    NmseAccumulator acc;
    constexpr std::size_t group = 4; // realizations per forward pass
    for (std::size_t r0 = 0; r0 < n_real; r0 += group)
    {
        const std::size_t count = std::min(group, n_real - r0);
        const RowMatrix<float> target = dataset_rows<float>(test, r0 * std::size_t(k), count * std::size_t(k));
        const RowMatrix<float> pred = predict(params, target, noise, &rng);
        for (std::size_t r = 0; r < count; ++r)
            acc.add(test.realization(r0 + r), rows_to_complex(pred, Index(r) * k, k, n));
    }
    return {acc.db(), acc.count()};
}

EvalResult evaluate_somp(const StackedDataset &test, const Matrix<double> &pilot, const Dictionary &dict,
                         const SompConfig &cfg, std::optional<double> snr_db, std::uint64_t seed)
{
    const std::size_t n_real = test.n_realizations();
    if (n_real == 0)
        throw ShapeError("evaluate_somp: empty test set");
    if (pilot.rows() != test.n_bs() || dict.psi.rows() != test.n_bs())
        throw ShapeError("evaluate_somp: pilot, dictionary and data disagree on N_BS");

    std::optional<SnrSpec> spec;
    if (snr_db)
        spec = somp_snr(test, pilot, *snr_db);
    RngStream rng(seed, 0x534f'4d50ull);

    NmseAccumulator acc;
    for (std::size_t r = 0; r < n_real; ++r)
    {
        const ComplexMatrix<double> h = test.realization(r);
        ComplexMatrix<double> y = somp_measure(h, pilot);
        if (spec)
            y = add_complex_awgn(y, *spec, rng);
        acc.add(h, somp_channel_estimate(y, pilot, dict, cfg).h_s_hat);
    }
    return {acc.db(), acc.count()};
}

Index select_somp_iterations(const StackedDataset &val, const Matrix<double> &pilot, const Dictionary &dict,
                             const std::vector<Index> &candidates, std::optional<double> snr_db, std::uint64_t seed)
{
    const Index m = pilot.cols();
    std::vector<Index> grid;
    for (Index c : candidates)
        grid.push_back(std::clamp<Index>(c, 1, m));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty())
        throw ConfigError("select_somp_iterations: no candidate iteration counts");

    Index best = grid.front();
    double best_db = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        SompConfig cfg;
        cfg.iterations = grid[i];
        const double db = evaluate_somp(val, pilot, dict, cfg, snr_db, seed).nmse_db;
        if (i == 0 || db < best_db)
        {
            best = grid[i];
            best_db = db;
        }
    }
    return best;
}

StackedDataset single_carrier_dataset(const StackedDataset &ds, Index subcarrier)
{
    const Index k = ds.scenario.k_sub;
    if (subcarrier < 0 || subcarrier >= k)
        throw ShapeError("single_carrier_dataset: subcarrier index out of range");
    StackedDataset out = ds;
    const std::size_t row = 2 * std::size_t(ds.n_bs());
    for (std::size_t r = 0; r < ds.n_realizations(); ++r)
    {
        const float *src = ds.samples.slice(r * std::size_t(k) + std::size_t(subcarrier));
        for (Index i = 0; i < k; ++i)
            std::copy(src, src + row, out.samples.data.data() + (r * std::size_t(k) + std::size_t(i)) * row);
    }
    return out;
}

Index measurements_for(double rho, Index n_bs)
{
    if (!(rho > 0.0 && rho <= 1.0))
        throw ConfigError("rho must lie in (0, 1]");
    const Index m = Index(std::llround(rho * double(n_bs)));
    if (m < 1)
        throw ConfigError("rho * N_BS rounds to zero measurements");
    return m;
}

// ---- configuration ---------------------------------------------------------------

ExperimentConfig ExperimentConfig::desk_default()
{
    ExperimentConfig c;
    c.train.epochs = 50;
    c.net.n_re = 6;
    return c;
}

void ExperimentConfig::validate() const
{
    scenario.validate();
    if (rhos.empty() || snrs_db.empty() || methods.empty() || somp_iterations.empty())
        throw ConfigError("experiment: rho, snr, method and SOMP iteration lists must be non-empty");
    for (double r : rhos)
        measurements_for(r, scenario.n_bs());
    for (double s : snrs_db)
        if (!std::isfinite(s))
            throw ConfigError("experiment: SNR values must be finite");
    if (s_train == 0 || s_val == 0 || s_test == 0)
        throw ConfigError("experiment: dataset sizes must be positive");
    if (somp_grid < std::max(scenario.n_h, scenario.n_v))
        throw ConfigError("experiment: SOMP grid must be at least the array side");
    for (const auto &m : methods)
        if (m != "dnn" && m != "dnn_init" && m != "dnn_single" && m != "somp")
            throw ConfigError("experiment: unknown method '" + m + "' (dnn, dnn_init, dnn_single, somp)");
    train.validate();
    NetworkHyper h = net;
    h.n_h = scenario.n_h;
    h.n_v = scenario.n_v;
    h.m = 1;
    h.validate();
}

namespace
{
constexpr double deg = std::numbers::pi / 180.0;

json scenario_json(const ScenarioConfig &s)
{
    return {{"name", s.name},
            {"n_h", s.n_h},
            {"n_v", s.n_v},
            {"k_sub", s.k_sub},
            {"n_clusters", s.n_clusters},
            {"n_paths_per_cluster", s.n_paths_per_cluster},
            {"angle_spread_deg", s.angle_spread_rad / deg},
            {"center_angle_bound_deg", s.center_angle_bound_rad / deg},
            {"d_over_lambda", s.d_over_lambda},
            {"f_s", s.f_s},
            {"tau_max", s.tau_max}};
}

json config_json(const ExperimentConfig &c, bool with_paths)
{
    json j;
    j["scenario"] = scenario_json(c.scenario);
    j["rhos"] = c.rhos;
    j["snrs_db"] = c.snrs_db;
    j["s_train"] = c.s_train;
    j["s_val"] = c.s_val;
    j["s_test"] = c.s_test;
    j["train"] = {{"learning_rate", c.train.learning_rate}, {"batch_size", c.train.batch_size},
                  {"epochs", c.train.epochs},               {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},                 {"adam_epsilon", c.train.adam_epsilon},
                  {"max_steps", c.train.max_steps}};
    j["network"] = {{"n_re", c.net.n_re},
                    {"leaky_slope", c.net.leaky_slope},
                    {"bn_epsilon", c.net.bn_epsilon},
                    {"bn_momentum", c.net.bn_momentum}};
    j["somp"] = {{"grid", c.somp_grid}, {"iterations", c.somp_iterations}};
    j["methods"] = c.methods;
    j["seed"] = c.seed;
    if (with_paths)
    {
        j["output"] = c.output;
        j["model_dir"] = c.model_dir;
        j["record_wall_time"] = c.record_wall_time;
    }
    return j;
}

template <typename T>
void take(const json &j, const char *key, T &dst)
{
    if (j.contains(key))
        dst = j.at(key).get<T>();
}

void reject_unknown(const json &j, std::initializer_list<const char *> keys, const std::string &where)
{
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(keys.begin(), keys.end(), [&](const char *k) { return it.key() == k; }))
            throw ConfigError("experiment config: unknown key '" + it.key() + "' in " + where);
}
} // namespace

ExperimentConfig parse_experiment_config(const std::string &json_text)
{
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("experiment config: top level must be an object");

    ExperimentConfig c = ExperimentConfig::desk_default();
    try
    {
        reject_unknown(j,
                       {"scenario", "rhos", "snrs_db", "s_train", "s_val", "s_test", "train", "network", "somp",
                        "methods", "seed", "output", "model_dir", "record_wall_time"},
                       "top level");
        if (j.contains("scenario"))
        {
            const json &s = j.at("scenario");
            reject_unknown(s,
                           {"name", "n_h", "n_v", "k_sub", "n_clusters", "n_paths_per_cluster", "angle_spread_deg",
                            "center_angle_bound_deg", "d_over_lambda", "f_s", "tau_max"},
                           "scenario");
            const std::string name = s.value("name", c.scenario.name);
            const Index n_h = s.value("n_h", c.scenario.n_h);
            const Index n_v = s.value("n_v", c.scenario.n_v);
            const Index k_sub = s.value("k_sub", c.scenario.k_sub);
            c.scenario = ScenarioConfig::by_name(name, n_h, n_v, k_sub);
            take(s, "n_clusters", c.scenario.n_clusters);
            take(s, "n_paths_per_cluster", c.scenario.n_paths_per_cluster);
            if (s.contains("angle_spread_deg"))
                c.scenario.angle_spread_rad = s.at("angle_spread_deg").get<double>() * deg;
            if (s.contains("center_angle_bound_deg"))
                c.scenario.center_angle_bound_rad = s.at("center_angle_bound_deg").get<double>() * deg;
            take(s, "d_over_lambda", c.scenario.d_over_lambda);
            take(s, "f_s", c.scenario.f_s);
            c.scenario.reset_tau_max();
            take(s, "tau_max", c.scenario.tau_max);
        }
        take(j, "rhos", c.rhos);
        take(j, "snrs_db", c.snrs_db);
        take(j, "s_train", c.s_train);
        take(j, "s_val", c.s_val);
        take(j, "s_test", c.s_test);
        if (j.contains("train"))
        {
            const json &t = j.at("train");
            reject_unknown(t, {"learning_rate", "batch_size", "epochs", "beta1", "beta2", "adam_epsilon", "max_steps"},
                           "train");
            take(t, "learning_rate", c.train.learning_rate);
            take(t, "batch_size", c.train.batch_size);
            take(t, "epochs", c.train.epochs);
            take(t, "beta1", c.train.beta1);
            take(t, "beta2", c.train.beta2);
            take(t, "adam_epsilon", c.train.adam_epsilon);
            take(t, "max_steps", c.train.max_steps);
        }
        if (j.contains("network"))
        {
            const json &n = j.at("network");
            reject_unknown(n, {"n_re", "leaky_slope", "bn_epsilon", "bn_momentum"}, "network");
            take(n, "n_re", c.net.n_re);
            take(n, "leaky_slope", c.net.leaky_slope);
            take(n, "bn_epsilon", c.net.bn_epsilon);
            take(n, "bn_momentum", c.net.bn_momentum);
        }
        if (j.contains("somp"))
        {
            const json &s = j.at("somp");
            reject_unknown(s, {"grid", "iterations"}, "somp");
            take(s, "grid", c.somp_grid);
            if (s.contains("iterations"))
            {
                if (s.at("iterations").is_array())
                    c.somp_iterations = s.at("iterations").get<std::vector<Index>>();
                else
                    c.somp_iterations = {s.at("iterations").get<Index>()};
            }
        }
        take(j, "methods", c.methods);
        take(j, "seed", c.seed);
        take(j, "output", c.output);
        take(j, "model_dir", c.model_dir);
        take(j, "record_wall_time", c.record_wall_time);
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string &path)
{
    const Bytes raw = read_file(path);
    return parse_experiment_config(std::string(raw.begin(), raw.end()));
}

std::string experiment_config_json(const ExperimentConfig &cfg)
{
    return config_json(cfg, true).dump(2);
}

std::uint64_t fnv1a64(const std::string &s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s)
    {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

// ---- report ----------------------------------------------------------------------

const NmseRow *NmseReport::find(const std::string &method, double rho, double snr_db) const
{
    for (const auto &r : rows)
        if (r.method == method && std::abs(r.rho - rho) < 1e-12 && std::abs(r.snr_db - snr_db) < 1e-12)
            return &r;
    return nullptr;
}

namespace
{
std::string fmt(const char *spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void sort_rows(std::vector<NmseRow> &rows)
{
    std::sort(rows.begin(), rows.end(), [](const NmseRow &a, const NmseRow &b) {
        if (a.method != b.method)
            return a.method < b.method;
        if (a.rho != b.rho)
            return a.rho < b.rho;
        return a.snr_db < b.snr_db;
    });
}
} // namespace

std::string report_csv(const NmseReport &report)
{
    std::ostringstream os;
    os << nmse_csv_header << '\n';
    for (const auto &r : report.rows)
        os << r.method << ',' << r.scenario << ',' << fmt("%.6g", r.rho) << ',' << fmt("%.6g", r.snr_db) << ','
           << fmt("%.6f", r.nmse_db) << ',' << r.n_test << ',' << fmt("%.3f", r.wall_s) << '\n';
    return os.str();
}

void write_report(const NmseReport &report, const std::string &csv_path)
{
    const std::string csv = report_csv(report);
    write_file(csv_path, Bytes(csv.begin(), csv.end()));
    json meta = json::object();
    for (const auto &[k, v] : report.metadata)
        meta[k] = v;
    const std::string text = meta.dump(2) + "\n";
    write_file(csv_path + ".meta.json", Bytes(text.begin(), text.end()));
}

// ---- experiment ------------------------------------------------------------------

ExperimentData make_experiment_data(const ExperimentConfig &cfg)
{
    return {build_dataset(cfg.scenario, cfg.s_train, cfg.seed, Split::train),
            build_dataset(cfg.scenario, cfg.s_val, cfg.seed, Split::val),
            build_dataset(cfg.scenario, cfg.s_test, cfg.seed, Split::test)};
}

namespace
{
std::string cell_key(double rho, double snr) { return fmt("%.6g", rho) + "|" + fmt("%.6g", snr); }

std::uint64_t cell_seed(const ExperimentConfig &cfg, const std::string &purpose, double rho, double snr)
{
    return fnv1a64(purpose + "|" + cell_key(rho, snr)) ^ (cfg.seed * 0x9e3779b97f4a7c15ull);
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Identity of a trained model: everything that influences its weights
std::string model_key(const ExperimentConfig &cfg, const std::string &method, double rho, double snr)
{
    json j;
    j["scenario"] = scenario_json(cfg.scenario);
    const json full = config_json(cfg, false);
    j["train"] = full["train"];
    j["network"] = full["network"];
    j["s_train"] = cfg.s_train;
    j["s_val"] = cfg.s_val;
    j["seed"] = cfg.seed;
    j["cell"] = method + "|" + cell_key(rho, snr);
    return hex64(fnv1a64(j.dump()));
}

class Stopwatch
{
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};
} // namespace

NmseReport run_curve(const ExperimentConfig &cfg, std::ostream *log)
{
    cfg.validate();
    const ExperimentData data = make_experiment_data(cfg);
    const bool need_single = std::find(cfg.methods.begin(), cfg.methods.end(), "dnn_single") != cfg.methods.end();
    const StackedDataset single = need_single ? single_carrier_dataset(data.train) : StackedDataset{};
    const bool need_somp = std::find(cfg.methods.begin(), cfg.methods.end(), "somp") != cfg.methods.end();
    Dictionary dict;
    if (need_somp)
        dict = build_dictionary(cfg.somp_grid, cfg.somp_grid, cfg.scenario.n_h, cfg.scenario.n_v);
    if (!cfg.model_dir.empty())
        std::filesystem::create_directories(cfg.model_dir);

    NmseReport report;
    const std::string hash = hex64(fnv1a64(config_json(cfg, false).dump()));
    report.metadata["config_hash"] = hash;
    report.metadata["seed"] = std::to_string(cfg.seed);
    report.metadata["version"] = pilotnet_version;
    report.metadata["scenario"] = cfg.scenario.name;
    report.metadata["n_train_samples"] = std::to_string(data.train.n_samples());
    report.metadata["n_test_realizations"] = std::to_string(data.test.n_realizations());

    const Index n_bs = cfg.scenario.n_bs();
    for (double rho : cfg.rhos)
    {
        const Index m = measurements_for(rho, n_bs);
        for (double snr : cfg.snrs_db)
        {
            NetworkHyper hyper = cfg.net;
            hyper.n_h = cfg.scenario.n_h;
            hyper.n_v = cfg.scenario.n_v;
            hyper.m = m;
            TrainConfig tc = cfg.train;
            tc.seed = cell_seed(cfg, "dnn", rho, snr);
            tc.snr_db = snr;
            const std::uint64_t eval_seed = cell_seed(cfg, "eval", rho, snr);

            for (const auto &method : cfg.methods)
            {
                Stopwatch clock;
                EvalResult res;
                if (method == "somp")
                {
                    RngStream pilot_rng(cell_seed(cfg, "somp", rho, snr), 0x5049'4c54ull);
                    const Matrix<double> pilot = random_pilot(n_bs, m, pilot_rng);
                    SompConfig sc;
                    sc.iterations = select_somp_iterations(data.val, pilot, dict, cfg.somp_iterations, snr,
                                                           cell_seed(cfg, "somp_val", rho, snr));
                    report.metadata["somp_iterations[" + cell_key(rho, snr) + "]"] = std::to_string(sc.iterations);
                    res = evaluate_somp(data.test, pilot, dict, sc, snr, eval_seed);
                }
                else if (method == "dnn_init")
                {
                    RngStream init_rng(tc.seed, 0x494e'4954ull);
                    res = evaluate_dnn(init_params<float>(hyper, init_rng), data.test, snr, eval_seed);
                }
                else
                {
                    const StackedDataset &train_set = method == "dnn_single" ? single : data.train;
                    std::string ckpt;
                    if (!cfg.model_dir.empty())
                        ckpt = (std::filesystem::path(cfg.model_dir) /
                                (method + "_" + model_key(cfg, method, rho, snr) + ".plck"))
                                   .string();
                    ModelParams<float> params;
                    if (!ckpt.empty() && std::filesystem::exists(ckpt))
                    {
                        params = load_checkpoint(ckpt);
                        if (!(params.hyper == hyper))
                            throw FormatError("run_curve: cached checkpoint " + ckpt +
                                              " does not match the configured network; delete it to retrain");
                    }
                    else
                    {
                        EpochCallback cb;
                        if (log && cfg.verbose)
                            cb = [&](Index epoch, double tl, double vl) {
                                *log << "  " << method << " rho=" << rho << " snr=" << snr << " epoch " << epoch + 1
                                     << " train " << tl << " val " << vl << "\n";
                            };
                        params = train<float>(train_set, &data.val, hyper, tc, cb).params;
                        if (!ckpt.empty())
                            save_checkpoint(params, ckpt);
                    }
                    res = evaluate_dnn(params, data.test, snr, eval_seed);
                }
                NmseRow row{method, cfg.scenario.name, rho, snr, res.nmse_db, res.n_test,
                            cfg.record_wall_time ? clock.seconds() : 0.0};
                if (log)
                    *log << method << " rho=" << rho << " snr=" << snr << " nmse_db=" << fmt("%.3f", row.nmse_db)
                         << " (" << fmt("%.1f", clock.seconds()) << " s)" << std::endl;
                report.rows.push_back(row);
            }
        }
    }
    sort_rows(report.rows);
    if (!cfg.output.empty())
        write_report(report, cfg.output);
    return report;
}

// ---- complexity ------------------------------------------------------------------

std::uint64_t conv_channel_product_sum(Index n_re)
{
    std::uint64_t sum = 0;
    std::uint64_t prev = 2;
    for (Index l = 1; l <= n_re; ++l)
    {
        const std::uint64_t cur = std::uint64_t(1) << l;
        sum += prev * cur;
        prev = cur;
    }
    return sum;
}

std::vector<ComplexityRow> complexity_report(const ComplexityInputs &in)
{
    if (in.n_h < 1 || in.n_v < 1 || in.kernel_side != 3 || in.grid < 1 || in.k_sub < 1 || in.somp_iterations < 1)
        throw ConfigError("complexity: sizes must be positive and the kernel side 3");
    const double n = double(in.n_h * in.n_v);
    const Index m = measurements_for(in.rho, in.n_h * in.n_v);
    const double rho = in.rho;
    const double k2 = double(in.kernel_side * in.kernel_side);
    const double sum = double(conv_channel_product_sum(in.n_re));
    const double g2 = double(in.grid) * double(in.grid);
    const double K = double(in.k_sub);
    const double I = double(in.somp_iterations);
    const double p = n; // feature-map positions

    NetworkHyper hyper;
    hyper.n_h = in.n_h;
    hyper.n_v = in.n_v;
    hyper.m = m;
    hyper.n_re = in.n_re;
    RngStream rng(0, 0);
    const ModelParams<float> params = init_params<float>(hyper, rng);
    MacCounter counter;
    const RowMatrix<float> probe = RowMatrix<float>::Zero(1, 2 * hyper.n_bs());
    predict(params, probe, NoiseConfig::noiseless(), nullptr, &counter);

    const double c_last = double(hyper.last_channels());
    std::vector<ComplexityRow> rows;
    rows.push_back({"dnn", "fc_pilot", "N_BS^2 rho", n * n * rho, 2.0 * n * double(m), double(counter.pilot)});
    rows.push_back({"dnn", "fc_coarse", "N_BS^2 rho", n * n * rho, 4.0 * n * double(m), double(counter.coarse)});
    rows.push_back({"dnn", "conv", "N_h N_v k^2 sum n_{l-1} n_l", p * k2 * sum, p * k2 * sum,
                    double(counter.conv_total())});
    rows.push_back({"dnn", "output_conv", "N_h N_v k^2 2^N_re 2", p * k2 * c_last * 2.0, p * k2 * c_last * 2.0,
                    double(counter.output_conv)});
    rows.push_back({"somp", "correlation", "rho N_BS G^2 K I", rho * n * g2 * K * I, -1, -1});
    rows.push_back({"somp", "project_subspace",
                    "I^2 (I+1)^2 / 4 + rho N_BS I (I+1)(2I+1) / 3 + rho N_BS K I (I+1) / 2",
                    0.25 * I * I * (I + 1) * (I + 1) + rho * n * I * (I + 1) * (2 * I + 1) / 3.0 +
                        0.5 * rho * n * K * I * (I + 1),
                    -1, -1});
    rows.push_back({"somp", "update_residual", "rho N_BS K I (I+1) / 2", 0.5 * rho * n * K * I * (I + 1), -1, -1});
    rows.push_back({"somp", "compute_mse", "rho N_BS K^2 I", rho * n * K * K * I, -1, -1});
    rows.push_back({"somp", "reestablish", "N_BS K I", n * K * I, -1, -1});
    return rows;
}

std::string format_complexity(const std::vector<ComplexityRow> &rows)
{
    auto num = [](double v) -> std::string {
        if (v < 0)
            return "-";
        // integer values with thousands separators
        const auto iv = static_cast<unsigned long long>(std::llround(v));
        std::string s = std::to_string(iv);
        for (int i = int(s.size()) - 3; i > 0; i -= 3)
            s.insert(std::size_t(i), ",");
        return s;
    };
    std::ostringstream os;
    os << std::left << std::setw(8) << "scheme" << std::setw(18) << "operation" << std::setw(20) << "table"
       << std::setw(20) << "closed_form" << std::setw(20) << "instrumented"
       << "formula\n";
    for (const auto &r : rows)
        os << std::setw(8) << r.scheme << std::setw(18) << r.operation << std::setw(20) << num(r.table_value)
           << std::setw(20) << num(r.closed_form) << std::setw(20) << num(r.instrumented) << r.formula << '\n';
    return os.str();
}

} // namespace pilotnet
