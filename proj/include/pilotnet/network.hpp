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

// End-to-end pilot/estimator network.
//
//   sample (2 x N_BS) --[X~, shared real weights]--> y (2 x M)  (+ AWGN)
//   y (2M) --[X', dense, no bias]--> coarse estimate c (2 x N_BS) -> maps (2, n_h, n_v)
//   maps --[N_re units: conv3x3(2^n filters) -> BN -> LeakyReLU]--> (2^N_re, n_h, n_v)
//        --[output conv3x3 to 2 channels]--> + c  --> estimate (2 x N_BS)
//
// Batches are row-major (B x 2 N_BS) matrices whose rows are the flattened samples
// [Re h ; Im h]. Feature maps inside the refining stack are (B * n_h * n_v, C) row-major
// matrices with row index b * N_BS + (m * n_v + n), so every conv is a single GEMM on
// the im2col expansion. Kernels are stored (9 * c_in, c_out): row (kh * 3 + kw) * c_in + ci,
// which is the row-major flattening of a (3, 3, c_in, c_out) tensor.
//
// All backpropagation here is written out by hand for this fixed architecture.

#ifndef PILOTNET_NETWORK_HPP
#define PILOTNET_NETWORK_HPP

#include "pilotnet/channel.hpp"
#include "pilotnet/measurement.hpp"
#include "pilotnet/numerics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace pilotnet
{

struct NetworkHyper
{
    Index n_h = 8;
    Index n_v = 8;
    Index m = 32;
    Index n_re = 6;
    double leaky_slope = 0.3;
    double bn_epsilon = 1e-3;
    double bn_momentum = 0.99;

    Index n_bs() const { return n_h * n_v; }
    // Unit u is 0-based; it maps unit_in(u) -> unit_out(u) = 2^(u+1) channels
    Index unit_in(Index u) const { return u == 0 ? 2 : Index(1) << u; }
    Index unit_out(Index u) const { return Index(1) << (u + 1); }
    Index last_channels() const { return n_re == 0 ? 2 : Index(1) << n_re; }

    void validate() const;

    bool operator==(const NetworkHyper &) const = default;
};

template <typename Scalar>
struct ConvUnit
{
    Matrix<Scalar> kernels; // (9 c_in, c_out)
    Matrix<Scalar> gamma;   // (c_out, 1)
    Matrix<Scalar> beta;    // (c_out, 1)
    Vector<Scalar> running_mean;
    Vector<Scalar> running_var;
};

template <typename Scalar>
struct ModelParams
{
    NetworkHyper hyper;
    Matrix<Scalar> x_tilde;     // (N_BS, M) pilot weights
    Matrix<Scalar> x_prime;     // (2M, 2 N_BS) coarse estimator
    std::vector<ConvUnit<Scalar>> units;
    Matrix<Scalar> output_conv; // (9 * 2^N_re, 2)

    template <typename To>
    ModelParams<To> cast() const;

    // All tensors zero, BN gamma = 1, running_var = 1
    static ModelParams zeros(const NetworkHyper &hyper);
};

template <typename Scalar>
struct ConvUnitGrad
{
    Matrix<Scalar> kernels;
    Matrix<Scalar> gamma;
    Matrix<Scalar> beta;
};

template <typename Scalar>
struct ModelGrads
{
    Matrix<Scalar> x_tilde;
    Matrix<Scalar> x_prime;
    std::vector<ConvUnitGrad<Scalar>> units;
    Matrix<Scalar> output_conv;

    static ModelGrads zeros_like(const ModelParams<Scalar> &params);
};

// Visits trainable tensors in checkpoint order: x_tilde, x_prime, per unit (kernels, gamma, beta), output_conv
template <typename Model, typename F>
void for_each_trainable(Model &model, F &&f)
{
    f(model.x_tilde);
    f(model.x_prime);
    for (auto &u : model.units)
    {
        f(u.kernels);
        f(u.gamma);
        f(u.beta);
    }
    f(model.output_conv);
}

enum class BnMode
{
    train,
    infer,
};

// Multiply-accumulate counts of one forward pass, per stage
struct MacCounter
{
    std::uint64_t pilot = 0;
    std::uint64_t coarse = 0;
    std::vector<std::uint64_t> conv;
    std::uint64_t output_conv = 0;

    std::uint64_t conv_total() const;
    std::uint64_t total() const { return pilot + coarse + conv_total() + output_conv; }
};

// ---- layers ------------------------------------------------------------------

// (B * n_h * n_v, C) -> (B * n_h * n_v, 9 C) with zero padding 1
template <typename Scalar>
RowMatrix<Scalar> im2col(const RowMatrix<Scalar> &x, Index n_h, Index n_v);

// Adjoint of im2col: scatters (B * P, 9 C) back onto (B * P, C)
template <typename Scalar>
RowMatrix<Scalar> col2im(const RowMatrix<Scalar> &cols, Index n_h, Index n_v);

template <typename Scalar>
RowMatrix<Scalar> conv2d_forward(const RowMatrix<Scalar> &x, const Matrix<Scalar> &kernels, Index n_h, Index n_v);

// Single-sample form on a (c_in, n_h, n_v) tensor
template <typename Scalar>
RealTensor3<Scalar> conv2d_forward(const RealTensor3<Scalar> &x, const Matrix<Scalar> &kernels);

template <typename Scalar>
struct ConvGrads
{
    RowMatrix<Scalar> d_input;
    Matrix<Scalar> d_kernels;
};

// cols is im2col(x) from the forward pass
template <typename Scalar>
ConvGrads<Scalar> conv2d_backward(const RowMatrix<Scalar> &cols, const Matrix<Scalar> &kernels,
                                  const RowMatrix<Scalar> &d_out, Index n_h, Index n_v);

template <typename Scalar>
struct BatchNormCache
{
    BnMode mode = BnMode::train;
    RowMatrix<Scalar> x_hat;
    Vector<Scalar> inv_std;
};

// Per-column normalization. Train mode uses batch statistics (biased variance) and
// updates running stats as r <- momentum r + (1 - momentum) batch.
template <typename Scalar>
RowMatrix<Scalar> batchnorm_forward(const RowMatrix<Scalar> &x, const Matrix<Scalar> &gamma,
                                    const Matrix<Scalar> &beta, Vector<Scalar> &running_mean,
                                    Vector<Scalar> &running_var, BnMode mode, double epsilon, double momentum,
                                    BatchNormCache<Scalar> *cache = nullptr);

template <typename Scalar>
struct BatchNormGrads
{
    RowMatrix<Scalar> d_input;
    Matrix<Scalar> d_gamma;
    Matrix<Scalar> d_beta;
};

template <typename Scalar>
BatchNormGrads<Scalar> batchnorm_backward(const RowMatrix<Scalar> &d_out, const BatchNormCache<Scalar> &cache,
                                          const Matrix<Scalar> &gamma);

// f(x) = x for x >= 0, slope x otherwise; derivative taken as 1 at x = 0
template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived> &x, double slope)
{
    using S = typename Derived::Scalar;
    const S s = S(slope);
    return x.unaryExpr([s](S v) { return v >= S(0) ? v : s * v; });
}

template <typename DerivedX, typename DerivedG>
auto leaky_relu_backward(const Eigen::MatrixBase<DerivedX> &x, const Eigen::MatrixBase<DerivedG> &d_out, double slope)
{
    using S = typename DerivedX::Scalar;
    const S s = S(slope);
    return x.binaryExpr(d_out, [s](S v, S g) { return v >= S(0) ? g : s * g; });
}

// (B, 2M) -> (B, 2 N_BS), linear and bias free
template <typename Scalar>
RowMatrix<Scalar> coarse_estimate(const RowMatrix<Scalar> &y_flat, const Matrix<Scalar> &x_prime);

// ---- model ---------------------------------------------------------------------

// Noise injected after compression.
// fixed: the given SnrSpec (evaluation). target_snr: sigma^2 recomputed from the current
// batch's measurement power, which keeps the SNR independent of the pilot scale while
// training (the dependence of sigma on X~ is differentiated through).
struct NoiseConfig
{
    enum class Kind
    {
        none,
        fixed,
        target_snr,
    };
    Kind kind = Kind::none;
    double snr_db = 0.0;
    double noise_sigma2 = 0.0;

    static NoiseConfig noiseless() { return {}; }
    static NoiseConfig fixed(const SnrSpec &s) { return {Kind::fixed, s.snr_db, s.noise_sigma2}; }
    static NoiseConfig target_snr(double snr_db) { return {Kind::target_snr, snr_db, 0.0}; }
};

template <typename Scalar>
struct UnitTape
{
    RowMatrix<Scalar> cols;
    BatchNormCache<Scalar> bn;
    RowMatrix<Scalar> pre_activation;
};

// Everything the backward pass needs from a forward pass
template <typename Scalar>
struct ForwardTape
{
    RowMatrix<Scalar> input;       // (B, 2 N_BS)
    RowMatrix<Scalar> measurement; // (B, 2M) noiseless
    RowMatrix<Scalar> unit_noise;  // (B, 2M), entries of variance 1/2
    double noise_scale = 0.0;      // noise = noise_scale * unit_noise
    bool noise_calibrated = false;
    double noise_snr_linear = 0.0; // set when noise_calibrated
    RowMatrix<Scalar> received;    // (B, 2M) measurement + noise
    std::vector<UnitTape<Scalar>> units;
    RowMatrix<Scalar> output_cols;
};

template <typename Scalar>
ModelParams<Scalar> init_params(const NetworkHyper &hyper, RngStream &rng);

// Train mode updates the BN running statistics stored in params; infer mode leaves them.
// rng is required unless noise is none.
template <typename Scalar>
RowMatrix<Scalar> model_forward(ModelParams<Scalar> &params, const RowMatrix<Scalar> &batch, const NoiseConfig &noise,
                                RngStream *rng, BnMode mode, ForwardTape<Scalar> *tape = nullptr,
                                MacCounter *counter = nullptr);

// Inference-mode forward pass on an immutable snapshot
template <typename Scalar>
RowMatrix<Scalar> predict(const ModelParams<Scalar> &params, const RowMatrix<Scalar> &batch, const NoiseConfig &noise,
                          RngStream *rng, MacCounter *counter = nullptr);

template <typename Scalar>
ModelGrads<Scalar> model_backward(const ModelParams<Scalar> &params, const ForwardTape<Scalar> &tape,
                                  const RowMatrix<Scalar> &d_output);

// (1/P) sum_p ||pred_p - target_p||^2 over the P rows
template <typename Scalar>
Scalar mse_loss(const RowMatrix<Scalar> &pred, const RowMatrix<Scalar> &target);

template <typename Scalar>
RowMatrix<Scalar> mse_loss_grad(const RowMatrix<Scalar> &pred, const RowMatrix<Scalar> &target);

// ---- optimization ----------------------------------------------------------------

struct TrainConfig
{
    double learning_rate = 1e-3;
    Index batch_size = 128;
    Index epochs = 300;
    std::optional<double> snr_db;   // training noise level; nullopt trains noiseless
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    std::int64_t max_steps = 0;     // 0 = no cap
    bool shuffle = true;

    void validate() const;
};

template <typename Scalar>
struct AdamState
{
    std::vector<Matrix<Scalar>> first;
    std::vector<Matrix<Scalar>> second;
    std::int64_t t = 0;
};

// Moments sized to match the given tensors, zero-initialized
template <typename Scalar>
AdamState<Scalar> make_adam_state(const std::vector<const Matrix<Scalar> *> &shapes);

template <typename Scalar>
AdamState<Scalar> make_adam_state(const ModelParams<Scalar> &params);

// Bias-corrected Adam on an arbitrary tensor list. Refuses (NumericError, nothing
// modified) when any gradient is non-finite.
template <typename Scalar>
void adam_update(const std::vector<Matrix<Scalar> *> &params, const std::vector<const Matrix<Scalar> *> &grads,
                 AdamState<Scalar> &state, const TrainConfig &cfg);

template <typename Scalar>
void adam_step(ModelParams<Scalar> &params, const ModelGrads<Scalar> &grads, AdamState<Scalar> &state,
               const TrainConfig &cfg);

struct TrainHistory
{
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::int64_t steps = 0;
};

template <typename Scalar>
struct TrainResult
{
    ModelParams<Scalar> params;
    TrainHistory history;
};

using EpochCallback = std::function<void(Index epoch, double train_loss, double val_loss)>;

// Rows [first, first + count) of the dataset as a (count, 2 N_BS) batch
template <typename Scalar>
RowMatrix<Scalar> gather_rows(const StackedDataset &ds, const std::vector<std::size_t> &rows);

template <typename Scalar>
RowMatrix<Scalar> dataset_rows(const StackedDataset &ds, std::size_t first, std::size_t count);

// Continues training from the given parameters
template <typename Scalar>
TrainHistory fit(ModelParams<Scalar> &params, const StackedDataset &train_set, const StackedDataset *val_set,
                 const TrainConfig &cfg, const EpochCallback &on_epoch = {});

template <typename Scalar>
TrainResult<Scalar> train(const StackedDataset &train_set, const StackedDataset *val_set, const NetworkHyper &hyper,
                          const TrainConfig &cfg, const EpochCallback &on_epoch = {});

// Mean loss over a dataset with BN in inference mode
template <typename Scalar>
double dataset_loss(const ModelParams<Scalar> &params, const StackedDataset &ds, const NoiseConfig &noise,
                    RngStream *rng);

template <typename Scalar>
PilotMatrix<Scalar> extract_pilot(const ModelParams<Scalar> &params)
{
    return {params.x_tilde};
}

// Physical transmit matrix X = F X~
ComplexMatrix<double> transmit_matrix(const PilotMatrix<double> &pilot, Index n_h, Index n_v);

} // namespace pilotnet

#endif
